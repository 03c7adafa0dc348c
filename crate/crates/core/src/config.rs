//! Numerical tolerances and size caps.
//!
//! Every tolerance used by state validation, eigenvalue clamping, and
//! outcome clustering lives here so callers can tighten or relax them in
//! one place. The defaults are what the test suite and the CLI pin.

use serde::{Deserialize, Serialize};

/// Tolerances for validating states and clustering spectra.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Maximum entrywise deviation from Hermiticity.
    pub hermitian: f64,
    /// Most negative eigenvalue accepted as "positive semidefinite".
    pub psd: f64,
    /// Maximum deviation of the trace from 1.
    pub trace: f64,
    /// Eigenvalues below this are clamped to zero before square roots.
    pub eig_clamp: f64,
    /// Minimum eigenvalue for a matrix to count as full rank.
    pub full_rank: f64,
    /// Relative threshold for clustering eigenvalues into outcomes.
    pub eig_cluster: f64,
    /// Probabilities may undershoot zero by this much before erroring.
    pub prob_floor: f64,
    /// Total probability must be within this of 1.
    pub prob_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-9,
            psd: -1e-9,
            trace: 1e-9,
            eig_clamp: 1e-12,
            full_rank: 1e-12,
            eig_cluster: 1e-9,
            prob_floor: -1e-12,
            prob_sum: 1e-9,
        }
    }
}

/// Size caps for the exact (enumeration / dense matrix) backends.
///
/// Past a cap the operation is refused rather than approximated.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Caps {
    /// Largest ambient symmetric group for class-average products.
    pub class_ambient: usize,
    /// Largest `m + n` for labeled orbit-average products.
    pub orbit_ambient: usize,
    /// Largest dense operator side length (`d^n`).
    pub dense_dim: usize,
    /// Largest `n` for isotypic projector construction.
    pub schur_n: usize,
    /// Largest `n` for character tables.
    pub character_n: usize,
    /// Largest `n` for the exact shape distribution of Schur sampling.
    pub sw_pmf_n: usize,
    /// Largest `d` for the exact shape distribution of Schur sampling.
    pub sw_pmf_d: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            class_ambient: 10,
            orbit_ambient: 10,
            dense_dim: 4096,
            schur_n: 8,
            character_n: 8,
            sw_pmf_n: 40,
            sw_pmf_d: 6,
        }
    }
}
