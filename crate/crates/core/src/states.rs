//! Density matrices, classical probability vectors, and the distance and
//! divergence zoo used by the certification testers: trace distance,
//! Hilbert-Schmidt distance, fidelity and squared Bures distance, and the
//! Bures chi-squared divergence, together with their classical
//! counterparts on distributions.
//!
//! Every quantum distance here reduces to its classical counterpart on
//! commuting (simultaneously diagonal) inputs; the test suite pins that
//! down, along with the standard sandwich inequalities between them.

use crate::config::Tolerances;
use crate::linalg::{self, cr, CMat};
use crate::rng::seeded_rng;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from state validation and distance computations.
#[derive(Debug, Clone, Error)]
pub enum StateError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.6e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("trace is {trace:.12}, not 1")]
    TraceNotOne { trace: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("sigma is singular (smallest eigenvalue {min_eigenvalue:.3e})")]
    SigmaSingular { min_eigenvalue: f64 },
    #[error("depolarizing strength {eta} is outside [0, 1]")]
    EtaOutOfRange { eta: f64 },
    #[error("dimension {d} is odd; this family needs even dimension")]
    OddDimension { d: usize },
    #[error("eps {eps} is outside [0, 1/2]")]
    EpsOutOfRange { eps: f64 },
    #[error("rank {rank} is outside 1..={d}")]
    RankOutOfRange { rank: usize, d: usize },
    #[error("counts sum to {sum}, expected {n}")]
    CountMismatch { sum: u64, n: u64 },
    #[error("cannot build a pure state from the zero vector")]
    ZeroVector,
    #[error("not a probability vector: {detail}")]
    NotADistribution { detail: String },
    #[error("bad state spec: {0}")]
    BadSpec(String),
}

/// A validated density matrix: Hermitian, positive semidefinite, unit trace
/// (all within the configured tolerances). Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: CMat,
}

impl DensityMatrix {
    /// Validate an arbitrary complex matrix as a density matrix.
    pub fn new(mat: CMat) -> Result<Self, StateError> {
        Self::new_with(mat, &Tolerances::default())
    }

    /// Validation with explicit tolerances. Checks squareness, Hermiticity,
    /// positivity, and unit trace, in that order, reporting the measured
    /// residual of the first violated invariant.
    pub fn new_with(mat: CMat, tol: &Tolerances) -> Result<Self, StateError> {
        let (rows, cols) = (mat.nrows(), mat.ncols());
        if rows != cols || rows == 0 {
            return Err(StateError::NotSquare { rows, cols });
        }
        let residual = linalg::hermiticity_residual(&mat);
        if residual > tol.hermitian {
            return Err(StateError::NotHermitian { residual });
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        let eigs = linalg::herm_eigenvalues(&sym);
        let min_eigenvalue = *eigs.last().expect("nonempty spectrum");
        if min_eigenvalue < tol.psd {
            return Err(StateError::NotPsd { min_eigenvalue });
        }
        let trace = linalg::trace(&sym).re;
        if (trace - 1.0).abs() > tol.trace {
            return Err(StateError::TraceNotOne { trace });
        }
        Ok(DensityMatrix { dim: rows, mat: sym })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Eigenvalues, clamped into `[0, 1]` and sorted nonincreasing.
    pub fn spectrum(&self) -> Spectrum {
        let vals = linalg::herm_eigenvalues(&self.mat);
        Spectrum::new(vals).expect("validated state has a valid spectrum")
    }

    /// Eigendecomposition (values nonincreasing, matching eigenvector columns).
    pub fn eigen(&self) -> (Vec<f64>, CMat) {
        linalg::herm_eigen(&self.mat)
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.mat, &self.mat).re
    }

    /// Whether the matrix is diagonal within `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| i == j || self.mat[(i, j)].norm() <= tol)
        })
    }

    /// Conjugate by a unitary: `U^dagger rho U`.
    pub fn conjugated(&self, u: &CMat) -> Result<Self, StateError> {
        if u.nrows() != self.dim {
            return Err(StateError::DimMismatch { left: self.dim, right: u.nrows() });
        }
        DensityMatrix::new(u.adjoint() * &self.mat * u)
    }
}

/// Sorted (nonincreasing) eigenvalue vector of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(mut vals: Vec<f64>) -> Result<Self, StateError> {
        let tol = Tolerances::default();
        if vals.is_empty() {
            return Err(StateError::NotADistribution { detail: "empty spectrum".into() });
        }
        if let Some(&bad) = vals.iter().find(|&&v| v < tol.prob_floor || v > 1.0 + tol.prob_sum) {
            return Err(StateError::NotADistribution {
                detail: format!("eigenvalue {bad} outside [0, 1]"),
            });
        }
        let sum: f64 = vals.iter().sum();
        if (sum - 1.0).abs() > tol.prob_sum {
            return Err(StateError::NotADistribution {
                detail: format!("eigenvalues sum to {sum}"),
            });
        }
        for v in vals.iter_mut() {
            *v = v.max(0.0);
        }
        vals.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum(vals))
    }

    pub fn uniform(d: usize) -> Self {
        Spectrum(vec![1.0 / d as f64; d])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Power sum `p_r = sum_i alpha_i^r`.
    pub fn power_sum(&self, r: u32) -> f64 {
        self.0.iter().map(|&a| a.powi(r as i32)).sum()
    }
}

/// A classical probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalDistribution(Vec<f64>);

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, StateError> {
        if probs.is_empty() {
            return Err(StateError::NotADistribution { detail: "empty".into() });
        }
        if let Some(&bad) = probs.iter().find(|&&p| p < 0.0) {
            return Err(StateError::NotADistribution {
                detail: format!("negative probability {bad}"),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(StateError::NotADistribution {
                detail: format!("probabilities sum to {sum}"),
            });
        }
        Ok(ClassicalDistribution(probs))
    }

    pub fn uniform(d: usize) -> Self {
        ClassicalDistribution(vec![1.0 / d as f64; d])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Diagonal density matrix carrying this distribution.
    pub fn to_diagonal_state(&self) -> DensityMatrix {
        let d = self.0.len();
        let mat = CMat::from_fn(d, d, |i, j| if i == j { cr(self.0[i]) } else { linalg::C_ZERO });
        DensityMatrix::new(mat).expect("diagonal distribution is a valid state")
    }
}

/// Traceless Hermitian difference of two states.
#[derive(Debug, Clone)]
pub struct DeltaMatrix {
    mat: CMat,
}

impl DeltaMatrix {
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self, StateError> {
        check_dims(rho, sigma)?;
        Ok(DeltaMatrix { mat: rho.matrix() - sigma.matrix() })
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<(), StateError> {
    if a.dim() != b.dim() {
        return Err(StateError::DimMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

fn check_lens(p: &[f64], q: &[f64]) -> Result<(), StateError> {
    if p.len() != q.len() {
        return Err(StateError::DimMismatch { left: p.len(), right: q.len() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Quantum distances
// ---------------------------------------------------------------------------

/// Trace distance: half the sum of singular values of `rho - sigma`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    check_dims(rho, sigma)?;
    let delta = rho.matrix() - sigma.matrix();
    let eigs = linalg::herm_eigenvalues(&delta);
    Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
}

/// Hilbert-Schmidt (Frobenius) distance `sqrt(tr((rho - sigma)^2))`.
pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    check_dims(rho, sigma)?;
    let delta = rho.matrix() - sigma.matrix();
    Ok(delta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// Squared Hilbert-Schmidt distance.
pub fn hs_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    hs_distance(rho, sigma).map(|d| d * d)
}

/// Fidelity: the trace norm of `sqrt(rho) sqrt(sigma)`.
///
/// Computed from the singular values of the product of the two PSD square
/// roots; eigenvalues below the clamp tolerance are zeroed first.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    check_dims(rho, sigma)?;
    let tol = Tolerances::default();
    let a = linalg::psd_sqrt(rho.matrix(), tol.eig_clamp);
    let b = linalg::psd_sqrt(sigma.matrix(), tol.eig_clamp);
    let prod = a * b;
    let f: f64 = linalg::singular_values(&prod, tol.eig_clamp).iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Squared Bures distance `2 (1 - fidelity)`.
pub fn bures_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    Ok(2.0 * (1.0 - fidelity(rho, sigma)?))
}

/// Bures chi-squared divergence of `rho` from a full-rank `sigma`.
///
/// Diagonalizes `sigma = U diag(beta) U^dagger` and evaluates
/// `sum_ij 2 |Delta'_ij|^2 / (beta_i + beta_j)` with
/// `Delta' = U^dagger (rho - sigma) U`. Rank-deficient `sigma` is refused.
pub fn bures_chisq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    check_dims(rho, sigma)?;
    let tol = Tolerances::default();
    let (beta, u) = sigma.eigen();
    let min = *beta.last().expect("nonempty");
    if min <= tol.full_rank {
        return Err(StateError::SigmaSingular { min_eigenvalue: min });
    }
    let delta = rho.matrix() - sigma.matrix();
    let rotated = u.adjoint() * delta * &u;
    let d = rho.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += 2.0 * rotated[(i, j)].norm_sqr() / (beta[i] + beta[j]);
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Classical distances
// ---------------------------------------------------------------------------

/// Total variation distance.
pub fn tv(p: &[f64], q: &[f64]) -> Result<f64, StateError> {
    check_lens(p, q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Euclidean distance between probability vectors.
pub fn l2(p: &[f64], q: &[f64]) -> Result<f64, StateError> {
    check_lens(p, q)?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Hellinger distance.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64, StateError> {
    check_lens(p, q)?;
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let t = a.sqrt() - b.sqrt();
            t * t
        })
        .sum();
    Ok(s.sqrt())
}

/// Chi-squared divergence of `p` from `q`; infinite when `p` puts mass
/// outside the support of `q`.
pub fn classical_chisq(p: &[f64], q: &[f64]) -> Result<f64, StateError> {
    check_lens(p, q)?;
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if b == 0.0 {
            if a != 0.0 {
                return Ok(f64::INFINITY);
            }
        } else {
            acc += (a - b) * (a - b) / b;
        }
    }
    Ok(acc)
}

/// Add-one (Laplace) estimate from multinomial counts.
pub fn add_one_estimate(counts: &[u64], n: u64) -> Result<ClassicalDistribution, StateError> {
    let sum: u64 = counts.iter().sum();
    if sum != n {
        return Err(StateError::CountMismatch { sum, n });
    }
    let d = counts.len() as u64;
    let denom = (n + d) as f64;
    ClassicalDistribution::new(counts.iter().map(|&c| (c + 1) as f64 / denom).collect())
}

// ---------------------------------------------------------------------------
// Channels and generators
// ---------------------------------------------------------------------------

/// Depolarizing channel `(1 - eta) rho + eta Id/d`.
pub fn depolarize(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix, StateError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(StateError::EtaOutOfRange { eta });
    }
    let d = rho.dim();
    let mixed = rho.matrix().scale(1.0 - eta) + linalg::eye(d).scale(eta / d as f64);
    DensityMatrix::new(mixed)
}

/// The maximally mixed state `Id/d`.
pub fn maximally_mixed(d: usize) -> DensityMatrix {
    DensityMatrix::new(linalg::eye(d).scale(1.0 / d as f64)).expect("Id/d is a valid state")
}

/// Diagonal state with alternating eigenvalues `(1 + 2 eps)/d, (1 - 2 eps)/d`.
///
/// Needs even `d` and `0 <= eps <= 1/2`. The canonical hard instance for
/// mixedness testing: its trace distance from `Id/d` is exactly `eps`.
pub fn paninski(d: usize, eps: f64) -> Result<DensityMatrix, StateError> {
    if d == 0 || d % 2 != 0 {
        return Err(StateError::OddDimension { d });
    }
    if !(0.0..=0.5).contains(&eps) {
        return Err(StateError::EpsOutOfRange { eps });
    }
    let hi = (1.0 + 2.0 * eps) / d as f64;
    let lo = (1.0 - 2.0 * eps) / d as f64;
    let mat = CMat::from_fn(d, d, |i, j| {
        if i != j {
            linalg::C_ZERO
        } else if i % 2 == 0 {
            cr(hi)
        } else {
            cr(lo)
        }
    });
    DensityMatrix::new(mat)
}

/// Random mixed state of the given rank: `G G^dagger / tr(G G^dagger)` with
/// `G` a `d x rank` matrix of independent standard complex Gaussians drawn
/// from the seeded stream (see [`crate::rng`]).
pub fn random_state(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix, StateError> {
    if rank < 1 || rank > d {
        return Err(StateError::RankOutOfRange { rank, d });
    }
    let mut rng = seeded_rng(seed);
    let g = linalg::ginibre(d, rank, &mut rng);
    let gram = &g * g.adjoint();
    let tr = linalg::trace(&gram).re;
    DensityMatrix::new(gram.scale(1.0 / tr))
}

/// Pure state `|v><v| / <v|v>`.
pub fn pure_state(v: &[Complex64]) -> Result<DensityMatrix, StateError> {
    let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return Err(StateError::ZeroVector);
    }
    let d = v.len();
    let mat = CMat::from_fn(d, d, |i, j| v[i] * v[j].conj() / norm_sq);
    DensityMatrix::new(mat)
}

/// Uniform-superposition pure state in dimension `d`.
pub fn plus_state(d: usize) -> DensityMatrix {
    let v = vec![cr(1.0); d];
    pure_state(&v).expect("nonzero vector")
}

/// The diagonal of a state as a classical distribution (renormalized to
/// absorb the trace tolerance).
pub fn diag_of(rho: &DensityMatrix) -> ClassicalDistribution {
    let d = rho.dim();
    let mut probs: Vec<f64> = (0..d).map(|i| rho.matrix()[(i, i)].re.max(0.0)).collect();
    let sum: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= sum;
    }
    ClassicalDistribution::new(probs).expect("renormalized diagonal")
}

// ---------------------------------------------------------------------------
// State specifications (file format + CLI shorthand)
// ---------------------------------------------------------------------------

/// Named generator with its parameters, as it appears in state files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeneratorSpec {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

/// Real/imaginary parts of an explicit matrix, row-major.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// A state input: either a generator or an explicit matrix.
///
/// JSON forms: `{"generator": {"name": "paninski", "d": 4, "eps": 0.25}}`
/// or `{"matrix": {"re": [[...]], "im": [[...]]}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

impl StateSpec {
    /// Parse the CLI shorthand `name:arg:arg`, e.g. `paninski:8:0.2`,
    /// `mixed:8`, `random:4:2:7`, `basis:2:0`, `plus:2`.
    pub fn parse_shorthand(s: &str) -> Result<Self, StateError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |msg: &str| StateError::BadSpec(format!("{msg} in `{s}`"));
        let name = parts[0];
        let num = |i: usize| -> Result<usize, StateError> {
            parts
                .get(i)
                .ok_or_else(|| bad("missing argument"))?
                .parse()
                .map_err(|_| bad("bad integer"))
        };
        let real = |i: usize| -> Result<f64, StateError> {
            parts
                .get(i)
                .ok_or_else(|| bad("missing argument"))?
                .parse()
                .map_err(|_| bad("bad number"))
        };
        let gen = match name {
            "paninski" => GeneratorSpec {
                name: name.into(),
                d: Some(num(1)?),
                eps: Some(real(2)?),
                rank: None,
                seed: None,
                index: None,
            },
            "mixed" | "maximally_mixed" => GeneratorSpec {
                name: "maximally_mixed".into(),
                d: Some(num(1)?),
                eps: None,
                rank: None,
                seed: None,
                index: None,
            },
            "random" => GeneratorSpec {
                name: name.into(),
                d: Some(num(1)?),
                eps: None,
                rank: Some(num(2)?),
                seed: Some(num(3)? as u64),
                index: None,
            },
            "basis" => GeneratorSpec {
                name: name.into(),
                d: Some(num(1)?),
                eps: None,
                rank: None,
                seed: None,
                index: Some(num(2)?),
            },
            "plus" => GeneratorSpec {
                name: name.into(),
                d: Some(num(1)?),
                eps: None,
                rank: None,
                seed: None,
                index: None,
            },
            other => return Err(bad(&format!("unknown generator `{other}`"))),
        };
        Ok(StateSpec { generator: Some(gen), matrix: None })
    }

    /// Materialize the specified state.
    pub fn build(&self) -> Result<DensityMatrix, StateError> {
        match (&self.generator, &self.matrix) {
            (Some(g), None) => g.build(),
            (None, Some(m)) => m.build(),
            _ => Err(StateError::BadSpec(
                "state spec needs exactly one of `generator` or `matrix`".into(),
            )),
        }
    }
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<DensityMatrix, StateError> {
        let need_d = || self.d.ok_or_else(|| StateError::BadSpec("missing `d`".into()));
        match self.name.as_str() {
            "paninski" => {
                let eps = self.eps.ok_or_else(|| StateError::BadSpec("missing `eps`".into()))?;
                paninski(need_d()?, eps)
            }
            "maximally_mixed" => Ok(maximally_mixed(need_d()?)),
            "random" => {
                let rank = self.rank.ok_or_else(|| StateError::BadSpec("missing `rank`".into()))?;
                let seed = self.seed.ok_or_else(|| StateError::BadSpec("missing `seed`".into()))?;
                random_state(need_d()?, rank, seed)
            }
            "basis" => {
                let d = need_d()?;
                let i = self.index.ok_or_else(|| StateError::BadSpec("missing `index`".into()))?;
                if i >= d {
                    return Err(StateError::BadSpec(format!("basis index {i} >= d {d}")));
                }
                let mut v = vec![linalg::C_ZERO; d];
                v[i] = linalg::C_ONE;
                pure_state(&v)
            }
            "plus" => Ok(plus_state(need_d()?)),
            other => Err(StateError::BadSpec(format!("unknown generator `{other}`"))),
        }
    }
}

impl MatrixSpec {
    pub fn build(&self) -> Result<DensityMatrix, StateError> {
        let d = self.re.len();
        if self.im.len() != d {
            return Err(StateError::BadSpec("re/im row counts differ".into()));
        }
        for row in self.re.iter().chain(self.im.iter()) {
            if row.len() != d {
                return Err(StateError::BadSpec("matrix rows must all have length d".into()));
            }
        }
        let mat = CMat::from_fn(d, d, |i, j| Complex64::new(self.re[i][j], self.im[i][j]));
        DensityMatrix::new(mat)
    }
}
