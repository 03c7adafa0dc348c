//! Certification testers: sample-size planning from variance envelopes, the
//! threshold decision rule, and the test procedures wired to a sampling or
//! analytic backend.
//!
//! A tester distinguishes "the statistic is at most `gamma * theta`" from
//! "the statistic exceeds `theta`" by averaging an unbiased estimator and
//! comparing against the midpoint `(1 + gamma)/2 * theta`. The number of
//! copies comes from the estimator's variance envelope `b(mu)/n^2 + v(mu)/n`
//! via a one-sided Chebyshev budget; the universal constants multiplying
//! the envelope are pinned in a versioned constants file (see
//! [`constants::Constants`]), either by a closed-form worst-case Chebyshev
//! solve or by a seeded Monte Carlo calibration sweep.

pub mod calibrate;
pub mod constants;
pub mod planner;
pub mod profiles;
pub mod testers;

pub use calibrate::{calibrate_certified, calibrate_mixedness, CalibrationConfig};
pub use constants::{Constants, PlannerConstant};
pub use planner::{decide, plan_samples, plan_with_n};
pub use profiles::EstimatorProfile;
pub use testers::{
    mixedness_dense_law, prepare_chisq, test_chisq_known_sigma, test_diagonal, test_fidelity,
    test_hs_two_state, test_low_rank, test_maximally_mixed, ChisqPrepared, HsDenseSampler,
    FIDELITY_GAMMA, FIDELITY_THETA_COEFF,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distance-scale guarantee quoted as "0.99 eps vs eps", applied on the
/// squared scale where the estimators live.
pub const GAMMA_DISTANCE_SQUARED: f64 = 0.99 * 0.99;
/// Guarantee ratio for divergences that are already on the squared scale.
pub const GAMMA_CHI_SQUARED: f64 = 0.99;
/// Low-rank reduction constant `1/(1 + 1/sqrt(2)) = 2 - sqrt(2)`.
pub const PCA_REDUCTION_C: f64 = 0.585786437626905;

#[derive(Debug, Clone, Error)]
pub enum CertifyError {
    #[error("threshold {theta} must be positive and finite")]
    BadTheta { theta: f64 },
    #[error("gamma {gamma} must lie strictly between 0 and 1")]
    BadGamma { gamma: f64 },
    #[error("eps {eps} outside the admissible range {range}")]
    BadEps { eps: f64, range: &'static str },
    #[error("profile `{name}` violates the envelope monotonicity conditions: {detail}")]
    ProfileNotMonotone { name: String, detail: String },
    #[error("no planner constant registered for profile `{name}`")]
    UnknownProfile { name: String },
    #[error(
        "reference state too ill-conditioned: smallest eigenvalue {min_eigenvalue:.3e} < required {required:.3e}"
    )]
    SigmaIllConditioned { min_eigenvalue: f64, required: f64 },
    #[error("backend {backend:?} is not available for test `{test}`")]
    UnsupportedBackend { test: &'static str, backend: Backend },
    #[error("calibration grid exhausted without meeting target error {target}")]
    GridExhausted { target: f64 },
    #[error("rank {k} must be at least 1")]
    BadRank { k: usize },
    #[error(transparent)]
    State(#[from] crate::states::StateError),
    #[error(transparent)]
    Symalg(#[from] crate::symalg::SymalgError),
    #[error(transparent)]
    Dense(#[from] crate::densesim::DenseError),
    #[error(transparent)]
    Chisq(#[from] crate::chisq::ChisqError),
    #[error(transparent)]
    SchurWeyl(#[from] crate::schurweyl::SchurWeylError),
    #[error("constants file error: {0}")]
    Constants(String),
}

/// How a tester obtains its statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Insertion-tableau sampling of the collective-measurement law.
    Rsk,
    /// Exact outcome law on the dense tensor power (small copy counts).
    Dense,
    /// Exact moments plus a Chebyshev certificate; no sampling.
    Analytic,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rsk" => Ok(Backend::Rsk),
            "dense" => Ok(Backend::Dense),
            "analytic" => Ok(Backend::Analytic),
            other => Err(format!("unknown backend `{other}` (expected rsk|dense|analytic)")),
        }
    }
}

/// Close/Far decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Close,
    Far,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Close => write!(f, "close"),
            Verdict::Far => write!(f, "far"),
        }
    }
}

/// A planned test: copy count, threshold, guarantee ratio, planner constant,
/// and the Chebyshev error guaranteed by the variance envelope at this `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestPlan {
    pub n: u64,
    pub theta: f64,
    pub gamma: f64,
    pub c: f64,
    pub guaranteed_error: f64,
}

impl TestPlan {
    /// The decision threshold `(1 + gamma)/2 * theta`.
    pub fn midpoint(&self) -> f64 {
        0.5 * (1.0 + self.gamma) * self.theta
    }
}

/// Outcome of one tester run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestVerdict {
    pub verdict: Verdict,
    pub statistic: f64,
    pub plan: TestPlan,
    /// Total copies consumed (both states combined for two-state tests).
    pub copies_used: u64,
    /// Chebyshev error bound from the instance's exact variance, when the
    /// backend computed one (analytic mode).
    pub certified_error: Option<f64>,
}

impl TestVerdict {
    /// The JSON record shape used by reports.
    pub fn to_record(&self, seed: u64) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.verdict,
            "statistic": self.statistic,
            "n": self.plan.n,
            "theta": self.plan.theta,
            "guaranteed_error": self.certified_error.unwrap_or(self.plan.guaranteed_error),
            "copies_used": self.copies_used,
            "seed": seed,
        })
    }
}

/// Knobs shared by the testers.
#[derive(Debug, Clone)]
pub struct TesterConfig {
    /// Independent measurement batches to average (the copy budget is split
    /// evenly across them).
    pub batches: u64,
    /// Explicit copy budget overriding the planner (validation runs).
    pub n_override: Option<u64>,
    pub caps: crate::config::Caps,
    pub tolerances: crate::config::Tolerances,
}

impl Default for TesterConfig {
    fn default() -> Self {
        TesterConfig {
            batches: 1,
            n_override: None,
            caps: crate::config::Caps::default(),
            tolerances: crate::config::Tolerances::default(),
        }
    }
}
