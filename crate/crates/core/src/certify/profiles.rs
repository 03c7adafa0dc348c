//! Variance envelopes for the planner.
//!
//! A profile describes an unbiased estimator family through two envelope
//! functions: `Var[X^(n)] <= b(mu)/n^2 + v(mu)/n` where `mu >= 0` is the
//! estimated quantity. Planning is sound only when `b`, `v`, `mu^2/b`, and
//! `mu^2/v` are all nondecreasing; every profile is checked on a grid
//! before use and refused on violation.

use super::constants::Constants;
use super::CertifyError;
use std::sync::Arc;

type EnvelopeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An estimator's variance envelope.
#[derive(Clone)]
pub struct EstimatorProfile {
    name: String,
    b: EnvelopeFn,
    v: EnvelopeFn,
}

impl std::fmt::Debug for EstimatorProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EstimatorProfile").field("name", &self.name).finish()
    }
}

impl EstimatorProfile {
    pub fn new(
        name: impl Into<String>,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        EstimatorProfile { name: name.into(), b: Arc::new(b), v: Arc::new(v) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Second-order envelope coefficient at `mu`.
    pub fn b(&self, mu: f64) -> f64 {
        (self.b)(mu)
    }

    /// First-order envelope coefficient at `mu`.
    pub fn v(&self, mu: f64) -> f64 {
        (self.v)(mu)
    }

    /// Purity / mixedness estimator: bounded second-order term, linear
    /// first-order term.
    pub fn mixedness(k: &Constants) -> Self {
        let b0 = k.mixedness_b;
        let v0 = k.mixedness_v_coeff;
        EstimatorProfile::new("mixedness", move |_| b0, move |mu| v0 * mu)
    }

    /// Two-state squared-Hilbert-Schmidt estimator.
    pub fn hilbert_schmidt(k: &Constants) -> Self {
        let b0 = k.hs_bound_k1;
        let v0 = k.hs_bound_v_coeff;
        EstimatorProfile::new("hs", move |_| b0, move |mu| v0 * mu)
    }

    /// Averaged chi-squared estimator against a reference with dimension
    /// `d` and smallest eigenvalue `delta`.
    pub fn chisq(d: usize, delta: f64) -> Self {
        let df = d as f64;
        let ratio = 2.0 * df / delta;
        EstimatorProfile::new(
            format!("chisq(d={d})"),
            move |mu| 4.0 * (2.0 * df * df + ratio * mu),
            move |mu| 4.0 * (ratio.sqrt() * mu.powf(1.5) + 2.0 * mu),
        )
    }

    /// Check the four envelope monotonicity conditions on a geometric grid
    /// around the working threshold.
    pub fn validate_monotone(&self, theta: f64) -> Result<(), CertifyError> {
        let grid: Vec<f64> = (-24..=12)
            .map(|k| theta * 10f64.powf(k as f64 / 4.0))
            .filter(|&x| x.is_finite() && x > 0.0)
            .collect();
        let tol = 1e-9;
        let check = |label: &str, f: &dyn Fn(f64) -> f64| -> Result<(), CertifyError> {
            for w in grid.windows(2) {
                let (lo, hi) = (f(w[0]), f(w[1]));
                if !(lo.is_finite() && hi.is_finite()) || hi < lo - tol * lo.abs().max(1.0) {
                    return Err(CertifyError::ProfileNotMonotone {
                        name: self.name.clone(),
                        detail: format!("{label} decreases between {} and {}", w[0], w[1]),
                    });
                }
            }
            Ok(())
        };
        check("b", &|mu| self.b(mu))?;
        check("v", &|mu| self.v(mu))?;
        check("mu^2/b", &|mu| mu * mu / self.b(mu))?;
        check("mu^2/v", &|mu| mu * mu / self.v(mu))?;
        Ok(())
    }
}
