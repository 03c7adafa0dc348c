//! Copy-count planning and the threshold decision rule.

use super::profiles::EstimatorProfile;
use super::{CertifyError, TestPlan, TestVerdict, Verdict};

/// Plan the copy count for distinguishing `mu <= gamma*theta` from
/// `mu > theta` with an estimator obeying the profile's envelope:
///
/// `n = ceil(C * max( sqrt(b(theta))/(gamma*theta), v(theta)/(gamma*theta)^2 ))`.
///
/// The profile's envelope monotonicity is validated first and the plan is
/// refused if it fails.
pub fn plan_samples(
    profile: &EstimatorProfile,
    theta: f64,
    gamma: f64,
    c: f64,
) -> Result<TestPlan, CertifyError> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(CertifyError::BadTheta { theta });
    }
    if !(gamma.is_finite() && 0.0 < gamma && gamma < 1.0) {
        return Err(CertifyError::BadGamma { gamma });
    }
    profile.validate_monotone(theta)?;
    let gt = gamma * theta;
    let raw = c * (profile.b(theta).sqrt() / gt).max(profile.v(theta) / (gt * gt));
    let n = (raw.ceil() as u64).max(2);
    Ok(plan_with_n(profile, theta, gamma, c, n))
}

/// Finalize a plan at an explicit copy count (planner override), computing
/// the envelope-based Chebyshev error guarantee at that `n`.
pub fn plan_with_n(
    profile: &EstimatorProfile,
    theta: f64,
    gamma: f64,
    c: f64,
    n: u64,
) -> TestPlan {
    TestPlan { n, theta, gamma, c, guaranteed_error: envelope_error(profile, theta, gamma, n) }
}

/// Worst-case Chebyshev error of the midpoint rule at copy count `n`, over
/// both arms (`mu <= gamma*theta` and `mu > theta`), straight from the
/// envelope and its monotonicity:
/// `4 (b(theta)/n^2 + v(theta)/n) / ((1-gamma)^2 theta^2)`, clamped to 1.
pub fn envelope_error(profile: &EstimatorProfile, theta: f64, gamma: f64, n: u64) -> f64 {
    let nf = n as f64;
    let var = profile.b(theta) / (nf * nf) + profile.v(theta) / nf;
    let gap = 0.5 * (1.0 - gamma) * theta;
    (var / (gap * gap)).min(1.0)
}

/// Chebyshev error certificate from an instance's exact mean and variance:
/// the probability that the sampled statistic falls on the wrong side of
/// the midpoint.
pub fn certified_error(mean: f64, variance: f64, plan: &TestPlan) -> f64 {
    let gap = (mean - plan.midpoint()).abs();
    if gap <= 0.0 {
        return 1.0;
    }
    (variance / (gap * gap)).min(1.0)
}

/// The decision rule: report Close exactly when the statistic is at most
/// the midpoint `(1 + gamma)/2 * theta` (boundary inclusive).
pub fn decide(statistic: f64, plan: &TestPlan) -> TestVerdict {
    let verdict = if statistic <= plan.midpoint() { Verdict::Close } else { Verdict::Far };
    TestVerdict {
        verdict,
        statistic,
        copies_used: plan.n,
        plan: plan.clone(),
        certified_error: None,
    }
}

/// Smallest planner constant whose worst-case envelope error meets
/// `target`, independent of the profile: solving
/// `4 gamma^2 (1/C^2 + 1/C) <= target (1-gamma)^2` for `C`.
pub fn certified_c(gamma: f64, target: f64) -> Result<f64, CertifyError> {
    if !(gamma.is_finite() && 0.0 < gamma && gamma < 1.0) {
        return Err(CertifyError::BadGamma { gamma });
    }
    if !(target.is_finite() && target > 0.0) {
        return Err(CertifyError::GridExhausted { target });
    }
    let t = target * (1.0 - gamma) * (1.0 - gamma) / (4.0 * gamma * gamma);
    Ok((1.0 + (1.0 + 4.0 * t).sqrt()) / (2.0 * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::Constants;
    use approx::assert_abs_diff_eq;

    fn hs_profile() -> EstimatorProfile {
        EstimatorProfile::hilbert_schmidt(&Constants::builtin())
    }

    #[test]
    fn quadratic_scaling_in_eps() {
        let p = hs_profile();
        let c = 100.0;
        for eps in [0.3, 0.2, 0.12] {
            let n1 = plan_samples(&p, eps * eps, 0.9801, c).unwrap().n;
            let n2 = plan_samples(&p, eps * eps / 4.0, 0.9801, c).unwrap().n;
            let ratio = n2 as f64 / n1 as f64;
            assert!((ratio - 4.0).abs() < 0.01, "ratio {ratio}");
        }
    }

    #[test]
    fn doubling_theta_roughly_halves_n_in_the_linear_regime() {
        let p = EstimatorProfile::new("lin", |_| 1.0, |mu| mu);
        let n1 = plan_samples(&p, 0.01, 0.98, 50.0).unwrap().n;
        let n2 = plan_samples(&p, 0.02, 0.98, 50.0).unwrap().n;
        let ratio = n1 as f64 / n2 as f64;
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn decide_is_scale_consistent_and_inclusive() {
        let p = hs_profile();
        for scale in [1.0, 7.5, 0.003] {
            let theta = 0.04 * scale;
            let plan = plan_samples(&p, theta, 0.99, 10.0).unwrap();
            assert_eq!(decide(0.0, &plan).verdict, Verdict::Close);
            assert_eq!(decide(theta, &plan).verdict, Verdict::Far);
            assert_eq!(decide(0.995 * theta, &plan).verdict, Verdict::Close);
            assert_eq!(decide(0.9951 * theta, &plan).verdict, Verdict::Far);
        }
    }

    #[test]
    fn guaranteed_error_nonincreasing_in_n() {
        let p = hs_profile();
        let mut last = f64::INFINITY;
        for n in [2u64, 4, 16, 256, 65536, 1 << 26] {
            let e = envelope_error(&p, 0.01, 0.9801, n);
            assert!(e <= last + 1e-15);
            last = e;
        }
    }

    #[test]
    fn certified_constant_meets_target_on_synthetic_profiles() {
        // With exact moments obeying the envelope, the error at the
        // planner's n stays within target on both arms for a grid of
        // profiles and thresholds.
        let target = 1.0 / 3.0;
        let profiles = vec![
            EstimatorProfile::new("const-lin", |_| 5.0, |mu| 3.0 * mu),
            EstimatorProfile::new("affine", |mu| 1.0 + mu, |mu| 0.5 * mu + mu.powf(1.5)),
            EstimatorProfile::new("big-b", |_| 1e6, |mu| 10.0 * mu),
        ];
        for gamma in [0.9801, 0.99] {
            let c = certified_c(gamma, target).unwrap();
            for p in &profiles {
                for theta in [1e-4, 0.01, 0.5] {
                    let plan = plan_samples(p, theta, gamma, c).unwrap();
                    // Close arm worst case mu = gamma*theta.
                    let mu_c = gamma * theta;
                    let var_c = p.b(mu_c) / (plan.n as f64).powi(2) + p.v(mu_c) / plan.n as f64;
                    let err_c = var_c / (plan.midpoint() - mu_c).powi(2);
                    assert!(err_c <= target + 1e-9, "{} close err {err_c}", p.name());
                    // Far arm worst case mu -> theta from above: with the
                    // ratio monotonicity the bound peaks at mu = theta.
                    let var_f = p.b(theta) / (plan.n as f64).powi(2) + p.v(theta) / plan.n as f64;
                    let err_f = var_f / (theta - plan.midpoint()).powi(2);
                    assert!(err_f <= target + 1e-9, "{} far err {err_f}", p.name());
                    assert!(plan.guaranteed_error <= target + 1e-9);
                }
            }
        }
    }

    #[test]
    fn certified_constant_values() {
        // Sanity anchors for the two working gammas.
        let c1 = certified_c(0.9801, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(c1, 29109.0, epsilon = 2.0);
        let c2 = certified_c(0.99, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(c2, 117613.0, epsilon = 2.0);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let p = hs_profile();
        assert!(matches!(plan_samples(&p, 0.0, 0.9, 1.0), Err(CertifyError::BadTheta { .. })));
        assert!(matches!(plan_samples(&p, 0.1, 1.0, 1.0), Err(CertifyError::BadGamma { .. })));
        assert!(matches!(plan_samples(&p, 0.1, 0.0, 1.0), Err(CertifyError::BadGamma { .. })));
    }
}
