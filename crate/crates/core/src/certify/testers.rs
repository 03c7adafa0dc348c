//! The certification test procedures.
//!
//! Each tester plans its copy count from the matching variance envelope,
//! obtains one statistic (by collective-measurement sampling, by sampling
//! the exact dense outcome law, or by taking the exact mean in analytic
//! mode), and applies the midpoint decision rule. Analytic runs also carry
//! a Chebyshev error certificate computed from the instance's exact
//! variance. `copies_used` counts all copies consumed, both states
//! combined for two-state tests.

use super::constants::Constants;
use super::planner::{certified_error, decide, plan_samples, plan_with_n};
use super::profiles::EstimatorProfile;
use super::{
    Backend, CertifyError, TestPlan, TestVerdict, TesterConfig, GAMMA_CHI_SQUARED,
    GAMMA_DISTANCE_SQUARED, PCA_REDUCTION_C,
};
use crate::chisq::{averaged_chi_observable, chi_mean, chi_var_exact, ChiContext};
use crate::densesim::{
    class_matrix, exact_distribution, schur_projectors, state_power, trace_times_kron,
};
use crate::linalg::matmul;
use crate::rng::Prng;
use crate::schurweyl::{hs_estimate, mixedness_statistic, sw_sample};
use crate::states::{add_one_estimate, depolarize, diag_of, DensityMatrix, Spectrum};
use crate::symalg::{expect_orbit, hs_combination, var_hs_exact, var_purity, ClassElement, ClassKey};
use rand::distr::Distribution;
use rand_distr::Binomial;

/// Fidelity certifier thresholds: distinguish divergence at most `.49 eps`
/// from divergence above `.495 eps`.
pub const FIDELITY_THETA_COEFF: f64 = 0.495;
pub const FIDELITY_GAMMA: f64 = 0.49 / 0.495;

fn positive_eps(eps: f64, range: &'static str, upper: f64) -> Result<(), CertifyError> {
    if !(eps.is_finite() && eps > 0.0 && eps <= upper) {
        return Err(CertifyError::BadEps { eps, range });
    }
    Ok(())
}

fn check_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<(), CertifyError> {
    if a.dim() != b.dim() {
        return Err(CertifyError::State(crate::states::StateError::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        }));
    }
    Ok(())
}

fn planned(
    profile: &EstimatorProfile,
    theta: f64,
    gamma: f64,
    c: f64,
    cfg: &TesterConfig,
) -> Result<TestPlan, CertifyError> {
    let plan = plan_samples(profile, theta, gamma, c)?;
    Ok(match cfg.n_override {
        Some(n) => plan_with_n(profile, theta, gamma, c, n),
        None => plan,
    })
}

// ---------------------------------------------------------------------------
// Mixedness (identity to the maximally mixed state)
// ---------------------------------------------------------------------------

/// Test whether `rho` is close to `Id/d` in Hilbert-Schmidt distance
/// (close: at most `.99 eps`; far: above `eps`). The statistic is the
/// character-ratio estimate of `tr(rho^2) - 1/d`, i.e. the squared distance.
pub fn test_maximally_mixed(
    rho: &DensityMatrix,
    eps: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    positive_eps(eps, "(0, inf)", f64::INFINITY)?;
    let d = rho.dim();
    let theta = eps * eps;
    let gamma = GAMMA_DISTANCE_SQUARED;
    let profile = EstimatorProfile::mixedness(k);
    let c = k.profile_c("mixedness")?;
    let plan = planned(&profile, theta, gamma, c, cfg)?;
    match backend {
        Backend::Rsk => {
            let batches = cfg.batches.max(1);
            let per_batch = (plan.n / batches).max(2) as usize;
            let alpha = rho.spectrum();
            let mut acc = 0.0;
            for _ in 0..batches {
                let shape = sw_sample(&alpha, per_batch, rng);
                acc += mixedness_statistic(&shape, per_batch, d)?;
            }
            let mut verdict = decide(acc / batches as f64, &plan);
            verdict.copies_used = per_batch as u64 * batches;
            Ok(verdict)
        }
        Backend::Analytic => {
            let alpha = rho.spectrum();
            let mu = alpha.power_sum(2) - 1.0 / d as f64;
            let var = var_purity(&alpha, plan.n)?;
            let mut verdict = decide(mu, &plan);
            verdict.certified_error = Some(certified_error(mu, var, &plan));
            Ok(verdict)
        }
        Backend::Dense => {
            let n = plan.n as usize;
            let o2 = class_matrix(
                &ClassElement::basis(ClassKey::transposition(), n)?,
                d,
                &cfg.caps,
            )?;
            let state = state_power(rho, n, &cfg.caps)?;
            let law = exact_distribution(&o2, &state, &cfg.tolerances)?;
            let stat = law.sample(rng) - 1.0 / d as f64;
            Ok(decide(stat, &plan))
        }
    }
}

/// Exact dense outcome law of the averaged-transposition statistic on
/// `rho^(x)n` (small `n`), for repeated sampling; subtract `1/d` from each
/// draw to get the mixedness statistic.
pub fn mixedness_dense_law(
    rho: &DensityMatrix,
    n: usize,
    cfg: &TesterConfig,
) -> Result<crate::densesim::OutcomeDistribution, CertifyError> {
    let o2 = class_matrix(&ClassElement::basis(ClassKey::transposition(), n)?, rho.dim(), &cfg.caps)?;
    let state = state_power(rho, n, &cfg.caps)?;
    Ok(exact_distribution(&o2, &state, &cfg.tolerances)?)
}

// ---------------------------------------------------------------------------
// Two unknown states: squared Hilbert-Schmidt distance
// ---------------------------------------------------------------------------

/// Precomputed joint law of the three collective-measurement outcomes
/// (shape on each half, then on all `2n` copies) together with the
/// estimator value of each outcome. The three projector families commute,
/// so the joint law is order-independent and equals
/// `tr(P_nu (P_lambda (x) P_mu) state)`.
#[derive(Debug, Clone)]
pub struct HsDenseSampler {
    outcomes: Vec<(f64, f64)>,
    pub n: usize,
}

impl HsDenseSampler {
    pub fn new(
        rho: &DensityMatrix,
        sigma: &DensityMatrix,
        n: usize,
        cfg: &TesterConfig,
    ) -> Result<Self, CertifyError> {
        check_same_dim(rho, sigma)?;
        let d = rho.dim();
        let halves = schur_projectors(d, n, &cfg.caps)?;
        let whole = schur_projectors(d, 2 * n, &cfg.caps)?;
        let rho_n = state_power(rho, n, &cfg.caps)?;
        let sigma_n = state_power(sigma, n, &cfg.caps)?;
        let mut outcomes = Vec::new();
        let mut total = 0.0;
        for (lambda, p_l) in halves.nonzero() {
            let x = matmul(p_l.matrix(), &rho_n);
            for (mu, p_m) in halves.nonzero() {
                let y = matmul(p_m.matrix(), &sigma_n);
                for (nu, p_n) in whole.nonzero() {
                    let p = trace_times_kron(p_n.matrix(), &x, &y).re;
                    if p <= 1e-15 {
                        continue;
                    }
                    total += p;
                    outcomes.push((hs_estimate(lambda, mu, nu, n)?, p));
                }
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(CertifyError::Dense(crate::densesim::DenseError::BadLaw {
                detail: format!("joint collective law sums to {total}"),
            }));
        }
        Ok(HsDenseSampler { outcomes, n })
    }

    pub fn sample(&self, rng: &mut Prng) -> f64 {
        let mut u: f64 = rand::Rng::random::<f64>(rng);
        for &(v, p) in &self.outcomes {
            if u < p {
                return v;
            }
            u -= p;
        }
        self.outcomes.last().expect("nonempty law").0
    }

    /// Exact mean of the estimator under the joint law.
    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|&(v, p)| v * p).sum()
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }
}

/// Test whether two unknown states are close in Hilbert-Schmidt distance
/// (close: at most `.99 eps`; far: above `eps`), from `n` copies of each.
pub fn test_hs_two_state(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    positive_eps(eps, "(0, inf)", f64::INFINITY)?;
    check_same_dim(rho, sigma)?;
    let theta = eps * eps;
    let gamma = GAMMA_DISTANCE_SQUARED;
    let profile = EstimatorProfile::hilbert_schmidt(k);
    let c = k.profile_c("hs")?;
    let plan = planned(&profile, theta, gamma, c, cfg)?;
    match backend {
        Backend::Analytic => {
            let mu = expect_orbit(&hs_combination(2, 2)?, rho, sigma)?;
            let var = var_hs_exact(rho, sigma, plan.n)?;
            let mut verdict = decide(mu, &plan);
            verdict.certified_error = Some(certified_error(mu, var, &plan));
            verdict.copies_used = 2 * plan.n;
            Ok(verdict)
        }
        Backend::Dense => {
            let sampler = HsDenseSampler::new(rho, sigma, plan.n as usize, cfg)?;
            let mut verdict = decide(sampler.sample(rng), &plan);
            verdict.copies_used = 2 * plan.n;
            Ok(verdict)
        }
        Backend::Rsk => {
            Err(CertifyError::UnsupportedBackend { test: "hs", backend })
        }
    }
}

/// Trace-distance certification by reduction to the Hilbert-Schmidt tester
/// at scale `2 eps / sqrt(d)` (close under equality, far above `eps` in
/// trace distance).
pub fn test_trace_distance(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    positive_eps(eps, "(0, 1]", 1.0)?;
    check_same_dim(rho, sigma)?;
    let eps_hs = 2.0 * eps / (rho.dim() as f64).sqrt();
    test_hs_two_state(rho, sigma, eps_hs, k, backend, cfg, rng)
}

/// Trace-distance certification when one state has most of its mass on `k`
/// eigenvalues: reduce to the Hilbert-Schmidt tester at scale
/// `(2 - sqrt(2)) eps / sqrt(k)`.
pub fn test_low_rank(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    rank: usize,
    eps: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    positive_eps(eps, "(0, 1]", 1.0)?;
    if rank < 1 {
        return Err(CertifyError::BadRank { k: rank });
    }
    let eps_hs = PCA_REDUCTION_C * eps / (rank as f64).sqrt();
    test_hs_two_state(rho, sigma, eps_hs, k, backend, cfg, rng)
}

// ---------------------------------------------------------------------------
// Chi-squared divergence against a known reference
// ---------------------------------------------------------------------------

/// A chi-squared test instance after rotating into the reference
/// eigenbasis and planning: enough to run either backend repeatedly.
#[derive(Debug, Clone)]
pub struct ChisqPrepared {
    pub rotated: DensityMatrix,
    pub ctx: ChiContext,
    pub plan: TestPlan,
}

/// Rotate into the reference eigenbasis, check conditioning, and plan from
/// the chi-squared envelope.
pub fn prepare_chisq(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    theta: f64,
    gamma: f64,
    k: &Constants,
    cfg: &TesterConfig,
) -> Result<ChisqPrepared, CertifyError> {
    check_same_dim(rho, sigma)?;
    let d = rho.dim();
    let (beta_vals, u) = sigma.eigen();
    let spectrum = Spectrum::new(beta_vals)?;
    let delta = *spectrum.values().last().expect("nonempty");
    let required = k.chisq_min_eig_c * theta / d as f64;
    if delta < required {
        return Err(CertifyError::SigmaIllConditioned { min_eigenvalue: delta, required });
    }
    let rotated = rho.conjugated(&u)?;
    let ctx = ChiContext::new(&spectrum)?;
    let profile = EstimatorProfile::chisq(d, delta);
    let c = k.profile_c("chisq")?;
    let plan = planned(&profile, theta, gamma, c, cfg)?;
    Ok(ChisqPrepared { rotated, ctx, plan })
}

impl ChisqPrepared {
    /// Analytic verdict: exact mean, exact variance, Chebyshev certificate.
    pub fn run_analytic(&self) -> Result<TestVerdict, CertifyError> {
        let mu = chi_mean(&self.rotated, &self.ctx)?;
        let var = chi_var_exact(&self.rotated, &self.ctx, self.plan.n)?;
        let mut verdict = decide(mu, &self.plan);
        verdict.certified_error = Some(certified_error(mu, var, &self.plan));
        Ok(verdict)
    }

    /// Exact dense outcome law of the averaged observable at the planned
    /// copy count (small `n` only).
    pub fn dense_law(
        &self,
        cfg: &TesterConfig,
    ) -> Result<crate::densesim::OutcomeDistribution, CertifyError> {
        let n = self.plan.n as usize;
        let obs = averaged_chi_observable(&self.ctx, n, &cfg.caps)?;
        let state = state_power(&self.rotated, n, &cfg.caps)?;
        Ok(exact_distribution(&obs, &state, &cfg.tolerances)?)
    }
}

/// Shared chi-squared engine: prepare, then run the chosen backend once.
fn chisq_core(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    theta: f64,
    gamma: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    let prepared = prepare_chisq(rho, sigma, theta, gamma, k, cfg)?;
    match backend {
        Backend::Analytic => prepared.run_analytic(),
        Backend::Dense => {
            let law = prepared.dense_law(cfg)?;
            Ok(decide(law.sample(rng), &prepared.plan))
        }
        Backend::Rsk => Err(CertifyError::UnsupportedBackend { test: "chisq", backend }),
    }
}

/// Test the Bures chi-squared divergence of `rho` against a known,
/// well-conditioned reference (close: at most `.99 eps^2`; far: above
/// `eps^2`). The reference needs smallest eigenvalue at least
/// `c_min eps^2 / d`.
pub fn test_chisq_known_sigma(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    positive_eps(eps, "(0, inf)", f64::INFINITY)?;
    chisq_core(rho, sigma, eps * eps, GAMMA_CHI_SQUARED, k, backend, cfg, rng)
}

/// Fidelity certifier against a known reference with no conditioning
/// assumption: depolarize both states by `c_dep * eps`, then run the
/// chi-squared tester at thresholds `.49 eps` vs `.495 eps`. Reporting
/// Close guarantees divergence at most `.49 eps` is plausible (in
/// particular fidelity at least `1 - eps`); reporting Far guarantees the
/// divergence exceeded `.49 eps`.
pub fn test_fidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    eps: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    positive_eps(eps, "(0, 1]", 1.0)?;
    check_same_dim(rho, sigma)?;
    let eta = k.depolarize_c * eps;
    let rho_mixed = depolarize(rho, eta)?;
    let sigma_mixed = depolarize(sigma, eta)?;
    chisq_core(
        &rho_mixed,
        &sigma_mixed,
        FIDELITY_THETA_COEFF * eps,
        FIDELITY_GAMMA,
        k,
        backend,
        cfg,
        rng,
    )
}

// ---------------------------------------------------------------------------
// Diagonality
// ---------------------------------------------------------------------------

/// Draw multinomial counts by sequential conditional binomials.
pub fn multinomial_counts(n: u64, probs: &[f64], rng: &mut Prng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_n = n;
    let mut remaining_p = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining_n;
            break;
        }
        let cond = (p / remaining_p).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining_n, cond).expect("valid binomial").sample(rng);
        counts[i] = draw;
        remaining_n -= draw;
        remaining_p = (remaining_p - p).max(f64::MIN_POSITIVE);
    }
    counts
}

/// Test whether `rho` is diagonal in the standard basis: estimate the
/// diagonal from standard-basis measurements with the add-one estimator,
/// then run the fidelity certifier against that diagonal estimate. The
/// copy budget is split evenly between the two stages.
pub fn test_diagonal(
    rho: &DensityMatrix,
    eps: f64,
    k: &Constants,
    backend: Backend,
    cfg: &TesterConfig,
    rng: &mut Prng,
) -> Result<TestVerdict, CertifyError> {
    positive_eps(eps, "(0, 1]", 1.0)?;
    let d = rho.dim();
    // Size the first stage like the worst-case second stage (even split).
    let n1 = match cfg.n_override {
        Some(n) => n,
        None => {
            let delta_wc = k.depolarize_c * eps / d as f64;
            let profile = EstimatorProfile::chisq(d, delta_wc);
            plan_samples(&profile, FIDELITY_THETA_COEFF * eps, FIDELITY_GAMMA, k.profile_c("chisq")?)?
                .n
        }
    };
    let diag = diag_of(rho);
    let counts = multinomial_counts(n1, diag.probs(), rng);
    let estimate = add_one_estimate(&counts, n1)?;
    let sigma_hat = estimate.to_diagonal_state();
    let inner = test_fidelity(rho, &sigma_hat, eps, k, backend, cfg, rng)?;
    Ok(TestVerdict { copies_used: n1 + inner.copies_used, ..inner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::Verdict;
    use crate::rng::trial_rng;
    use crate::states::{maximally_mixed, paninski, plus_state, ClassicalDistribution};
    use approx::assert_abs_diff_eq;

    fn k() -> Constants {
        Constants::builtin()
    }
    fn cfg() -> TesterConfig {
        TesterConfig::default()
    }

    #[test]
    fn mixedness_analytic_verdicts() {
        let mut rng = trial_rng(1, 0);
        let mm = maximally_mixed(8);
        let v = test_maximally_mixed(&mm, 0.12, &k(), Backend::Analytic, &cfg(), &mut rng).unwrap();
        assert_eq!(v.verdict, Verdict::Close);
        assert!(v.certified_error.unwrap() <= 1.0 / 3.0);
        assert_abs_diff_eq!(v.statistic, 0.0, epsilon = 1e-12);

        let hard = paninski(8, 0.2).unwrap();
        let v = test_maximally_mixed(&hard, 0.12, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Far);
        assert!(v.certified_error.unwrap() <= 1.0 / 3.0);
        assert_abs_diff_eq!(v.statistic, 0.02, epsilon = 1e-12);
    }

    #[test]
    fn mixedness_rsk_runs_and_far_for_pure_state() {
        let pure = crate::states::pure_state(&[
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let mut rng = trial_rng(2, 0);
        let v =
            test_maximally_mixed(&pure, 0.5, &k(), Backend::Rsk, &cfg(), &mut rng).unwrap();
        assert_eq!(v.verdict, Verdict::Far);
        assert_eq!(v.copies_used, v.plan.n);
    }

    #[test]
    fn mixedness_dense_backend_small_n() {
        let mut rng = trial_rng(3, 0);
        let custom = TesterConfig { n_override: Some(4), ..cfg() };
        let rho = crate::states::random_state(2, 2, 7).unwrap();
        let v = test_maximally_mixed(&rho, 0.3, &k(), Backend::Dense, &custom, &mut rng).unwrap();
        assert_eq!(v.plan.n, 4);
        assert!(v.statistic.is_finite());
    }

    #[test]
    fn hs_analytic_close_and_far() {
        let mut rng = trial_rng(4, 0);
        let rho = crate::states::random_state(2, 2, 11).unwrap();
        let v = test_hs_two_state(&rho, &rho, 0.25, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Close);
        assert_abs_diff_eq!(v.statistic, 0.0, epsilon = 1e-10);
        assert!(v.certified_error.unwrap() <= 1.0 / 3.0);
        assert_eq!(v.copies_used, 2 * v.plan.n);

        // paninski(4, .3) sits at Hilbert-Schmidt distance .3 from Id/4.
        let far = paninski(4, 0.3).unwrap();
        let mm = maximally_mixed(4);
        let v = test_hs_two_state(&far, &mm, 0.25, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Far);
        assert!(v.certified_error.unwrap() <= 1.0 / 3.0);
        assert_abs_diff_eq!(v.statistic, 0.09, epsilon = 1e-12);
    }

    #[test]
    fn hs_dense_sampler_is_unbiased_in_mean() {
        let rho = crate::states::random_state(2, 2, 13).unwrap();
        let sigma = crate::states::random_state(2, 1, 17).unwrap();
        let sampler = HsDenseSampler::new(&rho, &sigma, 2, &cfg()).unwrap();
        let dhs = crate::states::hs_distance_sq(&rho, &sigma).unwrap();
        assert_abs_diff_eq!(sampler.mean(), dhs, epsilon = 1e-9);
    }

    #[test]
    fn trace_distance_reduction() {
        let mut rng = trial_rng(5, 0);
        let rho = paninski(4, 0.3).unwrap();
        let mm = maximally_mixed(4);
        let v = test_trace_distance(&rho, &mm, 0.2, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Far);
        let v2 = test_trace_distance(&mm, &mm, 0.2, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v2.verdict, Verdict::Close);
        // theta reflects the reduced Hilbert-Schmidt scale.
        assert_abs_diff_eq!(v.plan.theta, (2.0 * 0.2 / 2.0) * (2.0 * 0.2 / 2.0), epsilon = 1e-15);
    }

    #[test]
    fn low_rank_delegates() {
        let mut rng = trial_rng(6, 0);
        let rho = crate::states::random_state(4, 2, 19).unwrap();
        let v = test_low_rank(&rho, &rho, 2, 0.3, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Close);
        assert!(matches!(
            test_low_rank(&rho, &rho, 0, 0.3, &k(), Backend::Analytic, &cfg(), &mut rng),
            Err(CertifyError::BadRank { .. })
        ));
    }

    #[test]
    fn chisq_analytic_verdicts() {
        let mut rng = trial_rng(7, 0);
        let mm = maximally_mixed(4);
        let v = test_chisq_known_sigma(&mm, &mm, 0.3, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Close);
        // Diagonal pair with classical chi-squared divergence 0.1 > eps^2 = 0.08.
        let a = (0.1f64 / 16.0).sqrt();
        let p = ClassicalDistribution::new(vec![0.25 + a, 0.25 - a, 0.25 + a, 0.25 - a])
            .unwrap()
            .to_diagonal_state();
        let eps = 0.08f64.sqrt();
        let v = test_chisq_known_sigma(&p, &mm, eps, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Far);
        assert_abs_diff_eq!(v.statistic, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn chisq_refuses_ill_conditioned_reference() {
        let mut rng = trial_rng(8, 0);
        let near_pure = crate::states::depolarize(
            &crate::states::pure_state(&[
                num_complex::Complex64::new(1.0, 0.0),
                num_complex::Complex64::new(0.0, 0.0),
            ])
            .unwrap(),
            1e-9,
        )
        .unwrap();
        let rho = maximally_mixed(2);
        assert!(matches!(
            test_chisq_known_sigma(&rho, &near_pure, 0.3, &k(), Backend::Analytic, &cfg(), &mut rng),
            Err(CertifyError::SigmaIllConditioned { .. })
        ));
    }

    #[test]
    fn fidelity_certifier_close_at_equality() {
        let mut rng = trial_rng(9, 0);
        let rho = crate::states::random_state(3, 3, 23).unwrap();
        let v = test_fidelity(&rho, &rho, 0.3, &k(), Backend::Analytic, &cfg(), &mut rng).unwrap();
        assert_eq!(v.verdict, Verdict::Close);
        assert!(v.certified_error.unwrap() <= 1.0 / 3.0);
        // Works even for a pure (singular) reference thanks to depolarizing.
        let pure = plus_state(2);
        let v = test_fidelity(&pure, &pure, 0.5, &k(), Backend::Analytic, &cfg(), &mut rng)
            .unwrap();
        assert_eq!(v.verdict, Verdict::Close);
    }

    #[test]
    fn diagonal_test_verdicts() {
        let mut rng = trial_rng(10, 0);
        let mm = maximally_mixed(2);
        let v = test_diagonal(&mm, 0.3, &k(), Backend::Analytic, &cfg(), &mut rng).unwrap();
        assert_eq!(v.verdict, Verdict::Close);
        assert!(v.copies_used > v.plan.n);

        let plus = plus_state(2);
        let v = test_diagonal(&plus, 0.3, &k(), Backend::Analytic, &cfg(), &mut rng).unwrap();
        assert_eq!(v.verdict, Verdict::Far);
    }

    #[test]
    fn multinomial_counts_sum() {
        let mut rng = trial_rng(11, 0);
        let p = [0.5, 0.25, 0.25];
        for n in [0u64, 1, 10, 100_000] {
            let counts = multinomial_counts(n, &p, &mut rng);
            assert_eq!(counts.iter().sum::<u64>(), n);
        }
    }

    #[test]
    fn unsupported_backends_error() {
        let mut rng = trial_rng(12, 0);
        let mm = maximally_mixed(2);
        assert!(matches!(
            test_hs_two_state(&mm, &mm, 0.3, &k(), Backend::Rsk, &cfg(), &mut rng),
            Err(CertifyError::UnsupportedBackend { .. })
        ));
        assert!(matches!(
            test_chisq_known_sigma(&mm, &mm, 0.3, &k(), Backend::Rsk, &cfg(), &mut rng),
            Err(CertifyError::UnsupportedBackend { .. })
        ));
    }
}
