//! The chi-squared observable for a fixed full-rank diagonal reference
//! state: a two-copy observable whose expectation exceeds the Bures
//! chi-squared divergence by exactly one, together with the bilinear and
//! trilinear contraction forms that make its variance computable in `d`
//! dimensions, the exact mean/variance of its `n`-copy average, and the
//! variance envelope used by the planner when the reference is
//! well conditioned.
//!
//! The reference is diagonal by contract; callers with a non-diagonal
//! reference rotate into its eigenbasis first (the testers do).

use crate::config::{Caps, Tolerances};
use crate::densesim::{DenseError, DenseOperator};
use crate::linalg::{self, cr, CMat};
use crate::states::{DensityMatrix, Spectrum};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ChisqError {
    #[error("reference state is singular (smallest eigenvalue {min_eigenvalue:.3e})")]
    SigmaSingular { min_eigenvalue: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("need at least {min} copies, got {n}")]
    NTooSmall { n: u64, min: u64 },
    #[error(transparent)]
    Dense(#[from] DenseError),
}

/// Diagonal full-rank reference state for the chi-squared machinery.
#[derive(Debug, Clone)]
pub struct ChiContext {
    beta: Vec<f64>,
}

impl ChiContext {
    /// Build from the eigenvalues of the (diagonal) reference state.
    pub fn new(beta: &Spectrum) -> Result<Self, ChisqError> {
        let tol = Tolerances::default();
        let min = beta.values().iter().copied().fold(f64::INFINITY, f64::min);
        if min <= tol.full_rank {
            return Err(ChisqError::SigmaSingular { min_eigenvalue: min });
        }
        Ok(ChiContext { beta: beta.values().to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.beta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    fn avg(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.beta[i] + self.beta[j])
    }

    fn check(&self, m: &CMat) -> Result<(), ChisqError> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(ChisqError::DimMismatch { left: m.nrows(), right: self.dim() });
        }
        Ok(())
    }
}

/// The two-copy chi-squared observable: entry `1/avg(beta_i, beta_j)` from
/// `|ij>` to `|ji>`.
pub fn chi_matrix(ctx: &ChiContext, caps: &Caps) -> Result<DenseOperator, ChisqError> {
    let d = ctx.dim();
    if d * d > caps.dense_dim {
        return Err(ChisqError::Dense(DenseError::TooLarge { dim: d * d, cap: caps.dense_dim }));
    }
    let mut mat = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            mat[(j * d + i, i * d + j)] = cr(1.0 / ctx.avg(i, j));
        }
    }
    Ok(DenseOperator::from_matrix(d, 2, mat))
}

/// Bilinear contraction `<<S, T>> = sum_ij 2 T_ij S_ji / (beta_i + beta_j)`.
///
/// Contracting against the reference recovers the plain trace:
/// `<<S, sigma>> = tr(S) = <<sigma, S>>`.
pub fn trtwo(s: &CMat, t: &CMat, ctx: &ChiContext) -> Result<Complex64, ChisqError> {
    ctx.check(s)?;
    ctx.check(t)?;
    let d = ctx.dim();
    let mut acc = linalg::C_ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += t[(i, j)] * s[(j, i)] / cr(ctx.avg(i, j));
        }
    }
    Ok(acc)
}

/// Trilinear contraction
/// `<<R, S, T>> = sum_ijk T_ij S_jk R_ki / (avg(b_i,b_j) avg(b_i,b_k))`;
/// putting the reference in the first or last slot contracts to the
/// bilinear form.
pub fn trthree(r: &CMat, s: &CMat, t: &CMat, ctx: &ChiContext) -> Result<Complex64, ChisqError> {
    ctx.check(r)?;
    ctx.check(s)?;
    ctx.check(t)?;
    let d = ctx.dim();
    let mut acc = linalg::C_ZERO;
    for i in 0..d {
        for j in 0..d {
            let tij = t[(i, j)];
            if tij.norm_sqr() == 0.0 {
                continue;
            }
            let aij = ctx.avg(i, j);
            for k in 0..d {
                acc += tij * s[(j, k)] * r[(k, i)] / cr(aij * ctx.avg(i, k));
            }
        }
    }
    Ok(acc)
}

/// Mean of the averaged chi-squared observable on copies of `rho`
/// (expressed in the reference eigenbasis): `<<rho, rho>> - 1`, i.e. the
/// Bures chi-squared divergence from the reference.
pub fn chi_mean(rho: &DensityMatrix, ctx: &ChiContext) -> Result<f64, ChisqError> {
    let t2 = trtwo(rho.matrix(), rho.matrix(), ctx)?;
    Ok(t2.re - 1.0)
}

/// `tr(X^2 rho^(x)2)`, computable from the diagonal of `rho` alone.
pub fn chi_square_second_moment(rho: &DensityMatrix, ctx: &ChiContext) -> Result<f64, ChisqError> {
    ctx.check(rho.matrix())?;
    let d = ctx.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let a = ctx.avg(i, j);
            acc += rho.matrix()[(i, i)].re * rho.matrix()[(j, j)].re / (a * a);
        }
    }
    Ok(acc)
}

/// Exact variance of the averaged chi-squared observable on `n` copies:
/// pair-collision term plus the three-index overlap term.
pub fn chi_var_exact(rho: &DensityMatrix, ctx: &ChiContext, n: u64) -> Result<f64, ChisqError> {
    if n < 2 {
        return Err(ChisqError::NTooSmall { n, min: 2 });
    }
    let t2 = trtwo(rho.matrix(), rho.matrix(), ctx)?.re;
    let t3 = trthree(rho.matrix(), rho.matrix(), rho.matrix(), ctx)?.re;
    let x2 = chi_square_second_moment(rho, ctx)?;
    let b2 = (n * (n - 1)) as f64 / 2.0;
    Ok((x2 - t2 * t2) / b2 + 2.0 * (n as f64 - 2.0) / b2 * (t3 - t2 * t2))
}

/// Variance envelope for a reference with smallest eigenvalue `delta`:
/// `(1/binom(n,2)) (2d^2 + (2d/delta) D)
///  + (2(n-2)/binom(n,2)) (sqrt(2d/delta) D^(3/2) + 2D)`
/// where `D` is the chi-squared divergence of `rho` from the reference.
pub fn chi_var_bound(rho: &DensityMatrix, ctx: &ChiContext, n: u64) -> Result<f64, ChisqError> {
    if n < 2 {
        return Err(ChisqError::NTooSmall { n, min: 2 });
    }
    let d = ctx.dim() as f64;
    let delta = ctx.min_eigenvalue();
    let big_d = chi_mean(rho, ctx)?.max(0.0);
    Ok(chi_var_bound_from_mean(big_d, d, delta, n))
}

/// The same envelope as a function of the divergence value alone.
pub fn chi_var_bound_from_mean(big_d: f64, d: f64, delta: f64, n: u64) -> f64 {
    let b2 = (n * (n - 1)) as f64 / 2.0;
    let ratio = 2.0 * d / delta;
    (2.0 * d * d + ratio * big_d) / b2
        + 2.0 * (n as f64 - 2.0) / b2 * (ratio.sqrt() * big_d.powf(1.5) + 2.0 * big_d)
}

/// The `n`-copy averaged chi-squared observable as a dense matrix:
/// average of the two-slot observable over all pairs, minus the identity.
pub fn averaged_chi_observable(
    ctx: &ChiContext,
    n: usize,
    caps: &Caps,
) -> Result<DenseOperator, ChisqError> {
    if n < 2 {
        return Err(ChisqError::NTooSmall { n: n as u64, min: 2 });
    }
    let d = ctx.dim();
    let dim = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if dim > caps.dense_dim {
        return Err(ChisqError::Dense(DenseError::TooLarge { dim, cap: caps.dense_dim }));
    }
    let strides: Vec<usize> = (0..n).map(|i| d.pow((n - 1 - i) as u32)).collect();
    let mut mat = CMat::zeros(dim, dim);
    let pairs = (n * (n - 1) / 2) as f64;
    let mut digits = vec![0usize; n];
    for col in 0..dim {
        let mut rest = col;
        for (i, &st) in strides.iter().enumerate() {
            digits[i] = rest / st;
            rest %= st;
        }
        for s in 0..n {
            for t in (s + 1)..n {
                let (i, j) = (digits[s], digits[t]);
                let row = col - i * strides[s] - j * strides[t] + j * strides[s] + i * strides[t];
                mat[(row, col)] += cr(1.0 / (pairs * ctx.avg(i, j)));
            }
        }
    }
    for k in 0..dim {
        mat[(k, k)] -= linalg::C_ONE;
    }
    Ok(DenseOperator::from_matrix(d, n, mat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densesim;
    use crate::states::{maximally_mixed, random_state, DeltaMatrix};
    use approx::assert_abs_diff_eq;

    fn caps() -> Caps {
        Caps::default()
    }

    fn random_full_rank_diag(d: usize, seed: u64) -> (Spectrum, DensityMatrix) {
        let raw = random_state(d, d, seed).unwrap();
        let spec = raw.spectrum();
        // keep it comfortably full rank
        let floored: Vec<f64> =
            spec.values().iter().map(|&v| 0.7 * v + 0.3 / d as f64).collect();
        let spec = Spectrum::new(floored).unwrap();
        let diag = crate::states::ClassicalDistribution::new(spec.values().to_vec())
            .unwrap()
            .to_diagonal_state();
        (spec, diag)
    }

    #[test]
    fn chi_matrix_on_uniform_reference_is_scaled_swap() {
        let ctx = ChiContext::new(&Spectrum::uniform(3)).unwrap();
        let x = chi_matrix(&ctx, &caps()).unwrap();
        let swap = densesim::perm_matrix(
            &crate::symalg::Permutation::from_cycles(2, &[vec![0, 1]]).unwrap(),
            3,
            &caps(),
        )
        .unwrap();
        let expect = swap.matrix().scale(3.0);
        assert!((x.matrix() - expect).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn chi_matrix_expectation_is_divergence_plus_one() {
        let (beta, sigma_diag) = random_full_rank_diag(3, 11);
        let ctx = ChiContext::new(&beta).unwrap();
        let rho = random_state(3, 3, 13).unwrap();
        let x = chi_matrix(&ctx, &caps()).unwrap();
        let two = densesim::state_power(&rho, 2, &caps()).unwrap();
        let dense = x.expectation(&two).unwrap();
        let divergence = crate::states::bures_chisq(&rho, &sigma_diag).unwrap();
        assert_abs_diff_eq!(dense, divergence + 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(chi_mean(&rho, &ctx).unwrap(), divergence, epsilon = 1e-10);
    }

    #[test]
    fn chi_matrix_square_is_diagonal() {
        let (beta, _) = random_full_rank_diag(3, 17);
        let ctx = ChiContext::new(&beta).unwrap();
        let x = chi_matrix(&ctx, &caps()).unwrap();
        let sq = x.mul(&x).unwrap();
        let d = 3;
        for a in 0..d * d {
            for b in 0..d * d {
                let v = sq.matrix()[(a, b)];
                if a != b {
                    assert!(v.norm() < 1e-12);
                } else {
                    let (i, j) = (a / d, a % d);
                    let expect = 1.0 / (ctx.avg(i, j) * ctx.avg(i, j));
                    assert_abs_diff_eq!(v.re, expect, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn contraction_identities() {
        let (beta, sigma_diag) = random_full_rank_diag(4, 23);
        let ctx = ChiContext::new(&beta).unwrap();
        let mut rng = crate::rng::seeded_rng(29);
        for _ in 0..20 {
            let s = linalg::ginibre(4, 4, &mut rng);
            let t = linalg::ginibre(4, 4, &mut rng);
            let sig = sigma_diag.matrix();
            let tr_s = s.trace();
            assert!((trtwo(&s, sig, &ctx).unwrap() - tr_s).norm() < 1e-12);
            assert!((trtwo(sig, &s, &ctx).unwrap() - tr_s).norm() < 1e-12);
            let st = trtwo(&s, &t, &ctx).unwrap();
            assert!((trthree(sig, &s, &t, &ctx).unwrap() - st).norm() < 1e-12);
            assert!((trthree(&s, &t, sig, &ctx).unwrap() - st).norm() < 1e-12);
        }
        let sig = sigma_diag.matrix();
        assert!((trthree(sig, sig, sig, &ctx).unwrap() - linalg::C_ONE).norm() < 1e-12);
    }

    #[test]
    fn trthree_matches_dense_tensor_contraction() {
        let (beta, _) = random_full_rank_diag(3, 31);
        let ctx = ChiContext::new(&beta).unwrap();
        let x = chi_matrix(&ctx, &caps()).unwrap();
        let d = 3usize;
        let x12 = linalg::kron(x.matrix(), &linalg::eye(d));
        let x23 = linalg::kron(&linalg::eye(d), x.matrix());
        let mut rng = crate::rng::seeded_rng(37);
        let r = linalg::ginibre(d, d, &mut rng);
        let s = linalg::ginibre(d, d, &mut rng);
        let t = linalg::ginibre(d, d, &mut rng);
        let triple = linalg::kron(&linalg::kron(&r, &s), &t);
        let dense = linalg::trace_product(&linalg::matmul(&x12, &x23), &triple);
        let fast = trthree(&r, &s, &t, &ctx).unwrap();
        assert!((dense - fast).norm() < 1e-10);
    }

    #[test]
    fn mean_against_uniform_reference() {
        let d = 4;
        let ctx = ChiContext::new(&Spectrum::uniform(d)).unwrap();
        let rho = random_state(d, 2, 41).unwrap();
        let expect = d as f64 * rho.purity() - 1.0;
        assert_abs_diff_eq!(chi_mean(&rho, &ctx).unwrap(), expect, epsilon = 1e-10);
    }

    #[test]
    fn variance_at_the_reference_state() {
        let (beta, sigma_diag) = random_full_rank_diag(3, 43);
        let ctx = ChiContext::new(&beta).unwrap();
        assert_abs_diff_eq!(chi_mean(&sigma_diag, &ctx).unwrap(), 0.0, epsilon = 1e-10);
        let n = 5;
        let b2 = (n * (n - 1)) as f64 / 2.0;
        let mut collision = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                collision += beta.values()[i] * beta.values()[j] / ctx.avg(i, j).powi(2);
            }
        }
        let expect = (collision - 1.0) / b2;
        assert_abs_diff_eq!(
            chi_var_exact(&sigma_diag, &ctx, n as u64).unwrap(),
            expect,
            epsilon = 1e-12
        );
    }

    #[test]
    fn variance_decomposition_in_terms_of_the_difference() {
        // t3(rho,rho,rho) - t2(rho,rho)^2
        //   = t3(D,D,D) + t3(D,sigma,D) - (t2(D,D))^2 with D = rho - sigma.
        let (beta, sigma_diag) = random_full_rank_diag(4, 47);
        let ctx = ChiContext::new(&beta).unwrap();
        for seed in 0..10 {
            let rho = random_state(4, 4, 500 + seed).unwrap();
            let delta = DeltaMatrix::new(&rho, &sigma_diag).unwrap();
            let dm = delta.matrix();
            let t2 = trtwo(rho.matrix(), rho.matrix(), &ctx).unwrap().re;
            let t3 = trthree(rho.matrix(), rho.matrix(), rho.matrix(), &ctx).unwrap().re;
            let ddd = trthree(dm, dm, dm, &ctx).unwrap().re;
            let dsd = trthree(dm, sigma_diag.matrix(), dm, &ctx).unwrap().re;
            let div = trtwo(dm, dm, &ctx).unwrap().re;
            assert_abs_diff_eq!(t3 - t2 * t2, ddd + dsd - div * div, epsilon = 1e-10);
            // term bounds
            let d = 4.0;
            let delta_min = ctx.min_eigenvalue();
            assert!(dsd <= 2.0 * div + 1e-12);
            assert!(ddd <= (2.0 * d / delta_min).sqrt() * div.powf(1.5) + 1e-12);
            let x2 = chi_square_second_moment(&rho, &ctx).unwrap();
            assert!(x2 <= 2.0 * d * d + (2.0 * d / delta_min) * div + 1e-12);
        }
    }

    #[test]
    fn bound_dominates_exact_variance() {
        for seed in 0..20 {
            let d = 2 + (seed as usize % 5);
            let (beta, _) = random_full_rank_diag(d, 600 + seed);
            let ctx = ChiContext::new(&beta).unwrap();
            let rho = random_state(d, d, 700 + seed).unwrap();
            for n in [2u64, 3, 10, 100] {
                let exact = chi_var_exact(&rho, &ctx, n).unwrap();
                let bound = chi_var_bound(&rho, &ctx, n).unwrap();
                assert!(bound >= exact - 1e-12, "d={d} n={n}: {bound} < {exact}");
            }
        }
    }

    #[test]
    fn bound_at_zero_divergence() {
        let d = 3;
        let ctx = ChiContext::new(&Spectrum::uniform(d)).unwrap();
        let n = 4u64;
        let b2 = (n * (n - 1)) as f64 / 2.0;
        assert_abs_diff_eq!(
            chi_var_bound(&maximally_mixed(d), &ctx, n).unwrap(),
            2.0 * (d * d) as f64 / b2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn averaged_observable_matches_scalar_formulas() {
        let (beta, _) = random_full_rank_diag(2, 53);
        let ctx = ChiContext::new(&beta).unwrap();
        let rho = random_state(2, 2, 59).unwrap();
        for n in [2usize, 3] {
            let obs = averaged_chi_observable(&ctx, n, &caps()).unwrap();
            assert!(obs.hermiticity_residual() < 1e-12);
            let state = densesim::state_power(&rho, n, &caps()).unwrap();
            let mean = obs.expectation(&state).unwrap();
            assert_abs_diff_eq!(mean, chi_mean(&rho, &ctx).unwrap(), epsilon = 1e-9);
            let var = obs.variance(&state).unwrap();
            assert_abs_diff_eq!(
                var,
                chi_var_exact(&rho, &ctx, n as u64).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn singular_reference_is_refused() {
        let beta = Spectrum::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(ChiContext::new(&beta), Err(ChisqError::SigmaSingular { .. })));
    }
}
