//! Scalable classical simulation of the collective measurements.
//!
//! Measuring the isotypic projectors on `rho^(x)n` induces a law on
//! partitions that depends only on the spectrum; the same law is produced
//! classically by row-inserting an i.i.d. word drawn from the spectrum and
//! keeping the insertion-tableau shape. This module implements that
//! sampler, the exact shape law (hook counts times Schur polynomials), the
//! character-ratio statistic read off a sampled shape, and the
//! tableau-basis estimators for overlap-type statistics.

use crate::config::Caps;
use crate::densesim::CharacterTable;
use crate::partition::{partitions_bounded, Partition};
use crate::rng::Prng;
use crate::states::Spectrum;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SchurWeylError {
    #[error("size {size} exceeds the cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("need at least {min} copies, got {n}")]
    NTooSmall { n: u64, min: u64 },
    #[error("partition of {got} where a partition of {expected} was required")]
    SizeMismatch { got: usize, expected: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("letter {letter} outside alphabet of size {d}")]
    LetterOutOfRange { letter: usize, d: usize },
    #[error("law failed validation: {detail}")]
    BadLaw { detail: String },
}

// ---------------------------------------------------------------------------
// Row insertion
// ---------------------------------------------------------------------------

/// Insertion tableau over the alphabet `0..d`, stored as per-row letter
/// counts. Rows stay weakly increasing by construction, and the shape has
/// at most `d` rows, so single-letter insertion costs `O(d^2)` regardless
/// of how many letters have been inserted.
#[derive(Debug, Clone)]
pub struct InsertionTableau {
    d: usize,
    rows: Vec<Vec<u32>>,
    row_lens: Vec<u32>,
}

impl InsertionTableau {
    pub fn new(d: usize) -> Self {
        InsertionTableau { d, rows: Vec::new(), row_lens: Vec::new() }
    }

    /// Row-insert one letter: the smallest strictly larger letter present
    /// in the row is bumped to the next row; otherwise the letter appends.
    pub fn insert(&mut self, letter: usize) -> Result<(), SchurWeylError> {
        if letter >= self.d {
            return Err(SchurWeylError::LetterOutOfRange { letter, d: self.d });
        }
        let mut cur = letter;
        let mut row = 0;
        loop {
            if row == self.rows.len() {
                self.rows.push(vec![0; self.d]);
                self.row_lens.push(0);
            }
            let counts = &mut self.rows[row];
            let bump = (cur + 1..self.d).find(|&y| counts[y] > 0);
            match bump {
                None => {
                    counts[cur] += 1;
                    self.row_lens[row] += 1;
                    return Ok(());
                }
                Some(y) => {
                    counts[y] -= 1;
                    counts[cur] += 1;
                    cur = y;
                    row += 1;
                }
            }
        }
    }

    pub fn shape(&self) -> Partition {
        Partition::new(self.row_lens.iter().copied().filter(|&l| l > 0).collect())
            .expect("row lengths are nonincreasing")
    }
}

/// Shape of the insertion tableau of a word (letters in `0..d`).
///
/// The first row length equals the longest nondecreasing subsequence.
pub fn rsk_shape(word: &[usize], d: usize) -> Result<Partition, SchurWeylError> {
    let mut tab = InsertionTableau::new(d);
    for &x in word {
        tab.insert(x)?;
    }
    Ok(tab.shape())
}

/// Longest nondecreasing subsequence length by quadratic dynamic
/// programming; the independent reference for the first-row law.
pub fn longest_nondecreasing_subsequence(word: &[usize]) -> usize {
    let n = word.len();
    let mut best = vec![0usize; n];
    let mut overall = 0;
    for i in 0..n {
        best[i] = 1;
        for j in 0..i {
            if word[j] <= word[i] {
                best[i] = best[i].max(best[j] + 1);
            }
        }
        overall = overall.max(best[i]);
    }
    overall
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// One collective-measurement outcome on `n` copies of a state with the
/// given spectrum: insert an i.i.d. spectrum-distributed word, return the
/// shape.
pub fn sw_sample(alpha: &Spectrum, n: usize, rng: &mut Prng) -> Partition {
    let weights = WeightedIndex::new(alpha.values().iter().copied()).expect("valid spectrum");
    let mut tab = InsertionTableau::new(alpha.dim());
    for _ in 0..n {
        let letter = weights.sample(rng);
        tab.insert(letter).expect("letter within alphabet");
    }
    tab.shape()
}

/// A shape-and-type outcome of the tableau-basis measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GTSample {
    pub shape: Partition,
    pub type_counts: Vec<u32>,
}

/// Shape-and-type sample for a state that is diagonal in the reference
/// basis: the insertion tableau of the sampled word is semistandard with
/// the word's letter type, so the pair `(shape, type)` has exactly the
/// measured joint law.
pub fn gt_sample(alpha: &Spectrum, n: usize, rng: &mut Prng) -> GTSample {
    let weights = WeightedIndex::new(alpha.values().iter().copied()).expect("valid spectrum");
    let d = alpha.dim();
    let mut tab = InsertionTableau::new(d);
    let mut type_counts = vec![0u32; d];
    for _ in 0..n {
        let letter = weights.sample(rng);
        type_counts[letter] += 1;
        tab.insert(letter).expect("letter within alphabet");
    }
    GTSample { shape: tab.shape(), type_counts }
}

// ---------------------------------------------------------------------------
// Exact laws: Schur polynomials and Kostka numbers by branching
// ---------------------------------------------------------------------------

/// Ring operations needed by the branching recursions; implemented by f64
/// and exact rationals alike.
pub trait BranchScalar: Clone + Zero + One {}
impl<T: Clone + Zero + One> BranchScalar for T {}

fn pow_scalar<T: BranchScalar>(x: &T, e: u32) -> T {
    let mut acc = T::one();
    for _ in 0..e {
        acc = acc * x.clone();
    }
    acc
}

/// Enumerate the shapes `mu` such that `lambda / mu` is a horizontal strip.
fn horizontal_strip_predecessors(lambda: &[u32]) -> Vec<Vec<u32>> {
    if lambda.is_empty() {
        return vec![vec![]];
    }
    let k = lambda.len();
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(i: usize, lambda: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == lambda.len() {
            let trimmed: Vec<u32> = cur.iter().copied().filter(|&p| p > 0).collect();
            out.push(trimmed);
            return;
        }
        let hi = lambda[i];
        let lo = if i + 1 < lambda.len() { lambda[i + 1] } else { 0 };
        for v in lo..=hi {
            cur[i] = v;
            rec(i + 1, lambda, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, lambda, &mut cur, &mut out);
    out
}

type Memo<T> = HashMap<(usize, Vec<u32>), T>;

fn schur_rec<T: BranchScalar>(lambda: &[u32], xs: &[T], memo: &mut Memo<T>) -> T {
    let k = xs.len();
    if lambda.len() > k {
        return T::zero();
    }
    if k == 0 {
        return T::one();
    }
    let key = (k, lambda.to_vec());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let total_size: u32 = lambda.iter().sum();
    let mut acc = T::zero();
    for mu in horizontal_strip_predecessors(lambda) {
        let mu_size: u32 = mu.iter().sum();
        let strip = total_size - mu_size;
        let sub = schur_rec(&mu, &xs[..k - 1], memo);
        acc = acc + sub * pow_scalar(&xs[k - 1], strip);
    }
    memo.insert(key, acc.clone());
    acc
}

/// Schur polynomial `s_lambda(xs)` by branching over horizontal strips with
/// memoization (structurally, a semistandard-tableau enumeration grouped by
/// the shapes left after removing each letter).
pub fn schur_polynomial<T: BranchScalar>(lambda: &Partition, xs: &[T]) -> T {
    let mut memo: Memo<T> = HashMap::new();
    schur_rec(lambda.parts(), xs, &mut memo)
}

/// Kostka number: semistandard tableaux of shape `lambda` and type `tau`.
pub fn kostka(lambda: &Partition, tau: &[u32]) -> u128 {
    let lam_n: u32 = lambda.parts().iter().sum();
    let tau_n: u32 = tau.iter().sum();
    if lam_n != tau_n {
        return 0;
    }
    fn rec(lambda: &[u32], tau: &[u32], memo: &mut HashMap<(usize, Vec<u32>), u128>) -> u128 {
        let k = tau.len();
        if lambda.len() > k {
            return 0;
        }
        if k == 0 {
            return if lambda.is_empty() { 1 } else { 0 };
        }
        let key = (k, lambda.to_vec());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let total: u32 = lambda.iter().sum();
        let want = tau[k - 1];
        let mut acc = 0u128;
        for mu in horizontal_strip_predecessors(lambda) {
            let mu_size: u32 = mu.iter().sum();
            if total - mu_size != want {
                continue;
            }
            acc += rec(&mu, &tau[..k - 1], memo);
        }
        memo.insert(key, acc);
        acc
    }
    let mut memo = HashMap::new();
    rec(lambda.parts(), tau, &mut memo)
}

/// Exact law of the measured shape on `n` copies: probability
/// `(# standard tableaux of shape lambda) * s_lambda(spectrum)` for every
/// shape with at most `d` rows.
pub fn sw_pmf(
    alpha: &Spectrum,
    n: usize,
    caps: &Caps,
) -> Result<BTreeMap<Partition, f64>, SchurWeylError> {
    let d = alpha.dim();
    if n > caps.sw_pmf_n {
        return Err(SchurWeylError::TooLarge { size: n, cap: caps.sw_pmf_n });
    }
    if d > caps.sw_pmf_d {
        return Err(SchurWeylError::TooLarge { size: d, cap: caps.sw_pmf_d });
    }
    let mut memo: Memo<f64> = HashMap::new();
    let mut out = BTreeMap::new();
    let mut total = 0.0;
    for lambda in partitions_bounded(n, n, d) {
        let f = lambda.syt_count() as f64;
        let s = schur_rec(lambda.parts(), alpha.values(), &mut memo);
        let p = f * s;
        total += p;
        out.insert(lambda, p);
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(SchurWeylError::BadLaw { detail: format!("shape law sums to {total}") });
    }
    Ok(out)
}

/// Exact-rational shape law for rational spectra (small `n`).
pub fn sw_pmf_exact(
    alpha: &[BigRational],
    n: usize,
) -> Result<BTreeMap<Partition, BigRational>, SchurWeylError> {
    let d = alpha.len();
    let mut memo: Memo<BigRational> = HashMap::new();
    let mut out = BTreeMap::new();
    for lambda in partitions_bounded(n, n, d) {
        let f = BigRational::from_integer(lambda.syt_count().into());
        let s = schur_rec(lambda.parts(), alpha, &mut memo);
        out.insert(lambda, f * s);
    }
    let total: BigRational = out.values().cloned().sum();
    if total != BigRational::one() {
        return Err(SchurWeylError::BadLaw { detail: format!("exact shape law sums to {total}") });
    }
    Ok(out)
}

/// Exact joint shape-and-type law for a diagonal state: probability
/// `(# standard tableaux) * K_{lambda,tau} * prod_i alpha_i^{tau_i}`.
pub fn gt_joint_pmf(
    alpha: &Spectrum,
    n: usize,
    caps: &Caps,
) -> Result<Vec<(Partition, Vec<u32>, f64)>, SchurWeylError> {
    let d = alpha.dim();
    if n > caps.sw_pmf_n {
        return Err(SchurWeylError::TooLarge { size: n, cap: caps.sw_pmf_n });
    }
    let mut out = Vec::new();
    let mut total = 0.0;
    for lambda in partitions_bounded(n, n, d) {
        let f = lambda.syt_count() as f64;
        for tau in crate::densesim::all_types(d, n) {
            let k = kostka(&lambda, &tau);
            if k == 0 {
                continue;
            }
            let mut w = f * k as f64;
            for (i, &t) in tau.iter().enumerate() {
                w *= alpha.values()[i].powi(t as i32);
            }
            total += w;
            out.push((lambda.clone(), tau, w));
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(SchurWeylError::BadLaw { detail: format!("joint law sums to {total}") });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Shape statistics
// ---------------------------------------------------------------------------

fn check_shape(lambda: &Partition, n: usize) -> Result<(), SchurWeylError> {
    if lambda.n() != n {
        return Err(SchurWeylError::SizeMismatch { got: lambda.n(), expected: n });
    }
    if n < 2 {
        return Err(SchurWeylError::NTooSmall { n: n as u64, min: 2 });
    }
    Ok(())
}

/// Character-ratio statistic of a measured shape:
/// `(1/(n(n-1))) sum_i ((lambda_i - i + 1/2)^2 - (-i + 1/2)^2)`.
///
/// Equals the transposition-class character over the dimension, i.e. the
/// eigenvalue of the purity estimator on the `lambda` block; needs `n >= 2`.
pub fn r_lambda(lambda: &Partition, n: usize) -> Result<f64, SchurWeylError> {
    let r = r_lambda_exact(lambda, n)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Exact rational value of [`r_lambda`].
pub fn r_lambda_exact(lambda: &Partition, n: usize) -> Result<Ratio<i64>, SchurWeylError> {
    check_shape(lambda, n)?;
    let mut sum: i64 = 0;
    for (idx, &part) in lambda.parts().iter().enumerate() {
        let i = (idx + 1) as i64;
        let shifted = 2 * part as i64 - 2 * i + 1;
        let base = 1 - 2 * i;
        sum += shifted * shifted - base * base;
    }
    Ok(Ratio::new(sum, 4 * (n as i64) * (n as i64 - 1)))
}

/// Purity estimate read off a measured shape.
pub fn purity_estimate(lambda: &Partition, n: usize) -> Result<f64, SchurWeylError> {
    r_lambda(lambda, n)
}

/// Statistic for testing closeness to the maximally mixed state:
/// `r_lambda - 1/d`, an unbiased estimate of the squared Hilbert-Schmidt
/// distance from `Id/d`.
pub fn mixedness_statistic(lambda: &Partition, n: usize, d: usize) -> Result<f64, SchurWeylError> {
    Ok(r_lambda(lambda, n)? - 1.0 / d as f64)
}

/// Squared-Hilbert-Schmidt estimate from a shape-and-type sample against a
/// known diagonal reference with spectrum `beta`:
/// `r_lambda + tr(sigma^2) - 2 <beta, tau>/n`.
pub fn alt_hs_estimate(
    sample: &GTSample,
    beta: &Spectrum,
    n: usize,
) -> Result<f64, SchurWeylError> {
    if sample.type_counts.len() != beta.dim() {
        return Err(SchurWeylError::DimMismatch {
            left: sample.type_counts.len(),
            right: beta.dim(),
        });
    }
    let r = r_lambda(&sample.shape, n)?;
    let sigma_purity = beta.power_sum(2);
    let ip: f64 = sample
        .type_counts
        .iter()
        .zip(beta.values())
        .map(|(&t, &b)| t as f64 * b)
        .sum::<f64>()
        / n as f64;
    Ok(r + sigma_purity - 2.0 * ip)
}

/// Squared-Hilbert-Schmidt estimate from the three collective-measurement
/// shapes (`lambda, mu` on the two halves, `nu` on all `2n` copies):
/// `((2n-1)/n) (r_lambda + r_mu) - ((4n-2)/n) r_nu`.
pub fn hs_estimate(
    lambda: &Partition,
    mu: &Partition,
    nu: &Partition,
    n: usize,
) -> Result<f64, SchurWeylError> {
    if n < 2 {
        return Err(SchurWeylError::NTooSmall { n: n as u64, min: 2 });
    }
    if lambda.n() != n {
        return Err(SchurWeylError::SizeMismatch { got: lambda.n(), expected: n });
    }
    if mu.n() != n {
        return Err(SchurWeylError::SizeMismatch { got: mu.n(), expected: n });
    }
    if nu.n() != 2 * n {
        return Err(SchurWeylError::SizeMismatch { got: nu.n(), expected: 2 * n });
    }
    let nf = n as f64;
    let r_l = r_lambda(lambda, n)?;
    let r_m = r_lambda(mu, n)?;
    let r_n = r_lambda(nu, 2 * n)?;
    Ok((2.0 * nf - 1.0) / nf * (r_l + r_m) - (4.0 * nf - 2.0) / nf * r_n)
}

/// Character-ratio cross-check against the exact character table.
pub fn r_lambda_matches_characters(n: usize) -> bool {
    let table = CharacterTable::new(n);
    let transposition = Partition::new(vec![2]).unwrap().padded_to(n).unwrap();
    crate::partition::partitions(n).iter().all(|lambda| {
        let chi = table.value(lambda, &transposition);
        let dim = table.dim(lambda);
        r_lambda_exact(lambda, n).unwrap() == Ratio::new(chi, dim)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_bigint::BigInt;

    fn tableau_reference_shape(word: &[usize]) -> Partition {
        // Straightforward vector-of-rows insertion as an oracle.
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for &x in word {
            let mut cur = x;
            let mut placed = false;
            for row in rows.iter_mut() {
                match row.iter().position(|&y| y > cur) {
                    None => {
                        row.push(cur);
                        placed = true;
                        break;
                    }
                    Some(idx) => {
                        std::mem::swap(&mut row[idx], &mut cur);
                    }
                }
            }
            if !placed {
                rows.push(vec![cur]);
            }
        }
        Partition::new(rows.iter().map(|r| r.len() as u32).collect()).unwrap()
    }

    #[test]
    fn rsk_hand_examples() {
        assert_eq!(rsk_shape(&[0; 5], 2).unwrap(), Partition::row(5));
        assert_eq!(rsk_shape(&[1, 0], 2).unwrap(), Partition::new(vec![1, 1]).unwrap());
        assert_eq!(rsk_shape(&[0, 1, 0, 1], 2).unwrap(), Partition::new(vec![3, 1]).unwrap());
        assert!(rsk_shape(&[2], 2).is_err());
    }

    #[test]
    fn rsk_matches_reference_and_lis() {
        let mut rng = crate::rng::seeded_rng(2);
        use rand::Rng;
        for _ in 0..200 {
            let d = rng.random_range(2..5usize);
            let len = rng.random_range(0..30usize);
            let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..d)).collect();
            let fast = rsk_shape(&word, d).unwrap();
            let slow = tableau_reference_shape(&word);
            assert_eq!(fast, slow, "word {word:?}");
            if !word.is_empty() {
                assert_eq!(
                    fast.part(0) as usize,
                    longest_nondecreasing_subsequence(&word),
                    "LIS mismatch on {word:?}"
                );
            }
        }
    }

    #[test]
    fn pure_spectrum_always_gives_one_row() {
        let alpha = Spectrum::new(vec![1.0, 0.0, 0.0]).unwrap();
        let mut rng = crate::rng::seeded_rng(7);
        for _ in 0..20 {
            assert_eq!(sw_sample(&alpha, 9, &mut rng), Partition::row(9));
        }
    }

    #[test]
    fn shape_law_two_copies_uniform() {
        for d in 2..=4usize {
            let pmf = sw_pmf(&Spectrum::uniform(d), 2, &Caps::default()).unwrap();
            let sym = pmf[&Partition::row(2)];
            let anti = pmf[&Partition::new(vec![1, 1]).unwrap()];
            assert_abs_diff_eq!(sym, (d as f64 + 1.0) / (2.0 * d as f64), epsilon = 1e-12);
            assert_abs_diff_eq!(anti, (d as f64 - 1.0) / (2.0 * d as f64), epsilon = 1e-12);
        }
    }

    #[test]
    fn shape_law_moments_match_closed_forms() {
        use crate::symalg::var_purity;
        for (d, n) in [(2usize, 6usize), (3, 5), (3, 8)] {
            let alpha = crate::states::random_state(d, d, 77).unwrap().spectrum();
            let pmf = sw_pmf(&alpha, n, &Caps::default()).unwrap();
            let mean: f64 =
                pmf.iter().map(|(l, p)| p * r_lambda(l, n).unwrap()).sum();
            assert_abs_diff_eq!(mean, alpha.power_sum(2), epsilon = 1e-10);
            let second: f64 = pmf
                .iter()
                .map(|(l, p)| {
                    let r = r_lambda(l, n).unwrap();
                    p * r * r
                })
                .sum();
            let var = second - mean * mean;
            assert_abs_diff_eq!(var, var_purity(&alpha, n as u64).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn exact_rational_law_is_unbiased() {
        let big = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        for (d, n) in [(2usize, 6usize), (3, 5)] {
            // paninski-style rational spectrum for even d, uniform otherwise
            let alpha: Vec<BigRational> = if d == 2 {
                vec![big(3, 4), big(1, 4)]
            } else {
                vec![big(1, 3); 3]
            };
            let pmf = sw_pmf_exact(&alpha, n).unwrap();
            let mut mean = BigRational::zero();
            for (l, p) in &pmf {
                let r = r_lambda_exact(l, n).unwrap();
                mean += p * big(*r.numer(), *r.denom());
            }
            let p2: BigRational = alpha.iter().map(|a| a * a).sum();
            assert_eq!(mean, p2);
        }
    }

    #[test]
    fn character_ratio_examples_and_table_agreement() {
        assert_abs_diff_eq!(r_lambda(&Partition::row(6), 6).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            r_lambda(&Partition::new(vec![1, 1]).unwrap(), 2).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        for n in 2..=6 {
            assert!(r_lambda_matches_characters(n), "mismatch at n={n}");
        }
        assert!(matches!(
            r_lambda(&Partition::row(1), 1),
            Err(SchurWeylError::NTooSmall { .. })
        ));
    }

    #[test]
    fn kostka_basics() {
        for lambda in crate::partition::partitions(5) {
            assert_eq!(kostka(&lambda, &[1, 1, 1, 1, 1]), lambda.syt_count());
            assert_eq!(kostka(&Partition::row(5), &[2, 2, 1]), 1);
        }
        assert_eq!(kostka(&Partition::new(vec![2, 1]).unwrap(), &[1, 1, 1]), 2);
        assert_eq!(kostka(&Partition::new(vec![2, 1]).unwrap(), &[2, 1]), 1);
        assert_eq!(kostka(&Partition::new(vec![2, 1]).unwrap(), &[3]), 0);
    }

    #[test]
    fn joint_law_matches_word_enumeration() {
        let alpha = Spectrum::new(vec![0.7, 0.3]).unwrap();
        let n = 4;
        let joint = gt_joint_pmf(&alpha, n, &Caps::default()).unwrap();
        // Exhaustive enumeration of the 2^4 words.
        let mut brute: BTreeMap<(Partition, Vec<u32>), f64> = BTreeMap::new();
        for code in 0..(1 << n) {
            let word: Vec<usize> = (0..n).map(|i| (code >> i) & 1).collect();
            let mut p = 1.0;
            let mut tau = vec![0u32; 2];
            for &l in &word {
                p *= alpha.values()[l];
                tau[l] += 1;
            }
            let shape = rsk_shape(&word, 2).unwrap();
            *brute.entry((shape, tau)).or_insert(0.0) += p;
        }
        assert_eq!(joint.len(), brute.len());
        for (shape, tau, p) in joint {
            let q = brute[&(shape, tau)];
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
    }

    #[test]
    fn alt_hs_estimate_is_unbiased_on_diagonal_pairs() {
        // Exhaustive word enumeration at d=2, n=4.
        let alpha = Spectrum::new(vec![0.8, 0.2]).unwrap();
        let beta = Spectrum::new(vec![0.55, 0.45]).unwrap();
        let n = 4;
        let mut mean = 0.0;
        for code in 0..(1 << n) {
            let word: Vec<usize> = (0..n).map(|i| (code >> i) & 1).collect();
            let mut p = 1.0;
            let mut tau = vec![0u32; 2];
            for &l in &word {
                p *= alpha.values()[l];
                tau[l] += 1;
            }
            let sample = GTSample { shape: rsk_shape(&word, 2).unwrap(), type_counts: tau };
            mean += p * alt_hs_estimate(&sample, &beta, n).unwrap();
        }
        let dhs: f64 = alpha
            .values()
            .iter()
            .zip(beta.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        assert_abs_diff_eq!(mean, dhs, epsilon = 1e-10);
    }

    #[test]
    fn hs_estimate_shape_checks() {
        let l2 = Partition::row(2);
        let l4 = Partition::row(4);
        assert!(hs_estimate(&l2, &l2, &l4, 2).is_ok());
        assert!(matches!(
            hs_estimate(&l2, &l2, &l2, 2),
            Err(SchurWeylError::SizeMismatch { .. })
        ));
        assert!(matches!(
            hs_estimate(&Partition::row(1), &Partition::row(1), &l2, 1),
            Err(SchurWeylError::NTooSmall { .. })
        ));
    }
}
