//! Brute-force oracle on the full tensor-power space.
//!
//! Permutation representations, class/orbit averages, and the chi-squared
//! observables all become explicit dense matrices on `(C^d)^(x)n`, so exact
//! outcome laws, means, and variances can be computed by linear algebra and
//! compared against the symbolic and sampling backends. Everything here is
//! capped by [`Caps::dense_dim`]; past the cap operations are refused.

pub mod characters;

pub use characters::CharacterTable;

use crate::config::{Caps, Tolerances};
use crate::linalg::{self, cr, matmul, trace_product, CMat};
use crate::partition::{factorial, partitions, Partition};
use crate::states::DensityMatrix;
use crate::symalg::{
    cycle_type, for_each_permutation, orbit_of, ClassElement, ClassKey, OrbitElement, OrbitKey,
    Permutation,
};
use rand::Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum DenseError {
    #[error("dense dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("projector family does not sum to the identity (residual {residual:.3e})")]
    IncompleteFamily { residual: f64 },
    #[error("outcome law failed validation: {detail}")]
    BadLaw { detail: String },
    #[error(transparent)]
    Symalg(#[from] crate::symalg::SymalgError),
}

/// Dense operator on `(C^d)^(x)copies`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    local_dim: usize,
    copies: usize,
    mat: CMat,
}

impl DenseOperator {
    pub fn from_matrix(local_dim: usize, copies: usize, mat: CMat) -> Self {
        debug_assert_eq!(mat.nrows(), local_dim.pow(copies as u32));
        debug_assert_eq!(mat.ncols(), mat.nrows());
        DenseOperator { local_dim, copies, mat }
    }

    pub fn identity(local_dim: usize, copies: usize, caps: &Caps) -> Result<Self, DenseError> {
        let dim = checked_dim(local_dim, copies, caps)?;
        Ok(DenseOperator { local_dim, copies, mat: linalg::eye(dim) })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_residual(&self.mat)
    }

    /// `tr(state * O)`.
    pub fn expectation(&self, state: &CMat) -> Result<f64, DenseError> {
        self.check_state(state)?;
        Ok(trace_product(state, &self.mat).re)
    }

    /// `tr(state * O^2)` with a single dense product.
    pub fn second_moment(&self, state: &CMat) -> Result<f64, DenseError> {
        self.check_state(state)?;
        let so = matmul(state, &self.mat);
        Ok(trace_product(&so, &self.mat).re)
    }

    /// Exact variance of the measured value on `state`.
    pub fn variance(&self, state: &CMat) -> Result<f64, DenseError> {
        let mean = self.expectation(state)?;
        Ok(self.second_moment(state)? - mean * mean)
    }

    /// Dense product with another operator on the same space.
    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator, DenseError> {
        if self.dim() != other.dim() {
            return Err(DenseError::DimMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(DenseOperator {
            local_dim: self.local_dim,
            copies: self.copies,
            mat: matmul(&self.mat, &other.mat),
        })
    }

    /// Linear combination `self + scale * other`.
    pub fn add_scaled(&self, other: &DenseOperator, scale: f64) -> Result<DenseOperator, DenseError> {
        if self.dim() != other.dim() {
            return Err(DenseError::DimMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(DenseOperator {
            local_dim: self.local_dim,
            copies: self.copies,
            mat: &self.mat + other.mat.scale(scale),
        })
    }

    fn check_state(&self, state: &CMat) -> Result<(), DenseError> {
        if state.nrows() != self.dim() || state.ncols() != self.dim() {
            return Err(DenseError::DimMismatch { left: state.nrows(), right: self.dim() });
        }
        Ok(())
    }
}

fn checked_dim(local_dim: usize, copies: usize, caps: &Caps) -> Result<usize, DenseError> {
    let mut dim: usize = 1;
    for _ in 0..copies {
        dim = dim.checked_mul(local_dim).unwrap_or(usize::MAX);
        if dim > caps.dense_dim {
            return Err(DenseError::TooLarge { dim, cap: caps.dense_dim });
        }
    }
    Ok(dim)
}

// ---------------------------------------------------------------------------
// Permutation representation and algebra matrices
// ---------------------------------------------------------------------------

/// Basis strides for big-endian digit encoding: slot 0 is most significant.
fn strides(local_dim: usize, copies: usize) -> Vec<usize> {
    (0..copies).map(|i| local_dim.pow((copies - 1 - i) as u32)).collect()
}

/// Where the permutation sends basis index `x` (slot `i` content moves to
/// slot `perm(i)`).
fn permuted_index(x: usize, perm: &[usize], strides: &[usize]) -> usize {
    let mut y = 0;
    let mut rest = x;
    for (i, &stride) in strides.iter().enumerate() {
        let digit = rest / stride;
        rest %= stride;
        y += digit * strides[perm[i]];
    }
    debug_assert_eq!(rest, 0);
    y
}

/// The unitary permutation matrix moving tensor slot `i` to slot `perm(i)`.
pub fn perm_matrix(p: &Permutation, local_dim: usize, caps: &Caps) -> Result<DenseOperator, DenseError> {
    let n = p.len();
    let dim = checked_dim(local_dim, n, caps)?;
    let st = strides(local_dim, n);
    let mut mat = CMat::zeros(dim, dim);
    for x in 0..dim {
        let y = permuted_index(x, p.images(), &st);
        mat[(y, x)] = linalg::C_ONE;
    }
    Ok(DenseOperator { local_dim, copies: n, mat })
}

/// Dense matrix of a class-algebra element: weighted sum of permutation
/// matrices over each class, expanded by full enumeration of `S_n`.
pub fn class_matrix(x: &ClassElement, local_dim: usize, caps: &Caps) -> Result<DenseOperator, DenseError> {
    let n = x.ambient();
    let dim = checked_dim(local_dim, n, caps)?;
    let st = strides(local_dim, n);
    let mut weights: BTreeMap<ClassKey, f64> = BTreeMap::new();
    for (key, coeff) in x.terms() {
        let size = key.class_size(n) as f64;
        weights.insert(key.clone(), rat_to_f64(*coeff) / size);
    }
    let mut mat = CMat::zeros(dim, dim);
    for_each_permutation(n, |images| {
        let p = Permutation::new(images.to_vec()).expect("valid permutation");
        let key = ClassKey::new(&cycle_type(&p));
        let Some(&w) = weights.get(&key) else { return };
        if w == 0.0 {
            return;
        }
        let wc = cr(w);
        for col in 0..dim {
            let row = permuted_index(col, images, &st);
            mat[(row, col)] += wc;
        }
    });
    Ok(DenseOperator { local_dim, copies: n, mat })
}

/// Dense matrix of an orbit-algebra element on `(C^d)^(x)(m+n)` (the first
/// `m` slots are the r-block).
pub fn orbit_matrix(x: &OrbitElement, local_dim: usize, caps: &Caps) -> Result<DenseOperator, DenseError> {
    let (m, n) = x.ambient();
    let total = m + n;
    let dim = checked_dim(local_dim, total, caps)?;
    let st = strides(local_dim, total);
    // Orbit sizes by one counting pass.
    let mut sizes: BTreeMap<OrbitKey, u64> = x.terms().keys().map(|k| (k.clone(), 0)).collect();
    for_each_permutation(total, |images| {
        let p = Permutation::new(images.to_vec()).expect("valid permutation");
        let key = orbit_of(&p, m, n).expect("sizes match");
        if let Some(count) = sizes.get_mut(&key) {
            *count += 1;
        }
    });
    let weights: BTreeMap<OrbitKey, f64> = x
        .terms()
        .iter()
        .map(|(k, c)| (k.clone(), rat_to_f64(*c) / sizes[k] as f64))
        .collect();
    let mut mat = CMat::zeros(dim, dim);
    for_each_permutation(total, |images| {
        let p = Permutation::new(images.to_vec()).expect("valid permutation");
        let key = orbit_of(&p, m, n).expect("sizes match");
        let Some(&w) = weights.get(&key) else { return };
        if w == 0.0 {
            return;
        }
        let wc = cr(w);
        for col in 0..dim {
            let row = permuted_index(col, images, &st);
            mat[(row, col)] += wc;
        }
    });
    Ok(DenseOperator { local_dim, copies: total, mat })
}

fn rat_to_f64(r: crate::symalg::Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

// ---------------------------------------------------------------------------
// States on the tensor power
// ---------------------------------------------------------------------------

/// `rho^(x)n` as a dense matrix.
pub fn state_power(rho: &DensityMatrix, n: usize, caps: &Caps) -> Result<CMat, DenseError> {
    checked_dim(rho.dim(), n, caps)?;
    Ok(linalg::kron_power(rho.matrix(), n))
}

/// `rho^(x)m (x) sigma^(x)n` as a dense matrix.
pub fn two_block_state(
    rho: &DensityMatrix,
    m: usize,
    sigma: &DensityMatrix,
    n: usize,
    caps: &Caps,
) -> Result<CMat, DenseError> {
    if rho.dim() != sigma.dim() {
        return Err(DenseError::DimMismatch { left: rho.dim(), right: sigma.dim() });
    }
    checked_dim(rho.dim(), m + n, caps)?;
    Ok(linalg::kron(
        &linalg::kron_power(rho.matrix(), m),
        &linalg::kron_power(sigma.matrix(), n),
    ))
}

// ---------------------------------------------------------------------------
// Outcome distributions
// ---------------------------------------------------------------------------

/// Finite outcome law of an observable: `(value, probability)` pairs with
/// distinct values.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    outcomes: Vec<(f64, f64)>,
}

impl OutcomeDistribution {
    pub fn new(outcomes: Vec<(f64, f64)>, tol: &Tolerances) -> Result<Self, DenseError> {
        let mut total = 0.0;
        for &(_, p) in &outcomes {
            if p < tol.prob_floor {
                return Err(DenseError::BadLaw { detail: format!("negative probability {p}") });
            }
            total += p;
        }
        if (total - 1.0).abs() > tol.prob_sum {
            return Err(DenseError::BadLaw { detail: format!("probabilities sum to {total}") });
        }
        let mut cleaned: Vec<(f64, f64)> =
            outcomes.into_iter().map(|(v, p)| (v, p.max(0.0))).collect();
        cleaned.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(OutcomeDistribution { outcomes: cleaned })
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|&(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.outcomes.iter().map(|&(v, p)| (v - m) * (v - m) * p).sum()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let mut u: f64 = rng.random();
        for &(v, p) in &self.outcomes {
            if u < p {
                return v;
            }
            u -= p;
        }
        self.outcomes.last().expect("nonempty law").0
    }

    /// Total variation distance, matching outcome values within `value_tol`.
    pub fn tv_distance(&self, other: &OutcomeDistribution, value_tol: f64) -> f64 {
        let mut merged: Vec<(f64, f64, f64)> = Vec::new();
        let push = |merged: &mut Vec<(f64, f64, f64)>, v: f64, p: f64, q: f64| {
            if let Some(last) = merged.last_mut() {
                if (v - last.0).abs() <= value_tol {
                    last.1 += p;
                    last.2 += q;
                    return;
                }
            }
            merged.push((v, p, q));
        };
        let mut all: Vec<(f64, f64, f64)> = self
            .outcomes
            .iter()
            .map(|&(v, p)| (v, p, 0.0))
            .chain(other.outcomes.iter().map(|&(v, q)| (v, 0.0, q)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (v, p, q) in all {
            push(&mut merged, v, p, q);
        }
        0.5 * merged.iter().map(|&(_, p, q)| (p - q).abs()).sum::<f64>()
    }

    /// Diagnostic dump: `value,probability` per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,probability\n");
        for &(v, p) in &self.outcomes {
            out.push_str(&format!("{v},{p}\n"));
        }
        out
    }
}

/// Exact outcome law of a Hermitian observable on a state: cluster the
/// eigenvalues, then weight each eigenspace by the state.
///
/// The returned law's mean and variance are cross-checked against
/// `tr(state O)` and `tr(state O^2) - tr(state O)^2`.
pub fn exact_distribution(
    o: &DenseOperator,
    state: &CMat,
    tol: &Tolerances,
) -> Result<OutcomeDistribution, DenseError> {
    let residual = o.hermiticity_residual();
    if residual > tol.hermitian {
        return Err(DenseError::NotHermitian { residual });
    }
    if state.nrows() != o.dim() {
        return Err(DenseError::DimMismatch { left: state.nrows(), right: o.dim() });
    }
    let (vals, vecs) = linalg::herm_eigen(o.matrix());
    let dim = vals.len();
    let mut outcomes: Vec<(f64, f64)> = Vec::new();
    let mut k = 0;
    while k < dim {
        let mut j = k + 1;
        while j < dim && (vals[j - 1] - vals[j]).abs() <= tol.eig_cluster * vals[j - 1].abs().max(1.0)
        {
            j += 1;
        }
        let value = vals[k..j].iter().sum::<f64>() / (j - k) as f64;
        let mut prob = 0.0;
        for col in k..j {
            let v = vecs.column(col);
            let sv = state * v;
            prob += v.dotc(&sv).re;
        }
        outcomes.push((value, prob));
        k = j;
    }
    let law = OutcomeDistribution::new(outcomes, tol)?;
    let mean = o.expectation(state)?;
    let var = o.variance(state)?;
    if (law.mean() - mean).abs() > 1e-9 * mean.abs().max(1.0) {
        return Err(DenseError::BadLaw {
            detail: format!("law mean {} vs trace mean {}", law.mean(), mean),
        });
    }
    if (law.variance() - var).abs() > 1e-9 * var.abs().max(1.0) {
        return Err(DenseError::BadLaw {
            detail: format!("law variance {} vs trace variance {}", law.variance(), var),
        });
    }
    Ok(law)
}

// ---------------------------------------------------------------------------
// Isotypic and type projectors
// ---------------------------------------------------------------------------

/// Projectors onto the isotypic components of `(C^d)^(x)n`, indexed by
/// partitions of `n`. Shapes with more than `d` rows project to zero.
#[derive(Debug, Clone)]
pub struct SchurProjectors {
    local_dim: usize,
    copies: usize,
    by_shape: BTreeMap<Partition, DenseOperator>,
}

impl SchurProjectors {
    pub fn shapes(&self) -> impl Iterator<Item = &Partition> {
        self.by_shape.keys()
    }

    pub fn projector(&self, shape: &Partition) -> Option<&DenseOperator> {
        self.by_shape.get(shape)
    }

    /// Shapes with a nonzero projector (at most `local_dim` rows).
    pub fn nonzero(&self) -> impl Iterator<Item = (&Partition, &DenseOperator)> {
        let d = self.local_dim;
        self.by_shape.iter().filter(move |(shape, _)| shape.len() <= d)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }
}

/// Build every isotypic projector as
/// `(dim(lambda)/n!) * sum_pi chi_lambda(pi) P(pi)`.
pub fn schur_projectors(local_dim: usize, n: usize, caps: &Caps) -> Result<SchurProjectors, DenseError> {
    if n > caps.schur_n {
        return Err(DenseError::TooLarge { dim: n, cap: caps.schur_n });
    }
    let dim = checked_dim(local_dim, n, caps)?;
    let st = strides(local_dim, n);
    let table = CharacterTable::new(n);
    let shapes = partitions(n);
    let fact = factorial(n) as f64;
    let mut mats: Vec<CMat> = shapes.iter().map(|_| CMat::zeros(dim, dim)).collect();
    let weights: Vec<BTreeMap<Partition, f64>> = {
        // weight of pi in Pi_lambda depends only on the cycle type
        let mut per_class: Vec<BTreeMap<Partition, f64>> = Vec::new();
        for shape in &shapes {
            let dim_l = table.dim(shape) as f64;
            let mut m = BTreeMap::new();
            for kappa in partitions(n) {
                let chi = table.value(shape, &kappa) as f64;
                m.insert(kappa, dim_l * chi / fact);
            }
            per_class.push(m);
        }
        per_class
    };
    for_each_permutation(n, |images| {
        let p = Permutation::new(images.to_vec()).expect("valid permutation");
        let kappa = cycle_type(&p);
        let targets: Vec<usize> = (0..dim)
            .map(|col| permuted_index(col, images, &st))
            .collect();
        for (li, shape) in shapes.iter().enumerate() {
            if shape.len() > local_dim {
                continue;
            }
            let w = weights[li][&kappa];
            if w == 0.0 {
                continue;
            }
            let wc = cr(w);
            let mat = &mut mats[li];
            for (col, &row) in targets.iter().enumerate() {
                mat[(row, col)] += wc;
            }
        }
    });
    let by_shape = shapes
        .into_iter()
        .zip(mats)
        .map(|(shape, mat)| (shape, DenseOperator { local_dim, copies: n, mat }))
        .collect();
    Ok(SchurProjectors { local_dim, copies: n, by_shape })
}

/// All weak compositions of `n` into `d` parts (word types).
pub fn all_types(d: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for t in 0..=left {
            cur[i] = t;
            rec(i + 1, left - t, cur, out);
        }
    }
    rec(0, n as u32, &mut cur, &mut out);
    out
}

/// Projector onto the span of product-basis vectors of letter type `tau`.
pub fn type_projector(tau: &[u32], local_dim: usize, caps: &Caps) -> Result<DenseOperator, DenseError> {
    let n: usize = tau.iter().map(|&t| t as usize).sum();
    if tau.len() != local_dim {
        return Err(DenseError::DimMismatch { left: tau.len(), right: local_dim });
    }
    let dim = checked_dim(local_dim, n, caps)?;
    let st = strides(local_dim, n);
    let mut mat = CMat::zeros(dim, dim);
    let mut counts = vec![0u32; local_dim];
    for x in 0..dim {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut rest = x;
        for &stride in &st {
            counts[rest / stride] += 1;
            rest %= stride;
        }
        if counts == tau {
            mat[(x, x)] = linalg::C_ONE;
        }
    }
    Ok(DenseOperator { local_dim, copies: n, mat })
}

// ---------------------------------------------------------------------------
// Sequential projective measurement
// ---------------------------------------------------------------------------

fn check_family(family: &[DenseOperator], tol: &Tolerances) -> Result<usize, DenseError> {
    let dim = family.first().map(|o| o.dim()).unwrap_or(0);
    if dim == 0 {
        return Err(DenseError::IncompleteFamily { residual: 1.0 });
    }
    let mut sum = CMat::zeros(dim, dim);
    for o in family {
        if o.dim() != dim {
            return Err(DenseError::DimMismatch { left: o.dim(), right: dim });
        }
        sum += o.matrix();
    }
    let residual = (&sum - linalg::eye(dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if residual > tol.prob_sum {
        return Err(DenseError::IncompleteFamily { residual });
    }
    Ok(dim)
}

/// Sample outcome labels of the projective families applied in order, with
/// the exact sequential law (project and renormalize between stages).
pub fn sequential_measure(
    families: &[&[DenseOperator]],
    state: &CMat,
    tol: &Tolerances,
    rng: &mut impl Rng,
) -> Result<Vec<usize>, DenseError> {
    for family in families {
        let dim = check_family(family, tol)?;
        if dim != state.nrows() {
            return Err(DenseError::DimMismatch { left: dim, right: state.nrows() });
        }
    }
    let mut current = state.clone();
    let mut labels = Vec::with_capacity(families.len());
    for family in families {
        let probs: Vec<f64> = family
            .iter()
            .map(|p| trace_product(&current, p.matrix()).re.max(0.0))
            .collect();
        let total: f64 = probs.iter().sum();
        let mut u: f64 = rng.random::<f64>() * total;
        let mut chosen = probs.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            if u < p {
                chosen = i;
                break;
            }
            u -= p;
        }
        labels.push(chosen);
        let proj = family[chosen].matrix();
        let projected = matmul(&matmul(proj, &current), proj);
        let norm = trace_product(&projected, &linalg::eye(projected.nrows())).re;
        let norm = if norm <= 0.0 { 1.0 } else { norm };
        current = projected.scale(1.0 / norm);
    }
    Ok(labels)
}

/// Exact joint law of the sequence of outcomes: probability of the label
/// string `(i_1, ..., i_k)` is `tr(F_k ... F_1 state F_1 ... F_k)`.
/// Branches below `prune` are dropped.
pub fn sequential_pmf(
    families: &[&[DenseOperator]],
    state: &CMat,
    tol: &Tolerances,
    prune: f64,
) -> Result<Vec<(Vec<usize>, f64)>, DenseError> {
    for family in families {
        let dim = check_family(family, tol)?;
        if dim != state.nrows() {
            return Err(DenseError::DimMismatch { left: dim, right: state.nrows() });
        }
    }
    let mut out = Vec::new();
    let mut labels = Vec::new();
    fn rec(
        families: &[&[DenseOperator]],
        current: &CMat,
        weight: f64,
        labels: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
        prune: f64,
    ) {
        let Some((family, rest)) = families.split_first() else {
            out.push((labels.clone(), weight));
            return;
        };
        for (i, proj) in family.iter().enumerate() {
            let p = trace_product(current, proj.matrix()).re.max(0.0);
            let branch = weight * p;
            if branch <= prune {
                continue;
            }
            let projected = matmul(&matmul(proj.matrix(), current), proj.matrix());
            let next = projected.scale(1.0 / p);
            labels.push(i);
            rec(rest, &next, branch, labels, out, prune);
            labels.pop();
        }
    }
    rec(families, state, 1.0, &mut labels, &mut out, prune);
    Ok(out)
}

/// `tr(m * (x (x) y))` without materializing the Kronecker product.
pub fn trace_times_kron(m: &CMat, x: &CMat, y: &CMat) -> num_complex::Complex64 {
    let dx = x.nrows();
    let dy = y.nrows();
    debug_assert_eq!(m.nrows(), dx * dy);
    let mut acc = linalg::C_ZERO;
    for i1 in 0..dx {
        for j1 in 0..dx {
            let xv = x[(j1, i1)];
            if xv.norm_sqr() == 0.0 {
                continue;
            }
            for i2 in 0..dy {
                for j2 in 0..dy {
                    let mv = m[(i1 * dy + i2, j1 * dy + j2)];
                    if mv.norm_sqr() == 0.0 {
                        continue;
                    }
                    acc += mv * xv * y[(j2, i2)];
                }
            }
        }
    }
    acc
}
