//! Dense complex linear algebra helpers shared by the state and oracle
//! modules: Hermitian eigendecomposition, PSD square roots, Kronecker
//! powers, and a cache-friendly parallel matrix product for the larger
//! tensor-power spaces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Dense complex matrix (column-major).
pub type CMat = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVec = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex scalar from a real.
pub fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `d x d` identity.
pub fn eye(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Largest entrywise deviation of `m` from its own adjoint.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let r = (m[(i, j)] - m[(j, i)].conj()).norm();
            if r > worst {
                worst = r;
            }
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues sorted in nonincreasing order together with the
/// matching orthonormal eigenvector columns.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let se = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let vals: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let n = m.nrows();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues only, sorted nonincreasing.
pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Rebuild `V diag(f(lambda)) V^dagger` from an eigendecomposition.
pub fn from_eigen(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (col, &v) in vals.iter().enumerate() {
        let fv = cr(f(v));
        for r in 0..n {
            scaled[(r, col)] *= fv;
        }
    }
    &scaled * vecs.adjoint()
}

/// PSD square root with eigenvalues below `clamp` treated as zero.
pub fn psd_sqrt(m: &CMat, clamp: f64) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    from_eigen(&vals, &vecs, |v| if v < clamp { 0.0 } else { v.sqrt() })
}

/// Singular values of `m`, sorted nonincreasing, via `m^dagger m`.
pub fn singular_values(m: &CMat, clamp: f64) -> Vec<f64> {
    let gram = m.adjoint() * m;
    herm_eigenvalues(&gram)
        .into_iter()
        .map(|v| if v < clamp { 0.0 } else { v.sqrt() })
        .collect()
}

/// Trace as a complex number.
pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(b.ncols(), n);
    let mut acc = C_ZERO;
    for j in 0..n {
        for i in 0..a.ncols() {
            acc += a[(j, i)] * b[(i, j)];
        }
    }
    acc
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `m`-fold Kronecker power.
pub fn kron_power(a: &CMat, m: usize) -> CMat {
    assert!(m >= 1, "kron_power needs at least one factor");
    let mut out = a.clone();
    for _ in 1..m {
        out = out.kronecker(a);
    }
    out
}

/// Parallel dense product `a * b`.
///
/// Column-parallel axpy accumulation; noticeably faster than the generic
/// complex path on the 3^6-dimensional oracle spaces.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    let k = a.ncols();
    assert_eq!(k, b.nrows(), "inner dimension mismatch");
    let m = b.ncols();
    let a_data = a.as_slice();
    let mut out = vec![C_ZERO; n * m];
    out.par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        for l in 0..k {
            let coef = b[(l, j)];
            if coef.norm_sqr() == 0.0 {
                continue;
            }
            let a_col = &a_data[l * n..(l + 1) * n];
            for (c, &av) in col.iter_mut().zip(a_col) {
                *c += coef * av;
            }
        }
    });
    CMat::from_vec(n, m, out)
}

/// Standard complex Gaussian matrix (independent unit normals in the real
/// and imaginary parts).
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of the
/// diagonal of `R` pushed into `Q`.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C_ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix `(G + G^dagger)/2`.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()).scale(0.5)
}
