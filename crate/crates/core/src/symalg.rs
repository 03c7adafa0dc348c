//! Symbolic symmetric-group class algebra.
//!
//! Estimators for spectral statistics live in the group algebra of `S_n`
//! (one unknown state) or in its subalgebra of `S_m x S_n`-invariants (two
//! unknown states). The building blocks are conjugacy-class averages
//! `O_[kappa]` and labeled-orbit averages such as `O_(rs)`; products of
//! averages expand exactly (rational coefficients) by enumeration, and
//! expectations reduce to power sums or trace monomials. The closed-form
//! variance and covariance formulas for the purity, overlap, and squared
//! Hilbert-Schmidt estimators live here too.

use crate::config::Caps;
use crate::linalg::{trace_product, CMat};
use crate::partition::Partition;
use crate::states::{DensityMatrix, Spectrum, StateError};
use num_rational::Ratio;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Exact coefficient type for algebra elements.
pub type Rat = Ratio<i64>;

#[derive(Debug, Clone, Error)]
pub enum SymalgError {
    #[error("images do not form a bijection")]
    NotBijection,
    #[error("ambient sizes differ: {left} vs {right}")]
    AmbientMismatch { left: String, right: String },
    #[error("ambient size {size} exceeds the enumeration cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("permutation acts on {len} points, expected {expected}")]
    SizeMismatch { len: usize, expected: usize },
    #[error("need at least {min} copies, got {n}")]
    NTooSmall { n: u64, min: u64 },
    #[error("cycle type {key} does not fit in ambient size {n}")]
    DoesNotFit { key: String, n: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

// ---------------------------------------------------------------------------
// Permutations
// ---------------------------------------------------------------------------

/// A permutation of `{0, ..., n-1}` stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, SymalgError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &im in &images {
            if im >= n || seen[im] {
                return Err(SymalgError::NotBijection);
            }
            seen[im] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Build from disjoint cycles over `{0, ..., n-1}`.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, SymalgError> {
        let mut images: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= n {
                    return Err(SymalgError::SizeMismatch { len: x + 1, expected: n });
                }
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Permutation::new(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// Function composition: `(self * rhs)(x) = self(rhs(x))`.
    pub fn compose(&self, rhs: &Permutation) -> Permutation {
        Permutation(rhs.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &im) in self.0.iter().enumerate() {
            inv[im] = i;
        }
        Permutation(inv)
    }

    /// Disjoint cycles in traversal order (fixed points included).
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.0[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.0[cur];
            }
            out.push(cycle);
        }
        out
    }
}

/// Cycle type of a permutation, 1-cycles included, as a partition of `n`.
pub fn cycle_type(p: &Permutation) -> Partition {
    let lens: Vec<u32> = p.cycles().iter().map(|c| c.len() as u32).collect();
    Partition::from_unsorted(lens).expect("cycle lengths are positive")
}

/// Visit every permutation of `{0, ..., n-1}` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Basis keys
// ---------------------------------------------------------------------------

/// Conjugacy-class key: the cycle type with 1-cycles stripped (they act
/// trivially, so keys stay canonical across ambient sizes).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassKey(Partition);

impl ClassKey {
    /// From an arbitrary cycle type; 1-cycles are dropped.
    pub fn new(cycle_type: &Partition) -> Self {
        ClassKey(cycle_type.strip_ones())
    }

    pub fn identity() -> Self {
        ClassKey(Partition::row(0))
    }

    pub fn transposition() -> Self {
        ClassKey(Partition::row(2))
    }

    pub fn from_parts(parts: Vec<u32>) -> Result<Self, SymalgError> {
        let p = Partition::from_unsorted(parts)
            .map_err(|_| SymalgError::DoesNotFit { key: "<invalid>".into(), n: 0 })?;
        Ok(ClassKey(p.strip_ones()))
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    /// Weight: number of points moved plus fixed points inside the cycles.
    pub fn weight(&self) -> usize {
        self.0.n()
    }

    pub fn fits_in(&self, n: usize) -> bool {
        self.weight() <= n
    }

    /// Size of the corresponding conjugacy class in `S_n`.
    pub fn class_size(&self, n: usize) -> u128 {
        self.0.padded_to(n).expect("checked by caller").class_size()
    }
}

impl Ord for ClassKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.0.parts().cmp(other.0.parts()))
    }
}

impl PartialOrd for ClassKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which of the two tensor blocks an index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// First block (the rho copies).
    R,
    /// Second block (the sigma copies).
    S,
}

impl Label {
    fn ch(self) -> char {
        match self {
            Label::R => 'r',
            Label::S => 's',
        }
    }
}

/// Labeled-orbit key: a multiset of cyclic label words (length-1 cycles
/// stripped). Each word is canonicalized to its lexicographically least
/// rotation, so `(rs)` and `(sr)` are the same key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrbitKey(Vec<Vec<Label>>);

impl OrbitKey {
    pub fn identity() -> Self {
        OrbitKey(vec![])
    }

    /// Canonicalize a list of cyclic words.
    pub fn from_words<W: AsRef<[Label]>>(words: &[W]) -> Self {
        let mut ws: Vec<Vec<Label>> = words
            .iter()
            .map(|w| canonical_rotation(w.as_ref()))
            .filter(|w| w.len() >= 2)
            .collect();
        ws.sort();
        OrbitKey(ws)
    }

    pub fn words(&self) -> &[Vec<Label>] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().map(|w| w.len()).sum()
    }

    /// Number of labels of each kind: `(r_count, s_count)`.
    pub fn label_counts(&self) -> (usize, usize) {
        let r = self.0.iter().flatten().filter(|&&l| l == Label::R).count();
        (r, self.weight() - r)
    }

    pub fn fits_in(&self, m: usize, n: usize) -> bool {
        let (r, s) = self.label_counts();
        r <= m && s <= n
    }

    // Convenience constructors for the estimator keys.
    pub fn rs() -> Self {
        OrbitKey::from_words(&[[Label::R, Label::S]])
    }
    pub fn rr() -> Self {
        OrbitKey::from_words(&[[Label::R, Label::R]])
    }
    pub fn ss() -> Self {
        OrbitKey::from_words(&[[Label::S, Label::S]])
    }
}

fn canonical_rotation(w: &[Label]) -> Vec<Label> {
    let k = w.len();
    if k <= 1 {
        return w.to_vec();
    }
    let mut best: Option<Vec<Label>> = None;
    for shift in 0..k {
        let rotated: Vec<Label> = (0..k).map(|i| w[(i + shift) % k]).collect();
        if best.as_ref().is_none_or(|b| rotated < *b) {
            best = Some(rotated);
        }
    }
    best.unwrap()
}

impl Ord for OrbitKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.0.len().cmp(&other.0.len()))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for OrbitKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for OrbitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "[]");
        }
        for w in &self.0 {
            write!(f, "(")?;
            for l in w {
                write!(f, "{}", l.ch())?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// The labeled orbit of a permutation in `S_{m+n}` (indices below `m` are
/// `r`-labeled, the rest `s`-labeled).
pub fn orbit_of(p: &Permutation, m: usize, n: usize) -> Result<OrbitKey, SymalgError> {
    if p.len() != m + n {
        return Err(SymalgError::SizeMismatch { len: p.len(), expected: m + n });
    }
    let words: Vec<Vec<Label>> = p
        .cycles()
        .into_iter()
        .map(|c| c.iter().map(|&i| if i < m { Label::R } else { Label::S }).collect())
        .collect();
    Ok(OrbitKey::from_words(&words))
}

// ---------------------------------------------------------------------------
// Algebra elements
// ---------------------------------------------------------------------------

/// Rational linear combination of class averages in a fixed ambient `S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassElement {
    n: usize,
    terms: BTreeMap<ClassKey, Rat>,
}

/// Rational linear combination of orbit averages for `m` r-labeled and `n`
/// s-labeled tensor slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitElement {
    m: usize,
    n: usize,
    terms: BTreeMap<OrbitKey, Rat>,
}

fn push_term<K: Ord>(terms: &mut BTreeMap<K, Rat>, key: K, coeff: Rat) {
    if coeff == Rat::new(0, 1) {
        return;
    }
    *terms.entry(key).or_insert_with(|| Rat::new(0, 1)) += coeff;
}

impl ClassElement {
    pub fn basis(key: ClassKey, n: usize) -> Result<Self, SymalgError> {
        if !key.fits_in(n) {
            return Err(SymalgError::DoesNotFit { key: key.to_string(), n });
        }
        let mut terms = BTreeMap::new();
        terms.insert(key, Rat::new(1, 1));
        Ok(ClassElement { n, terms })
    }

    pub fn identity(n: usize) -> Self {
        ClassElement::basis(ClassKey::identity(), n).expect("identity always fits")
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<ClassKey, Rat> {
        &self.terms
    }

    pub fn coeff(&self, key: &ClassKey) -> Rat {
        self.terms.get(key).copied().unwrap_or_else(|| Rat::new(0, 1))
    }

    pub fn coeff_sum(&self) -> Rat {
        self.terms.values().copied().sum()
    }

    pub fn add_scaled(&mut self, other: &ClassElement, scale: Rat) -> Result<(), SymalgError> {
        if self.n != other.n {
            return Err(SymalgError::AmbientMismatch {
                left: self.n.to_string(),
                right: other.n.to_string(),
            });
        }
        for (k, &c) in &other.terms {
            push_term(&mut self.terms, k.clone(), c * scale);
        }
        self.terms.retain(|_, c| *c != Rat::new(0, 1));
        Ok(())
    }
}

impl fmt::Display for ClassElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display_terms(f, self.terms.iter().map(|(k, c)| (k.to_string(), *c)))
    }
}

impl OrbitElement {
    pub fn basis(key: OrbitKey, m: usize, n: usize) -> Result<Self, SymalgError> {
        if !key.fits_in(m, n) {
            return Err(SymalgError::DoesNotFit { key: key.to_string(), n: m + n });
        }
        let mut terms = BTreeMap::new();
        terms.insert(key, Rat::new(1, 1));
        Ok(OrbitElement { m, n, terms })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        OrbitElement::basis(OrbitKey::identity(), m, n).expect("identity always fits")
    }

    pub fn ambient(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn terms(&self) -> &BTreeMap<OrbitKey, Rat> {
        &self.terms
    }

    pub fn coeff(&self, key: &OrbitKey) -> Rat {
        self.terms.get(key).copied().unwrap_or_else(|| Rat::new(0, 1))
    }

    pub fn coeff_sum(&self) -> Rat {
        self.terms.values().copied().sum()
    }

    pub fn add_scaled(&mut self, other: &OrbitElement, scale: Rat) -> Result<(), SymalgError> {
        if (self.m, self.n) != (other.m, other.n) {
            return Err(SymalgError::AmbientMismatch {
                left: format!("({},{})", self.m, self.n),
                right: format!("({},{})", other.m, other.n),
            });
        }
        for (k, &c) in &other.terms {
            push_term(&mut self.terms, k.clone(), c * scale);
        }
        self.terms.retain(|_, c| *c != Rat::new(0, 1));
        Ok(())
    }
}

impl fmt::Display for OrbitElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display_terms(f, self.terms.iter().map(|(k, c)| (k.to_string(), *c)))
    }
}

fn display_terms(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (String, Rat)>,
) -> fmt::Result {
    let mut first = true;
    for (key, coeff) in terms {
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        write!(f, "{coeff}*{key}")?;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// The squared-Hilbert-Schmidt estimator `O_(rr) + O_(ss) - 2 O_(rs)`.
pub fn hs_combination(m: usize, n: usize) -> Result<OrbitElement, SymalgError> {
    let mut x = OrbitElement::basis(OrbitKey::rr(), m, n)?;
    x.add_scaled(&OrbitElement::basis(OrbitKey::ss(), m, n)?, Rat::new(1, 1))?;
    x.add_scaled(&OrbitElement::basis(OrbitKey::rs(), m, n)?, Rat::new(-2, 1))?;
    Ok(x)
}

// ---------------------------------------------------------------------------
// Products by enumeration
// ---------------------------------------------------------------------------

/// Canonical representative of a class: cycles laid out consecutively.
fn class_representative(key: &ClassKey, n: usize) -> Permutation {
    let mut cycles = Vec::new();
    let mut next = 0usize;
    for &len in key.partition().parts() {
        let cycle: Vec<usize> = (next..next + len as usize).collect();
        next += len as usize;
        cycles.push(cycle);
    }
    Permutation::from_cycles(n, &cycles).expect("representative fits by key check")
}

/// Canonical representative of an orbit: r-labels take the lowest free
/// indices of the first block, s-labels of the second block.
fn orbit_representative(key: &OrbitKey, m: usize, n: usize) -> Permutation {
    let mut next_r = 0usize;
    let mut next_s = m;
    let mut cycles = Vec::new();
    for word in key.words() {
        let mut cycle = Vec::with_capacity(word.len());
        for &l in word {
            match l {
                Label::R => {
                    cycle.push(next_r);
                    next_r += 1;
                }
                Label::S => {
                    cycle.push(next_s);
                    next_s += 1;
                }
            }
        }
        cycles.push(cycle);
    }
    Permutation::from_cycles(m + n, &cycles).expect("representative fits by key check")
}

/// Exact product of two class averages in the class-average basis.
///
/// One factor is fixed to a representative and the other's class is fully
/// enumerated; the coefficient on `O_kappa` is the probability that the
/// product of independent uniform class members lands in `kappa`, which is
/// well defined because class averages are central.
pub fn class_product_basis(
    a: &ClassKey,
    b: &ClassKey,
    n: usize,
    caps: &Caps,
) -> Result<ClassElement, SymalgError> {
    if n > caps.class_ambient {
        return Err(SymalgError::TooLarge { size: n, cap: caps.class_ambient });
    }
    for k in [a, b] {
        if !k.fits_in(n) {
            return Err(SymalgError::DoesNotFit { key: k.to_string(), n });
        }
    }
    let rep = class_representative(a, n);
    let b_padded = b.partition().padded_to(n).expect("checked");
    let mut counts: BTreeMap<ClassKey, u64> = BTreeMap::new();
    let mut class_size = 0u64;
    for_each_permutation(n, |images| {
        let p = Permutation(images.to_vec());
        if cycle_type(&p) != b_padded {
            return;
        }
        class_size += 1;
        let prod = rep.compose(&p);
        *counts.entry(ClassKey::new(&cycle_type(&prod))).or_insert(0) += 1;
    });
    let mut terms = BTreeMap::new();
    for (key, count) in counts {
        terms.insert(key, Rat::new(count as i64, class_size as i64));
    }
    Ok(ClassElement { n, terms })
}

/// Bilinear extension of [`class_product_basis`] to algebra elements.
pub fn class_product(
    a: &ClassElement,
    b: &ClassElement,
    caps: &Caps,
) -> Result<ClassElement, SymalgError> {
    if a.n != b.n {
        return Err(SymalgError::AmbientMismatch {
            left: a.n.to_string(),
            right: b.n.to_string(),
        });
    }
    let mut out = ClassElement { n: a.n, terms: BTreeMap::new() };
    for (ka, &ca) in &a.terms {
        for (kb, &cb) in &b.terms {
            let prod = class_product_basis(ka, kb, a.n, caps)?;
            out.add_scaled(&prod, ca * cb)?;
        }
    }
    Ok(out)
}

/// Exact product of two orbit averages in the orbit-average basis.
///
/// Orbit averages commute with the block-preserving subgroup, so fixing a
/// representative of the first factor and enumerating the second factor's
/// orbit is exact; [`orbit_product_basis_full`] double-checks this on
/// small cases by enumerating both orbits.
pub fn orbit_product_basis(
    a: &OrbitKey,
    b: &OrbitKey,
    m: usize,
    n: usize,
    caps: &Caps,
) -> Result<OrbitElement, SymalgError> {
    orbit_product_impl(a, b, m, n, caps, false)
}

/// Reference implementation enumerating both orbits (quadratic; test use).
pub fn orbit_product_basis_full(
    a: &OrbitKey,
    b: &OrbitKey,
    m: usize,
    n: usize,
    caps: &Caps,
) -> Result<OrbitElement, SymalgError> {
    orbit_product_impl(a, b, m, n, caps, true)
}

fn orbit_product_impl(
    a: &OrbitKey,
    b: &OrbitKey,
    m: usize,
    n: usize,
    caps: &Caps,
    full: bool,
) -> Result<OrbitElement, SymalgError> {
    let total = m + n;
    if total > caps.orbit_ambient {
        return Err(SymalgError::TooLarge { size: total, cap: caps.orbit_ambient });
    }
    for k in [a, b] {
        if !k.fits_in(m, n) {
            return Err(SymalgError::DoesNotFit { key: k.to_string(), n: total });
        }
    }
    let a_members: Vec<Permutation> = if full {
        let mut v = Vec::new();
        for_each_permutation(total, |images| {
            let p = Permutation(images.to_vec());
            if orbit_of(&p, m, n).expect("sizes match") == *a {
                v.push(p);
            }
        });
        v
    } else {
        vec![orbit_representative(a, m, n)]
    };
    let mut counts: BTreeMap<OrbitKey, u64> = BTreeMap::new();
    let mut pair_count = 0u64;
    for_each_permutation(total, |images| {
        let p = Permutation(images.to_vec());
        if orbit_of(&p, m, n).expect("sizes match") != *b {
            return;
        }
        for lhs in &a_members {
            pair_count += 1;
            let prod = lhs.compose(&p);
            *counts.entry(orbit_of(&prod, m, n).expect("sizes match")).or_insert(0) += 1;
        }
    });
    let mut terms = BTreeMap::new();
    for (key, count) in counts {
        terms.insert(key, Rat::new(count as i64, pair_count as i64));
    }
    Ok(OrbitElement { m, n, terms })
}

/// Bilinear extension of [`orbit_product_basis`] to algebra elements.
pub fn orbit_product(
    a: &OrbitElement,
    b: &OrbitElement,
    caps: &Caps,
) -> Result<OrbitElement, SymalgError> {
    if (a.m, a.n) != (b.m, b.n) {
        return Err(SymalgError::AmbientMismatch {
            left: format!("({},{})", a.m, a.n),
            right: format!("({},{})", b.m, b.n),
        });
    }
    let mut out = OrbitElement { m: a.m, n: a.n, terms: BTreeMap::new() };
    for (ka, &ca) in &a.terms {
        for (kb, &cb) in &b.terms {
            let prod = orbit_product_basis(ka, kb, a.m, a.n, caps)?;
            out.add_scaled(&prod, ca * cb)?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Expectations
// ---------------------------------------------------------------------------

/// Expectation of a class element under `rho^(x)n` with spectrum `alpha`:
/// each class average contributes its power sum `p_kappa(alpha)`.
pub fn expect_class(x: &ClassElement, alpha: &Spectrum) -> f64 {
    x.terms
        .iter()
        .map(|(key, coeff)| {
            let p: f64 = key.partition().parts().iter().map(|&r| alpha.power_sum(r)).product();
            rat_f64(*coeff) * p
        })
        .sum()
}

/// Expectation of an orbit element under `rho^(x)m (x) sigma^(x)n`: each
/// cyclic label word contributes the trace of the corresponding product of
/// state matrices.
pub fn expect_orbit(
    x: &OrbitElement,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<f64, SymalgError> {
    if rho.dim() != sigma.dim() {
        return Err(SymalgError::from(StateError::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        }));
    }
    let mut acc = 0.0;
    for (key, coeff) in &x.terms {
        let mut val = 1.0;
        for word in key.words() {
            val *= word_trace(word, rho.matrix(), sigma.matrix());
        }
        acc += rat_f64(*coeff) * val;
    }
    Ok(acc)
}

fn word_trace(word: &[Label], r: &CMat, s: &CMat) -> f64 {
    let pick = |l: Label| match l {
        Label::R => r,
        Label::S => s,
    };
    if word.len() == 1 {
        return pick(word[0]).trace().re;
    }
    let mut acc = pick(word[0]).clone();
    for &l in &word[1..word.len() - 1] {
        acc = &acc * pick(l);
    }
    let t = trace_product(&acc, pick(word[word.len() - 1]));
    debug_assert!(t.im.abs() < 1e-9, "word traces of Hermitian states should be real");
    t.re
}

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

// ---------------------------------------------------------------------------
// Closed-form variances
// ---------------------------------------------------------------------------

fn binom2(n: u64) -> f64 {
    (n * (n - 1)) as f64 / 2.0
}

/// Exact variance of the averaged-transposition (purity) estimator on `n`
/// copies of a state with spectrum `alpha`.
pub fn var_purity(alpha: &Spectrum, n: u64) -> Result<f64, SymalgError> {
    if n < 2 {
        return Err(SymalgError::NTooSmall { n, min: 2 });
    }
    let p2 = alpha.power_sum(2);
    let p3 = alpha.power_sum(3);
    Ok(var_purity_from_power_sums(p2, p3, n))
}

fn var_purity_from_power_sums(p2: f64, p3: f64, n: u64) -> f64 {
    let b2 = binom2(n);
    (1.0 - p2 * p2) / b2 + 2.0 * (n as f64 - 2.0) / b2 * (p3 - p2 * p2)
}

/// Trace of a product of two states.
pub fn overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, SymalgError> {
    if rho.dim() != sigma.dim() {
        return Err(SymalgError::from(StateError::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        }));
    }
    Ok(trace_product(rho.matrix(), sigma.matrix()).re)
}

fn tr3(a: &CMat, b: &CMat, c: &CMat) -> f64 {
    let ab = a * b;
    trace_product(&ab, c).re
}

/// Exact variance of the overlap estimator `O_(rs)` on `m` copies of `rho`
/// and `n` copies of `sigma`.
pub fn var_linear_fidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    m: u64,
    n: u64,
) -> Result<f64, SymalgError> {
    if m < 1 || n < 1 {
        return Err(SymalgError::NTooSmall { n: m.min(n), min: 1 });
    }
    if rho.dim() != sigma.dim() {
        return Err(SymalgError::from(StateError::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        }));
    }
    let (mf, nf) = (m as f64, n as f64);
    let c = overlap(rho, sigma)?;
    let g = tr3(rho.matrix(), rho.matrix(), sigma.matrix());
    let h = tr3(rho.matrix(), sigma.matrix(), sigma.matrix());
    Ok(1.0 / (mf * nf)
        + (1.0 - mf - nf) / (mf * nf) * c * c
        + (1.0 / nf) * (1.0 - 1.0 / mf) * g
        + (1.0 / mf) * (1.0 - 1.0 / nf) * h)
}

/// The trace monomials entering the squared-Hilbert-Schmidt variance.
#[derive(Debug, Clone, Copy)]
struct HsMonomials {
    a: f64, // tr(rho^2)
    b: f64, // tr(sigma^2)
    c: f64, // tr(rho sigma)
    e: f64, // tr(rho^3)
    f: f64, // tr(sigma^3)
    g: f64, // tr(rho^2 sigma)
    h: f64, // tr(rho sigma^2)
}

fn hs_monomials(rho: &DensityMatrix, sigma: &DensityMatrix) -> HsMonomials {
    let (r, s) = (rho.matrix(), sigma.matrix());
    HsMonomials {
        a: trace_product(r, r).re,
        b: trace_product(s, s).re,
        c: trace_product(r, s).re,
        e: tr3(r, r, r),
        f: tr3(s, s, s),
        g: tr3(r, r, s),
        h: tr3(r, s, s),
    }
}

/// Exact variance of the squared-Hilbert-Schmidt estimator
/// `O_(rr) + O_(ss) - 2 O_(rs)` on `n` copies of each state, assembled from
/// the exact variances and covariances of the three orbit averages
/// (the cross term between `O_(rr)` and `O_(ss)` vanishes because they act
/// on disjoint tensor factors).
pub fn var_hs_exact(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: u64,
) -> Result<f64, SymalgError> {
    if n < 2 {
        return Err(SymalgError::NTooSmall { n, min: 2 });
    }
    if rho.dim() != sigma.dim() {
        return Err(SymalgError::from(StateError::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        }));
    }
    let t = hs_monomials(rho, sigma);
    let nf = n as f64;
    let var_rr = var_purity_from_power_sums(t.a, t.e, n);
    let var_ss = var_purity_from_power_sums(t.b, t.f, n);
    let var_rs = 1.0 / (nf * nf)
        + (1.0 - 2.0 * nf) / (nf * nf) * t.c * t.c
        + (1.0 / nf) * (1.0 - 1.0 / nf) * (t.g + t.h);
    let cov_rr_rs = 2.0 / nf * (t.g - t.a * t.c);
    let cov_ss_rs = 2.0 / nf * (t.h - t.b * t.c);
    Ok(var_rr + var_ss + 4.0 * var_rs - 4.0 * cov_rr_rs - 4.0 * cov_ss_rs)
}

/// Covariance of the two single-state purity averages across disjoint
/// blocks; identically zero, kept explicit for the oracle tests.
pub fn cov_purity_blocks() -> f64 {
    0.0
}

/// Second-order coefficient of the squared-Hilbert-Schmidt variance bound.
///
/// Collecting the exact variance by powers of `1/n` leaves a remainder
/// `R(n)` with `n^2 R(n)` multilinear in the trace monomials
/// `{a^2, b^2, c^2, e, f, g, h}`; maximizing over the unit box (worst case
/// `n = 2`, corners `a^2 = b^2 = c^2 = 1`, `e = f = g = h = 0`) gives 24.
/// See `hs_bound_second_order_coefficient` in the tests.
pub const HS_BOUND_K1: f64 = 24.0;

/// Envelope `K1/n^2 + (4/n) tr((rho + sigma) (rho - sigma)^2)` dominating
/// [`var_hs_exact`].
pub fn var_hs_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: u64,
) -> Result<f64, SymalgError> {
    if n < 2 {
        return Err(SymalgError::NTooSmall { n, min: 2 });
    }
    if rho.dim() != sigma.dim() {
        return Err(SymalgError::from(StateError::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        }));
    }
    let nf = n as f64;
    let delta = rho.matrix() - sigma.matrix();
    let sum = rho.matrix() + sigma.matrix();
    let d2 = &delta * &delta;
    let lead = trace_product(&sum, &d2).re;
    Ok(HS_BOUND_K1 / (nf * nf) + 4.0 / nf * lead)
}
