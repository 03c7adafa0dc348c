//! Symmetric-group character tables by the border-strip recursion, in
//! exact integer arithmetic. Projector weights amplify character errors by
//! `n!`, so floats are not an option here.

use crate::partition::{partitions, Partition};
use std::collections::BTreeMap;

/// Full character table of `S_n`: value at `(irrep shape, class cycle type)`.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    n: usize,
    values: BTreeMap<(Partition, Partition), i64>,
}

impl CharacterTable {
    /// Compute the table for `S_n`.
    pub fn new(n: usize) -> Self {
        let parts = partitions(n);
        let mut values = BTreeMap::new();
        for lambda in &parts {
            for kappa in &parts {
                values.insert(
                    (lambda.clone(), kappa.clone()),
                    character(lambda, kappa.parts()),
                );
            }
        }
        CharacterTable { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Character value; the arguments must both be partitions of `n`.
    pub fn value(&self, lambda: &Partition, kappa: &Partition) -> i64 {
        *self
            .values
            .get(&(lambda.clone(), kappa.clone()))
            .unwrap_or_else(|| panic!("({lambda}, {kappa}) not in the S_{} table", self.n))
    }

    /// Dimension of the irrep: the character at the identity class.
    pub fn dim(&self, lambda: &Partition) -> i64 {
        self.value(lambda, &Partition::new(vec![1; self.n]).expect("identity class"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Partition, Partition), &i64)> {
        self.values.iter()
    }
}

/// Character of the irrep `lambda` at a permutation whose cycle lengths are
/// `kappa` (in any order; remaining points are fixed). Border-strip
/// recursion over beta-numbers.
pub fn character(lambda: &Partition, kappa: &[u32]) -> i64 {
    let n = lambda.n();
    let k: usize = kappa.iter().map(|&c| c as usize).sum();
    assert!(k <= n, "class moves more points than the irrep size");
    // Pad with fixed points and recurse largest-first for fewer branches.
    let mut cycles: Vec<u32> = kappa.to_vec();
    cycles.extend(std::iter::repeat(1).take(n - k));
    cycles.sort_unstable_by(|a, b| b.cmp(a));
    strip_rec(&beta_set(lambda), &cycles)
}

fn beta_set(lambda: &Partition) -> Vec<u64> {
    let l = lambda.len();
    (0..l).map(|i| lambda.part(i) as u64 + (l - 1 - i) as u64).collect()
}

fn strip_rec(betas: &[u64], cycles: &[u32]) -> i64 {
    let Some((&r, rest)) = cycles.split_first() else {
        return 1;
    };
    let r = r as u64;
    let mut total = 0i64;
    for (i, &b) in betas.iter().enumerate() {
        if b < r {
            continue;
        }
        let target = b - r;
        if betas.contains(&target) {
            continue;
        }
        // Height of the strip: beta entries strictly between target and b.
        let height = betas.iter().filter(|&&x| x > target && x < b).count();
        let sign = if height % 2 == 0 { 1 } else { -1 };
        let mut next: Vec<u64> = betas.to_vec();
        next[i] = target;
        total += sign * strip_rec(&next, rest);
    }
    total
}
