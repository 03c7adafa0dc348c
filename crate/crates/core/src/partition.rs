//! Integer partitions: the index set for conjugacy classes, isotypic
//! subspaces, and measurement outcomes.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A partition: nonincreasing positive parts. The empty partition is the
/// partition of 0.
///
/// Serialized as a plain JSON array, e.g. `[3,1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Build from parts, validating shape.
    pub fn new(parts: Vec<u32>) -> Result<Self, String> {
        if parts.iter().any(|&p| p == 0) {
            return Err("partition parts must be positive".into());
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err("partition parts must be nonincreasing".into());
        }
        Ok(Partition(parts))
    }

    /// Build from arbitrary positive parts, sorting them.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Result<Self, String> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    /// Single-row partition `(n)`; empty when `n = 0`.
    pub fn row(n: u32) -> Self {
        if n == 0 {
            Partition(vec![])
        } else {
            Partition(vec![n])
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Sum of the parts.
    pub fn n(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Part `i` (0-based), zero beyond the length.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Multiplicity vector extended with 1-cycles to ambient size `n`.
    pub fn padded_to(&self, n: usize) -> Result<Partition, String> {
        let k = self.n();
        if k > n {
            return Err(format!("partition of {k} does not fit in ambient {n}"));
        }
        let mut parts = self.0.clone();
        parts.extend(std::iter::repeat(1).take(n - k));
        Ok(Partition(parts))
    }

    /// Drop all parts equal to 1.
    pub fn strip_ones(&self) -> Partition {
        Partition(self.0.iter().copied().filter(|&p| p > 1).collect())
    }

    /// Number of permutations in the ambient symmetric group `S_n` whose
    /// cycle type is this partition (which must be a partition of `n`).
    pub fn class_size(&self) -> u128 {
        let n = self.n();
        let mut denom: u128 = 1;
        // n! / (prod parts * prod mult!)
        let mut mult = std::collections::BTreeMap::new();
        for &p in &self.0 {
            denom *= p as u128;
            *mult.entry(p).or_insert(0u128) += 1;
        }
        for (_, m) in mult {
            denom *= factorial(m as usize);
        }
        factorial(n) / denom
    }

    /// Hook lengths of every cell, row by row.
    pub fn hooks(&self) -> Vec<u128> {
        let rows = self.0.len();
        let mut out = Vec::new();
        for (i, &len) in self.0.iter().enumerate() {
            for j in 0..len as usize {
                let arm = len as usize - j - 1;
                let leg = (i + 1..rows).filter(|&r| (self.0[r] as usize) > j).count();
                out.push((arm + leg + 1) as u128);
            }
        }
        out
    }

    /// Number of standard Young tableaux of this shape (hook length formula).
    pub fn syt_count(&self) -> u128 {
        let mut num = factorial(self.n());
        for h in self.hooks() {
            num /= h;
        }
        num
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Exact factorial (panics past u128 range; fine for the enumeration caps).
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All partitions of `n`, in the order produced by first-part descent.
pub fn partitions(n: usize) -> Vec<Partition> {
    partitions_bounded(n, n, usize::MAX)
}

/// All partitions of `n` with at most `max_len` parts, each at most `max_part`.
pub fn partitions_bounded(n: usize, max_part: usize, max_len: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        remaining: usize,
        max_part: usize,
        slots: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<Partition>,
    ) {
        if remaining == 0 {
            out.push(Partition(current.clone()));
            return;
        }
        if slots == 0 {
            return;
        }
        let hi = remaining.min(max_part);
        for p in (1..=hi).rev() {
            current.push(p as u32);
            rec(remaining - p, p, slots - 1, current, out);
            current.pop();
        }
    }
    rec(n, max_part, max_len, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_known_values() {
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(8).len(), 22);
        assert_eq!(partitions_bounded(5, 5, 2).len(), 3); // [5], [4,1], [3,2]
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert!(Partition::new(vec![3, 1]).is_ok());
    }

    #[test]
    fn class_sizes_in_s4() {
        // transpositions: 6, 3-cycles: 8, double transpositions: 3, 4-cycles: 6
        let n4 = |parts: Vec<u32>| Partition::new(parts).unwrap().class_size();
        assert_eq!(n4(vec![2, 1, 1]), 6);
        assert_eq!(n4(vec![3, 1]), 8);
        assert_eq!(n4(vec![2, 2]), 3);
        assert_eq!(n4(vec![4]), 6);
        assert_eq!(n4(vec![1, 1, 1, 1]), 1);
    }

    #[test]
    fn hook_lengths_and_syt() {
        let p = Partition::new(vec![3, 2]).unwrap();
        // hooks: 4 3 1 / 2 1
        let mut hooks = p.hooks();
        hooks.sort_unstable();
        assert_eq!(hooks, vec![1, 1, 2, 3, 4]);
        assert_eq!(p.syt_count(), 5);
        assert_eq!(Partition::new(vec![2, 2]).unwrap().syt_count(), 2);
        assert_eq!(Partition::row(6).syt_count(), 1);
    }

    #[test]
    fn serde_roundtrip_is_plain_array() {
        let p = Partition::new(vec![3, 1]).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[3,1]");
        let q: Partition = serde_json::from_str("[3,1]").unwrap();
        assert_eq!(p, q);
    }
}
