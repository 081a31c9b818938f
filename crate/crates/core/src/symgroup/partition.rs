use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `k` for [`partitions_of`].
pub const PARTITION_CAP: usize = 20;

/// A weakly decreasing sequence of positive integers.
///
/// Serialized as a JSON array of parts. Ordering is lexicographic on the
/// parts; enumeration functions return partitions in decreasing order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::argument(format!("partition parts must be positive: {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::argument(format!("partition parts must be weakly decreasing: {parts:?}")));
        }
        Ok(Partition(parts))
    }

    /// Sorts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Parses `"2,1"` or `"2 1"`; the empty string is the empty partition.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.is_empty() || t == "0" || t == "[]" {
            return Ok(Partition::empty());
        }
        let t = t.trim_start_matches('[').trim_end_matches(']');
        let parts = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse { offset: 0, message: format!("bad partition part {s:?}") })
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts.into_iter().filter(|&p| p > 0).collect())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of parts.
    pub fn length(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.part(0);
        Partition((0..width).map(|j| self.0.iter().filter(|&&p| p > j).count()).collect())
    }

    /// Boxes `(row, col)`, zero-based, row by row.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &p)| (0..p).map(move |j| (i, j)))
    }

    /// Content `col - row` of every box.
    pub fn contents(&self) -> Vec<i64> {
        self.boxes().map(|(i, j)| j as i64 - i as i64).collect()
    }

    pub fn hook_lengths(&self) -> Vec<usize> {
        let conj = self.conjugate();
        self.boxes().map(|(i, j)| (self.0[i] - j) + (conj.0[j] - i) - 1).collect()
    }

    pub fn hook_product(&self) -> BigInt {
        self.hook_lengths().into_iter().fold(BigInt::one(), |acc, h| acc * h)
    }

    /// Dimension of the irreducible `S_k` representation (hook length formula).
    pub fn dimension(&self) -> BigInt {
        factorial(self.size()) / self.hook_product()
    }

    /// `z_ρ = prod_i i^{m_i} m_i!` for this partition read as a cycle type.
    pub fn centralizer_size(&self) -> BigInt {
        let mut out = BigInt::one();
        let mut i = 0;
        while i < self.0.len() {
            let part = self.0[i];
            let mult = self.0[i..].iter().take_while(|&&p| p == part).count();
            for m in 1..=mult {
                out *= part * m;
            }
            i += mult;
        }
        out
    }

    pub fn contains(&self, other: &Partition) -> bool {
        other.length() <= self.length() && other.0.iter().enumerate().all(|(i, &p)| p <= self.0[i])
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Partition::new(v)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition{self}")
    }
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// All partitions of `k` in lexicographically decreasing order.
pub fn partitions_of(k: usize) -> Result<Vec<Partition>> {
    partitions_of_with_cap(k, PARTITION_CAP)
}

pub fn partitions_of_with_cap(k: usize, cap: usize) -> Result<Vec<Partition>> {
    if k > cap {
        return Err(Error::resource(format!("partitions of {k} exceed enumeration cap {cap}")));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(k, k, &mut current, &mut out);
    Ok(out)
}

fn fill(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    for part in (1..=remaining.min(max_part)).rev() {
        current.push(part);
        fill(remaining - part, part, current, out);
        current.pop();
    }
}

/// All partitions of size `<= k`, grouped by size.
pub fn partitions_up_to(k: usize) -> Result<Vec<Partition>> {
    let mut out = Vec::new();
    for s in 0..=k {
        out.extend(partitions_of(s)?);
    }
    Ok(out)
}
