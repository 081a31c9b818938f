use std::fmt;

use serde::{Serialize, Serializer};

use super::partition::Partition;
use crate::error::{Error, Result};

/// A permutation of `{0, .., m-1}` stored by its images.
///
/// Products compose right to left: `(p * q)(x) = p(q(x))`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(m: usize) -> Perm {
        Perm((0..m).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Perm> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &i in &images {
            if i >= m || seen[i] {
                return Err(Error::argument(format!("not a permutation: {images:?}")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    /// Transposition of `a` and `b` in `S_m`.
    pub fn transposition(m: usize, a: usize, b: usize) -> Perm {
        let mut v: Vec<usize> = (0..m).collect();
        v.swap(a, b);
        Perm(v)
    }

    /// A permutation with the given cycle type, built from consecutive blocks.
    pub fn of_cycle_type(rho: &Partition) -> Perm {
        let m = rho.size();
        let mut v: Vec<usize> = (0..m).collect();
        let mut start = 0;
        for &len in rho.parts() {
            for i in 0..len {
                v[start + i] = start + (i + 1) % len;
            }
            start += len;
        }
        Perm(v)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut v = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            v[x] = i;
        }
        Perm(v)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let m = self.0.len();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for s in 0..m {
            if seen[s] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                cyc.push(x);
                x = self.0[x];
            }
            out.push(cyc);
        }
        out
    }

    pub fn num_cycles(&self) -> usize {
        let m = self.0.len();
        let mut seen = vec![false; m];
        let mut count = 0;
        for s in 0..m {
            if !seen[s] {
                count += 1;
                let mut x = s;
                while !seen[x] {
                    seen[x] = true;
                    x = self.0[x];
                }
            }
        }
        count
    }

    pub fn cycle_type(&self) -> Partition {
        Partition::from_unsorted(self.cycles().iter().map(|c| c.len()).collect())
    }

    /// Minimal number of transpositions whose product is `self`.
    pub fn length(&self) -> usize {
        self.degree() - self.num_cycles()
    }

    /// Lehmer-code rank in `0..m!`, consistent with [`all_perms`] order.
    pub fn rank(&self) -> usize {
        let m = self.0.len();
        let mut rank = 0;
        for i in 0..m {
            let smaller = self.0[i + 1..].iter().filter(|&&x| x < self.0[i]).count();
            rank = rank * (m - i) + smaller;
        }
        rank
    }

    /// Places `self` on `{0..a}` and `other` on `{a..a+b}`.
    pub fn direct_sum(&self, other: &Perm) -> Perm {
        let a = self.degree();
        Perm(self.0.iter().copied().chain(other.0.iter().map(|&x| x + a)).collect())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        for c in self.cycles().into_iter().filter(|c| c.len() > 1) {
            let s: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for Perm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// All permutations of degree `m` in lexicographic order of images, so that
/// `all_perms(m)[p.rank()] == p`.
pub fn all_perms(m: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    let mut used = vec![false; m];
    fn rec(m: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Perm>) {
        if current.len() == m {
            out.push(Perm(current.clone()));
            return;
        }
        for x in 0..m {
            if !used[x] {
                used[x] = true;
                current.push(x);
                rec(m, current, used, out);
                current.pop();
                used[x] = false;
            }
        }
    }
    rec(m, &mut current, &mut used, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_matches_enumeration() {
        for (i, p) in all_perms(4).iter().enumerate() {
            assert_eq!(p.rank(), i);
        }
    }

    #[test]
    fn composition_convention() {
        let a = Perm::transposition(3, 0, 1);
        let b = Perm::transposition(3, 1, 2);
        // (a*b)(2) = a(b(2)) = a(1) = 0
        assert_eq!(a.compose(&b).apply(2), 0);
        assert!(a.compose(&a).is_identity());
        let c = Perm::of_cycle_type(&Partition::new(vec![3, 2]).unwrap());
        assert_eq!(c.cycle_type().parts(), &[3, 2]);
        assert!(c.compose(&c.inverse()).is_identity());
        assert_eq!(c.length(), 3);
    }
}
