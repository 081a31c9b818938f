use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use serde::Serialize;

use super::partition::{factorial, partitions_of, Partition};
use crate::error::{Error, Result};

/// `χ_λ(ρ)` by the Murnaghan–Nakayama rule, on beta-sets.
pub fn character(lambda: &Partition, rho: &Partition) -> Result<i64> {
    if lambda.size() != rho.size() {
        return Err(Error::argument(format!(
            "character size mismatch: |λ| = {} but |ρ| = {}",
            lambda.size(),
            rho.size()
        )));
    }
    let p = lambda.length();
    let beta: Vec<usize> = lambda.parts().iter().enumerate().map(|(i, &l)| l + (p - 1 - i)).collect();
    let mut memo = HashMap::new();
    Ok(mn(beta, rho.parts(), &mut memo))
}

// beta is kept sorted decreasing; rim hooks of length r correspond to moves
// b -> b - r onto an unoccupied position.
fn mn(beta: Vec<usize>, rho: &[usize], memo: &mut HashMap<(Vec<usize>, usize), i64>) -> i64 {
    let Some((&r, rest)) = rho.split_first() else {
        return 1;
    };
    let key = (beta.clone(), rho.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut total = 0;
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let target = b - r;
        let between = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut next = beta.clone();
        next[idx] = target;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let sign = if between % 2 == 0 { 1 } else { -1 };
        total += sign * mn(next, rest, memo);
    }
    memo.insert(key, total);
    total
}

/// Character table of `S_k`: rows are irreducibles `λ`, columns cycle types
/// `ρ`, both in lexicographically decreasing order.
#[derive(Clone, Debug, Serialize)]
pub struct CharTable {
    pub k: usize,
    pub partitions: Vec<Partition>,
    /// `values[λ][ρ]`.
    pub values: Vec<Vec<i64>>,
    /// `z_ρ` per column.
    #[serde(serialize_with = "ser_bigints")]
    pub centralizers: Vec<BigInt>,
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
}

impl CharTable {
    pub fn build(k: usize) -> Result<CharTable> {
        let partitions = partitions_of(k)?;
        let values = partitions
            .iter()
            .map(|l| partitions.iter().map(|r| character(l, r)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let centralizers = partitions.iter().map(|r| r.centralizer_size()).collect();
        Ok(CharTable { k, partitions, values, centralizers })
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.partitions.iter().position(|q| q == p)
    }

    pub fn value(&self, lambda: &Partition, rho: &Partition) -> Option<i64> {
        Some(self.values[self.index_of(lambda)?][self.index_of(rho)?])
    }

    /// Number of permutations with cycle type `ρ` (column index).
    pub fn class_size(&self, col: usize) -> BigInt {
        factorial(self.k) / &self.centralizers[col]
    }

    /// CSV with a header row of cycle types and one row per irreducible.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda");
        for r in &self.partitions {
            s.push_str(&format!(",\"{r}\""));
        }
        s.push('\n');
        for (i, l) in self.partitions.iter().enumerate() {
            s.push_str(&format!("\"{l}\""));
            for v in &self.values[i] {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

type TableCache = RwLock<HashMap<usize, Arc<CharTable>>>;

/// Shared, lazily built character table of `S_k`.
pub fn char_table(k: usize) -> Result<Arc<CharTable>> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().unwrap().get(&k) {
        return Ok(t.clone());
    }
    let table = Arc::new(CharTable::build(k)?);
    cache.write().unwrap().entry(k).or_insert_with(|| table.clone());
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    /// Frobenius formula oracle: χ_λ(ρ) is the coefficient of x^{λ+δ} in
    /// a_δ(x) p_ρ(x), computed by multivariate expansion.
    fn frobenius(lambda: &Partition, rho: &Partition) -> i64 {
        let k = lambda.size().max(1);
        type Mono = Vec<usize>;
        let mut poly: HashMap<Mono, i64> = HashMap::new();
        // a_δ = sum_{σ} sgn(σ) x^{σ(δ)}
        for perm in crate::symgroup::perm::all_perms(k) {
            let mono: Mono = (0..k).map(|i| k - 1 - perm.apply(i)).collect();
            let sign = if perm.length() % 2 == 0 { 1 } else { -1 };
            *poly.entry(mono).or_default() += sign;
        }
        for &r in rho.parts() {
            let mut next: HashMap<Mono, i64> = HashMap::new();
            for (m, c) in &poly {
                for var in 0..k {
                    let mut m2 = m.clone();
                    m2[var] += r;
                    *next.entry(m2).or_default() += c;
                }
            }
            poly = next;
        }
        let target: Mono = (0..k).map(|i| lambda.part(i) + (k - 1 - i)).collect();
        poly.get(&target).copied().unwrap_or(0)
    }

    #[test]
    fn examples() {
        assert_eq!(character(&p(&[4]), &p(&[2, 1, 1])).unwrap(), 1);
        assert_eq!(character(&p(&[2, 1]), &p(&[1, 1, 1])).unwrap(), 2);
        assert_eq!(character(&p(&[2, 1]), &p(&[3])).unwrap(), -1);
        assert!(character(&p(&[2, 1]), &p(&[2])).is_err());
    }

    #[test]
    fn agrees_with_frobenius_oracle() {
        for k in 1..=5 {
            let ps = partitions_of(k).unwrap();
            for l in &ps {
                for r in &ps {
                    assert_eq!(character(l, r).unwrap(), frobenius(l, r), "λ={l} ρ={r}");
                }
            }
        }
    }

    #[test]
    fn dimension_is_hook_length() {
        for k in 1..=8 {
            let ones = Partition::new(vec![1; k]).unwrap();
            for l in partitions_of(k).unwrap() {
                assert_eq!(BigInt::from(character(&l, &ones).unwrap()), l.dimension());
            }
        }
    }

    #[test]
    fn orthogonality() {
        for k in 1..=6 {
            let t = char_table(k).unwrap();
            let m = t.partitions.len();
            for a in 0..m {
                for b in 0..m {
                    let mut s = BigRational::zero();
                    for c in 0..m {
                        s += BigRational::new(
                            BigInt::from(t.values[a][c] * t.values[b][c]),
                            t.centralizers[c].clone(),
                        );
                    }
                    let expect = if a == b { BigRational::one() } else { BigRational::zero() };
                    assert_eq!(s, expect);
                }
            }
        }
    }

    #[test]
    fn csv_export() {
        let csv = char_table(2).unwrap().to_csv();
        assert_eq!(csv, "lambda,\"(2)\",\"(1,1)\"\n\"(2)\",1,1\n\"(1,1)\",-1,1\n");
    }
}
