use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::character::char_table;
use super::partition::Partition;
use crate::error::Result;

/// Change of basis between Schur and power-sum symmetric functions of
/// degree `k`. Both bases are indexed by `partitions` (lex decreasing).
#[derive(Clone, Debug, Serialize)]
pub struct BaseChange {
    pub k: usize,
    pub partitions: Vec<Partition>,
    /// `schur_to_power[λ][ρ] = χ_λ(ρ)/z_ρ`, so `s_λ = Σ_ρ schur_to_power[λ][ρ] p_ρ`.
    #[serde(serialize_with = "ser_matrix")]
    pub schur_to_power: Vec<Vec<BigRational>>,
    /// `power_to_schur[ρ][λ] = χ_λ(ρ)`, so `p_ρ = Σ_λ power_to_schur[ρ][λ] s_λ`.
    pub power_to_schur: Vec<Vec<i64>>,
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    m.iter()
        .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .serialize(s)
}

pub fn powersum_schur_basechange(k: usize) -> Result<BaseChange> {
    let t = char_table(k)?;
    let m = t.partitions.len();
    let schur_to_power = (0..m)
        .map(|l| {
            (0..m)
                .map(|r| BigRational::new(BigInt::from(t.values[l][r]), t.centralizers[r].clone()))
                .collect()
        })
        .collect();
    let power_to_schur = (0..m).map(|r| (0..m).map(|l| t.values[l][r]).collect()).collect();
    Ok(BaseChange { k, partitions: t.partitions.clone(), schur_to_power, power_to_schur })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn degree_two() {
        let b = powersum_schur_basechange(2).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        // s_(2) = p_(2)/2 + p_(1,1)/2
        assert_eq!(b.schur_to_power[0], vec![half.clone(), half.clone()]);
        // p_(2) = s_(2) - s_(1,1)
        assert_eq!(b.power_to_schur[0], vec![1, -1]);
        let b1 = powersum_schur_basechange(1).unwrap();
        assert_eq!(b1.power_to_schur, vec![vec![1]]);
    }

    #[test]
    fn mutually_inverse() {
        for k in 0..=6 {
            let b = powersum_schur_basechange(k).unwrap();
            let m = b.partitions.len();
            for l in 0..m {
                for l2 in 0..m {
                    let mut s = BigRational::zero();
                    for r in 0..m {
                        s += &b.schur_to_power[l][r] * BigRational::from_integer(b.power_to_schur[r][l2].into());
                    }
                    let e = if l == l2 { BigRational::one() } else { BigRational::zero() };
                    assert_eq!(s, e);
                }
            }
        }
    }
}
