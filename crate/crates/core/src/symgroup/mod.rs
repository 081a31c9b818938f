//! Partitions, symmetric-group characters, Littlewood–Richardson
//! coefficients and the Koike expansion of mixed characters.

mod basechange;
mod character;
mod koike;
mod lr;
mod partition;
mod perm;

pub use basechange::{powersum_schur_basechange, BaseChange};
pub use character::{char_table, character, CharTable};
pub use koike::{koike_coefficients, koike_expand, koike_validation_sweep, KoikeExpansion, KOIKE_CAP, KOIKE_TOLERANCE};
pub use lr::lr_coeff;
pub use partition::{factorial, partitions_of, partitions_of_with_cap, partitions_up_to, Partition, PARTITION_CAP};
pub use perm::{all_perms, Perm};

use crate::poly::{Poly, RationalFunction};
use num_bigint::BigInt;
use num_rational::BigRational;

/// `s_λ(1,…,1)` as a polynomial in `n`: `∏(n + c(□)) / ∏ h(□)`.
pub fn schur_dim_poly(lambda: &Partition) -> Poly {
    let mut num = Poly::one();
    for c in lambda.contents() {
        num = &num * &Poly::linear(c);
    }
    num.scale(&BigRational::new(BigInt::from(1), lambda.hook_product()))
}

/// [`schur_dim_poly`] as a rational function.
pub fn schur_dim_rational(lambda: &Partition) -> RationalFunction {
    RationalFunction::from_poly(schur_dim_poly(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::weyl::stable_dim;

    #[test]
    fn dim_poly_examples() {
        let p = |v: &[usize]| Partition::new(v.to_vec()).unwrap();
        assert_eq!(schur_dim_poly(&p(&[1])).display_in("n"), "n");
        let n = |x: i64| BigRational::from_integer(x.into());
        assert_eq!(schur_dim_poly(&p(&[2])).eval(&n(5)), n(15));
        assert_eq!(schur_dim_poly(&p(&[1, 1])).eval(&n(5)), n(10));
    }

    #[test]
    fn hook_content_matches_weyl() {
        for size in 0..=4 {
            for l in partitions_of(size).unwrap() {
                for n in l.length().max(1)..=6 {
                    let v = schur_dim_poly(&l).eval(&BigRational::from_integer(BigInt::from(n)));
                    let d = stable_dim(&l, &Partition::empty(), n).unwrap();
                    assert_eq!(v, BigRational::from_integer(d));
                }
            }
        }
    }
}
