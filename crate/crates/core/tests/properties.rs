use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

use haarwords::bounds::markov_check;
use haarwords::freegroup::evaluate_word;
use haarwords::montecarlo::haar::haar_unitary;
use haarwords::montecarlo::tensor::CVec;
use haarwords::rng::substream;
use haarwords::rwalk::{return_probability, return_probability_convolution, spectral_radius, SpectralOptions};
use haarwords::symgroup::{char_table, lr_coeff, partitions_of, partitions_up_to, schur_dim_poly};
use haarwords::weingarten::z_element;
use haarwords::{ImplicitTensorOperator, Partition, WalkMeasure, Word};

fn word(max_len: usize) -> impl Strategy<Value = String> {
    proptest::string::string_regex(&format!("[abAB]{{0,{max_len}}}")).unwrap()
}

fn dim_at(lambda: &Partition, n: i64) -> BigRational {
    schur_dim_poly(lambda).eval(&BigRational::from_integer(n.into()))
}

fn random_unitaries(n: usize, count: usize, seed: u64) -> Vec<DMatrix<Complex64>> {
    let mut rng = substream(seed, "properties", 0);
    (0..count).map(|_| haar_unitary(n, &mut rng)).collect()
}

fn sup(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn word_evaluation_is_multiplicative(x in word(6), y in word(6), seed in any::<u64>()) {
        let (w, v) = (Word::parse(&x, 2).unwrap(), Word::parse(&y, 2).unwrap());
        let u = random_unitaries(3, 2, seed);
        let lhs = evaluate_word(&w.mul(&v), &u).unwrap();
        let rhs = evaluate_word(&w, &u).unwrap() * evaluate_word(&v, &u).unwrap();
        prop_assert!(sup(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn characters_are_orthonormal(k in 1usize..=6, i in 0usize..11, j in 0usize..11) {
        let t = char_table(k).unwrap();
        let (i, j) = (i % t.partitions.len(), j % t.partitions.len());
        let mut acc = BigRational::zero();
        for (col, z) in t.centralizers.iter().enumerate() {
            let prod = BigRational::from_integer((t.values[i][col] * t.values[j][col]).into());
            acc += prod / BigRational::from_integer(z.clone());
        }
        let expect = if i == j { 1 } else { 0 };
        prop_assert_eq!(acc, BigRational::from_integer(expect.into()));
    }

    #[test]
    fn lr_coefficients_multiply_dimensions(i in 0usize..64, j in 0usize..64) {
        let all = partitions_up_to(4).unwrap();
        let (lambda, mu) = (&all[i % all.len()], &all[j % all.len()]);
        prop_assume!(lambda.size() + mu.size() <= 4);
        let mut acc = BigRational::zero();
        for nu in partitions_of(lambda.size() + mu.size()).unwrap() {
            acc += BigRational::from_integer(lr_coeff(lambda, mu, &nu).into()) * dim_at(&nu, 5);
        }
        prop_assert_eq!(acc, dim_at(lambda, 5) * dim_at(mu, 5));
    }

    #[test]
    fn z_is_self_adjoint(i in 0usize..16, j in 0usize..16) {
        let all = partitions_up_to(2).unwrap();
        let (lambda, mu) = (&all[i % all.len()], &all[j % all.len()]);
        prop_assume!(lambda.size() + mu.size() >= 1);
        let z = z_element(lambda, mu).unwrap();
        for (p, c) in z.terms() {
            prop_assert_eq!(&z.coeff(&p.inverse()), c);
        }
    }

    #[test]
    fn pi0_is_a_representation(n in 2usize..=5, k in 0usize..=2, l in 0usize..=1, seed in any::<u64>()) {
        prop_assume!(k + l >= 1);
        let u = random_unitaries(n, 2, seed);
        let uv = ImplicitTensorOperator::pi0(k, l, &u[0] * &u[1]).unwrap();
        let pu = ImplicitTensorOperator::pi0(k, l, u[0].clone()).unwrap();
        let pv = ImplicitTensorOperator::pi0(k, l, u[1].clone()).unwrap();
        let mut rng = substream(seed, "vectors", 0);
        for _ in 0..5 {
            let x = CVec::from_fn(uv.dim(), |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let diff = uv.apply(&x) - pu.apply(&pv.apply(&x));
            prop_assert!(diff.camax() < 1e-10);
        }
    }

    #[test]
    fn markov_ratio_at_most_one(coeffs in prop::collection::vec(-1.0f64..1.0, 2..=11), k in 1usize..=3, a in -1.0f64..0.5, w in 0.1f64..2.0) {
        let d = coeffs.len() - 1;
        prop_assume!(k <= d);
        let r = markov_check(&coeffs, k, a, a + w, None).unwrap();
        prop_assert!(r.ratio <= 1.0 + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn radial_chain_matches_convolution(lazy in any::<bool>(), steps in 0usize..=10) {
        let mu = if lazy { WalkMeasure::lazy_uniform(2) } else { WalkMeasure::uniform_generators(2) }.unwrap();
        let radial = return_probability(&mu, steps).unwrap();
        prop_assert_eq!(radial.method, "radial");
        prop_assert_eq!(radial.exact, return_probability_convolution(&mu, steps).unwrap());
    }

    #[test]
    fn return_probabilities_are_supermultiplicative(m in 1usize..=10, m2 in 1usize..=10) {
        let mu = WalkMeasure::lazy_uniform(2).unwrap();
        let p = |s: usize| return_probability(&mu, s).unwrap().exact;
        prop_assert!(p(2 * (m + m2)) >= p(2 * m) * p(2 * m2));
    }
}

#[test]
fn return_probability_below_spectral_power() {
    for mu in [WalkMeasure::uniform_generators(2).unwrap(), WalkMeasure::lazy_uniform(3).unwrap()] {
        let b = spectral_radius(&mu, &SpectralOptions::default()).unwrap();
        for n in 1..=40 {
            let p = return_probability(&mu, n).unwrap().value;
            assert!(p <= b.upper.powi(n as i32) * (1.0 + 1e-12), "n = {n}: {p} vs {}", b.upper);
        }
    }
}
