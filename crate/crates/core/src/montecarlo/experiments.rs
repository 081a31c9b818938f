//! Sampling experiments: Monte Carlo character expectations, operator norms
//! of word polynomials in tensor representations, and norm concentration.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::haar::{eigenvalues, Group, UnitaryTuple};
use super::norm::{estimate_norm, NormOptions};
use super::projector::invariant_projector;
use super::tensor::ImplicitTensorOperator;
use super::weyl::weyl_character_eval;
use crate::error::{Error, Result};
use crate::freegroup::{ball_size, evaluate_word_unitary, Letter, Word};
use crate::rwalk::{compression_norm, COMPRESSION_BALL_CAP};
use crate::poly::rat_to_f64;
use crate::symgroup::Partition;
use crate::wordint::{exact_word_moment, Dimension, TraceMonomial};

/// Real linear combination of words, e.g. `2*ab - 0.5*BA + a`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WordPoly {
    pub rank: usize,
    pub terms: Vec<(f64, Word)>,
}

impl WordPoly {
    pub fn new(rank: usize, terms: Vec<(f64, Word)>) -> Result<WordPoly> {
        let terms = terms.into_iter().map(|(c, w)| Ok((c, w.with_rank(rank)?))).collect::<Result<_>>()?;
        Ok(WordPoly { rank, terms })
    }

    /// `Σ_i (x_i + x_i⁻¹)`.
    pub fn kesten(rank: usize) -> Result<WordPoly> {
        let mut terms = Vec::new();
        for g in 0..rank {
            for inv in [false, true] {
                terms.push((1.0, Word::from_letters(rank, [Letter::new(g, inv)])?));
            }
        }
        WordPoly::new(rank, terms)
    }

    /// Parses `c*word ± c*word …`; a bare word has coefficient 1 and `e`
    /// or `1` stands for the identity.
    pub fn parse(text: &str, rank: usize) -> Result<WordPoly> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse { offset: 0, message: "empty polynomial".into() });
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes: Vec<char> = compact.chars().collect();
        let mut pieces = Vec::new();
        for i in 1..=bytes.len() {
            let split = i == bytes.len()
                || ((bytes[i] == '+' || bytes[i] == '-')
                    && !(matches!(bytes[i - 1], 'e' | 'E') && i >= 2 && (bytes[i - 2].is_ascii_digit() || bytes[i - 2] == '.')));
            if split {
                pieces.push((start, bytes[start..i].iter().collect::<String>()));
                start = i;
            }
        }
        for (offset, piece) in pieces {
            let (sign, body) = match piece.chars().next() {
                Some('-') => (-1.0, &piece[1..]),
                Some('+') => (1.0, &piece[1..]),
                _ => (1.0, &piece[..]),
            };
            let (coeff, word) = match body.split_once('*') {
                Some((c, w)) => {
                    let c: f64 = c.parse().map_err(|_| Error::Parse { offset, message: format!("bad coefficient `{c}`") })?;
                    (c, w)
                }
                None if body.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.') && body != "1" => {
                    let c: f64 = body.parse().map_err(|_| Error::Parse { offset, message: format!("bad term `{body}`") })?;
                    (c, "e")
                }
                None => (1.0, body),
            };
            let w = if word == "e" || word == "1" { Word::identity(rank) } else { Word::parse(word, rank)? };
            terms.push((sign * coeff, w));
        }
        WordPoly::new(rank, terms)
    }

    /// Lipschitz constant `C(x) = Σ_w |x(w)|·|w|`.
    pub fn lipschitz(&self) -> f64 {
        self.terms.iter().map(|(c, w)| c.abs() * w.len() as f64).sum()
    }

    /// `c·Σ_i (x_i + x_i⁻¹)` returns `Some(c)`.
    pub fn kesten_coefficient(&self) -> Option<f64> {
        let c = self.terms.first()?.0;
        let mut seen = vec![[false; 2]; self.rank];
        for (d, w) in &self.terms {
            if *d != c || w.len() != 1 {
                return None;
            }
            let l = w.letters()[0];
            let slot = &mut seen[l.generator][usize::from(l.inverse)];
            if *slot {
                return None;
            }
            *slot = true;
        }
        seen.iter().all(|s| s[0] && s[1]).then_some(c)
    }

    pub fn complex_terms(&self) -> Vec<(Complex64, Word)> {
        self.terms.iter().map(|(c, w)| (Complex64::new(*c, 0.0), w.clone())).collect()
    }
}

impl fmt::Display for WordPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, w)) in self.terms.iter().enumerate() {
            let word = if w.is_identity() { "e".to_string() } else { w.to_string() };
            match (i, *c < 0.0) {
                (0, false) => write!(f, "{c}*{word}")?,
                (0, true) => write!(f, "-{}*{word}", -c)?,
                (_, false) => write!(f, " + {c}*{word}")?,
                (_, true) => write!(f, " - {}*{word}", -c)?,
            }
        }
        Ok(())
    }
}

/// Monte Carlo mean of a character with its standard error.
#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub mean_re: f64,
    pub mean_im: f64,
    /// Standard error of the real part.
    pub std_error: f64,
    pub std_error_im: f64,
    pub samples: usize,
    pub n: usize,
    pub group: Group,
    pub seed: u64,
}

impl McEstimate {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.mean_re, self.mean_im)
    }

    /// True when `|Re − target| ≤ k·SE` (with a floor for zero-variance cases).
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean_re - target).abs() <= k * self.std_error + 1e-9 && self.mean_im.abs() <= k * self.std_error_im + 1e-9
    }
}

/// Estimates `∫ s_{λ,μ}(w(U₁,…,U_r)) dU` over Haar-random tuples of the
/// given group.
pub fn mc_expect(
    lambda: &Partition,
    mu: &Partition,
    w: &Word,
    n: usize,
    samples: usize,
    group: Group,
    seed: u64,
) -> Result<McEstimate> {
    if n < lambda.length() + mu.length() {
        return Err(Error::argument(format!("n = {n} is below ℓ(λ)+ℓ(μ)")));
    }
    if samples < 2 {
        return Err(Error::argument("need at least two samples"));
    }
    let r = w.rank().max(1);
    let values: Vec<Complex64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let tuple = UnitaryTuple::sample(r, n, group, seed, i)?;
            let g = evaluate_word_unitary(w, &tuple.matrices)?;
            weyl_character_eval(lambda, mu, &eigenvalues(&g))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&values, n, group, seed))
}

/// Estimates `E ∏ tr(w_j(U))` for a trace monomial.
pub fn mc_moment(m: &TraceMonomial, n: usize, samples: usize, group: Group, seed: u64) -> Result<McEstimate> {
    if samples < 2 || n == 0 {
        return Err(Error::argument("need n >= 1 and at least two samples"));
    }
    let r = m.rank();
    let values: Vec<Complex64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let tuple = UnitaryTuple::sample(r, n, group, seed, i)?;
            let mut prod = Complex64::new(1.0, 0.0);
            for (w, conj) in &m.factors {
                let w = w.with_rank(r)?;
                let w = if *conj { w.inverse() } else { w };
                prod *= evaluate_word_unitary(&w, &tuple.matrices)?.trace();
            }
            Ok(prod)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&values, n, group, seed))
}

fn summarize(values: &[Complex64], n: usize, group: Group, seed: u64) -> McEstimate {
    let m = values.len() as f64;
    let mean: Complex64 = values.iter().sum::<Complex64>() / m;
    let var_re = values.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (m - 1.0);
    let var_im = values.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() / (m - 1.0);
    McEstimate {
        mean_re: mean.re,
        mean_im: mean.im,
        std_error: (var_re / m).sqrt(),
        std_error_im: (var_im / m).sqrt(),
        samples: values.len(),
        n,
        group,
        seed,
    }
}

/// Fixed trace monomials and dimensions for the exact-versus-sampled check.
pub const ORACLE_SUITE: [(&str, usize); 10] = [
    ("a A", 3),
    ("abAB", 4),
    ("a a A A", 4),
    ("aa AA", 3),
    ("ab BA", 5),
    ("aabb BBAA", 4),
    ("abAB baBA", 3),
    ("a b AB", 5),
    ("aa A A", 4),
    ("a b", 3),
];

#[derive(Clone, Debug, Serialize)]
pub struct OracleCase {
    pub monomial: String,
    pub n: usize,
    pub exact: String,
    pub estimate: McEstimate,
    /// `|Re − exact|` in standard errors.
    pub z_score: f64,
    pub passed: bool,
}

/// Compares exact moments with Monte Carlo estimates on [`ORACLE_SUITE`].
pub fn oracle_suite(samples: usize, seed: u64) -> Result<Vec<OracleCase>> {
    ORACLE_SUITE
        .iter()
        .enumerate()
        .map(|(i, (text, n))| {
            let m = TraceMonomial::parse(text, 2)?;
            let exact = exact_word_moment(&m, Dimension::Numeric(*n))?;
            let value = exact.value.as_numeric().cloned().unwrap_or_default();
            let estimate = mc_moment(&m, *n, samples, Group::Unitary, crate::rng::mix(seed, "oracle", i as u64))?;
            let target = rat_to_f64(&value);
            let z_score = (estimate.mean_re - target).abs() / estimate.std_error.max(1e-300);
            let passed = estimate.within(target, 4.0);
            Ok(OracleCase { monomial: m.to_string(), n: *n, exact: value.to_string(), estimate, z_score, passed })
        })
        .collect()
}

/// `Σ c·π⁰_{k,ℓ}(w(U))`, with the invariant vectors projected out when
/// `k = ℓ ≥ 1`.
pub fn word_poly_operator(x: &WordPoly, tuple: &UnitaryTuple, k: usize, l: usize) -> Result<ImplicitTensorOperator> {
    let n = tuple.n;
    let mut ops = Vec::with_capacity(x.terms.len());
    for (c, w) in &x.terms {
        let m = evaluate_word_unitary(w, &tuple.matrices)?;
        ops.push(ImplicitTensorOperator::pi0(k, l, m)?.scaled(Complex64::new(*c, 0.0)));
    }
    let h = if ops.is_empty() { ImplicitTensorOperator::zero(n, k, l)? } else { ImplicitTensorOperator::sum(&ops) };
    if k == l && k > 0 {
        let p = invariant_projector(k, l, n)?;
        let id = ImplicitTensorOperator::identity(n, k, l)?;
        let complement = id.plus(&p.scaled(Complex64::new(-1.0, 0.0)));
        Ok(h.then_after(&complement))
    } else {
        Ok(h)
    }
}

#[derive(Clone, Debug)]
pub struct StrongConvConfig {
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub poly: WordPoly,
    pub samples: usize,
    pub seed: u64,
    /// Known value of `‖λ(x)‖` in the reduced group C*-algebra.
    pub reference: Option<f64>,
    pub norm: NormOptions,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongConvReport {
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub poly: String,
    pub norm_estimates: Vec<f64>,
    pub norm_estimate: f64,
    pub reference: f64,
    pub reference_source: &'static str,
    pub deviation: f64,
    pub seed: u64,
}

/// Reference norm: supplied, Kesten's `2c√(2r−1)`, or a ball compression.
pub fn reference_norm(x: &WordPoly) -> Result<(f64, &'static str)> {
    if let Some(c) = x.kesten_coefficient() {
        return Ok((2.0 * c.abs() * (2.0 * x.rank as f64 - 1.0).sqrt(), "kesten"));
    }
    let mut radius = 1;
    while ball_size(radius + 1, x.rank) <= (COMPRESSION_BALL_CAP / 4) as u128 {
        radius += 1;
    }
    Ok((compression_norm(&x.complex_terms(), x.rank, radius)?, "compression-lower-bound"))
}

/// Samples `samples` tuples, estimates `‖Σ c·π_{k,ℓ}(w(U))‖` for each and
/// compares the mean with the reduced C*-norm.
pub fn strong_convergence_experiment(cfg: &StrongConvConfig) -> Result<StrongConvReport> {
    if cfg.poly.rank > cfg.r {
        return Err(Error::argument(format!("polynomial uses rank {} but r = {}", cfg.poly.rank, cfg.r)));
    }
    let poly = WordPoly::new(cfg.r, cfg.poly.terms.clone())?;
    let (reference, reference_source) = match cfg.reference {
        Some(v) => (v, "supplied"),
        None if cfg.k == 0 && cfg.l == 0 => (poly.terms.iter().map(|t| t.0).sum::<f64>().abs(), "scalar"),
        None => reference_norm(&poly)?,
    };
    let mut norm_estimates = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples as u64 {
        let tuple = UnitaryTuple::sample(cfg.r, cfg.n, Group::Unitary, cfg.seed, i)?;
        let h = word_poly_operator(&poly, &tuple, cfg.k, cfg.l)?;
        let opts = NormOptions { seed: crate::rng::mix(cfg.seed, "norm", i), ..cfg.norm.clone() };
        norm_estimates.push(estimate_norm(&h, &opts)?.estimate);
    }
    let norm_estimate = norm_estimates.iter().sum::<f64>() / norm_estimates.len().max(1) as f64;
    Ok(StrongConvReport {
        r: cfg.r,
        n: cfg.n,
        k: cfg.k,
        l: cfg.l,
        poly: poly.to_string(),
        norm_estimates,
        norm_estimate,
        reference,
        reference_source,
        deviation: (norm_estimate - reference).abs(),
        seed: cfg.seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// `C(x)K/√(n−2)`.
    pub scale: f64,
    pub exceed_fraction: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub k: usize,
    pub l: usize,
    pub lipschitz: f64,
    pub rows: Vec<ConcentrationRow>,
    pub monotone: bool,
    pub seed: u64,
}

/// Spread of `‖π_{k,ℓ}(x(U))‖` across independent samples for each `n`.
pub fn concentration_probe(
    x: &WordPoly,
    k: usize,
    l: usize,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if trials < 2 {
        return Err(Error::argument("need at least two trials"));
    }
    let big_k = (k + l) as f64;
    let lipschitz = x.lipschitz();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n < 3 {
            return Err(Error::argument("concentration scale needs n >= 3"));
        }
        let norms: Vec<f64> = (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let tuple = UnitaryTuple::sample(x.rank, n, Group::Unitary, seed ^ n as u64, i)?;
                let h = word_poly_operator(x, &tuple, k, l)?;
                let opts = NormOptions {
                    seed: crate::rng::mix(seed, "concentration", i),
                    method: super::norm::NormMethod::Lanczos,
                    max_iter: 400,
                    ..NormOptions::default()
                };
                Ok(estimate_norm(&h, &opts)?.estimate)
            })
            .collect::<Result<_>>()?;
        let t = trials as f64;
        let mean = norms.iter().sum::<f64>() / t;
        let std = (norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0)).sqrt();
        let scale = lipschitz * big_k / ((n - 2) as f64).sqrt();
        let exceed = norms.iter().filter(|v| (*v - mean).abs() > 10.0 * scale).count() as f64 / t;
        rows.push(ConcentrationRow { n, mean, std, scale, exceed_fraction: exceed, flagged: exceed > 0.05 });
    }
    let monotone = rows.windows(2).all(|p| p[0].n >= p[1].n || p[1].std <= p[0].std);
    Ok(ConcentrationReport { k, l, lipschitz, rows, monotone, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        Partition::parse(s).unwrap()
    }

    #[test]
    fn parse_word_polynomials() {
        let x = WordPoly::parse("2*ab - 0.5*BA + a", 2).unwrap();
        assert_eq!(x.terms.len(), 3);
        assert_eq!(x.terms[1].0, -0.5);
        assert_eq!(x.terms[1].1, Word::parse("BA", 2).unwrap());
        assert!((x.lipschitz() - 6.0).abs() < 1e-12);
        let y = WordPoly::parse("1e-1*a + 3 - b", 2).unwrap();
        assert_eq!(y.terms[0].0, 0.1);
        assert!(y.terms[1].1.is_identity() && y.terms[1].0 == 3.0);
        assert_eq!(y.terms[2].0, -1.0);
        assert_eq!(WordPoly::parse("a+A+b+B", 2).unwrap().kesten_coefficient(), Some(1.0));
        assert_eq!(WordPoly::parse("a+A+b", 2).unwrap().kesten_coefficient(), None);
        assert!(WordPoly::parse("x*a", 2).is_err());
        assert!(WordPoly::parse("", 2).is_err());
        let z = WordPoly::parse(&x.to_string(), 2).unwrap();
        assert_eq!(z, x);
    }

    #[test]
    fn mc_expect_examples() {
        let e = mc_expect(&p("1"), &p(""), &Word::parse("abAB", 2).unwrap(), 5, 20_000, Group::Unitary, 3).unwrap();
        assert!(e.within(0.2, 4.0), "{e:?}");
        let e = mc_expect(&p("1"), &p("1"), &Word::parse("a", 1).unwrap(), 6, 20_000, Group::Unitary, 4).unwrap();
        assert!(e.within(0.0, 4.0), "{e:?}");
        let e = mc_expect(&p("2"), &p(""), &Word::parse("aab", 2).unwrap(), 4, 20_000, Group::Unitary, 5).unwrap();
        assert!(e.within(0.0, 4.0), "{e:?}");
        assert!(mc_expect(&p("1,1"), &p("1"), &Word::parse("a", 1).unwrap(), 2, 10, Group::Unitary, 0).is_err());
    }

    #[test]
    fn special_unitary_discrepancy() {
        // s_{(1,1)}(g) = det g on U(2); the word x₁ has exponent sum 1.
        let w = Word::parse("a", 1).unwrap();
        let su = mc_expect(&p("1,1"), &p(""), &w, 2, 2000, Group::SpecialUnitary, 9).unwrap();
        assert!((su.mean_re - 1.0).abs() < 1e-9 && su.mean_im.abs() < 1e-9);
        let u = mc_expect(&p("1,1"), &p(""), &w, 2, 20_000, Group::Unitary, 9).unwrap();
        assert!(u.within(0.0, 4.0), "{u:?}");
    }

    #[test]
    fn exact_and_sampled_moments_agree() {
        for case in oracle_suite(20_000, 11).unwrap() {
            assert!(case.passed, "{case:?}");
        }
    }

    #[test]
    fn strong_convergence_examples() {
        let base = StrongConvConfig {
            r: 2,
            n: 300,
            k: 1,
            l: 0,
            poly: WordPoly::kesten(2).unwrap(),
            samples: 1,
            seed: 42,
            reference: None,
            norm: NormOptions { method: super::super::norm::NormMethod::Lanczos, max_iter: 400, ..NormOptions::default() },
        };
        let rep = strong_convergence_experiment(&base).unwrap();
        assert_eq!(rep.reference_source, "kesten");
        assert!(rep.deviation < 0.15, "{rep:?}");
        let rep = strong_convergence_experiment(&StrongConvConfig { n: 80, k: 1, l: 1, ..base.clone() }).unwrap();
        assert!(rep.deviation < 0.25, "{rep:?}");
        let scalar = StrongConvConfig { k: 0, l: 0, poly: WordPoly::parse("2*a - 0.5*b", 2).unwrap(), ..base };
        let rep = strong_convergence_experiment(&scalar).unwrap();
        assert!((rep.norm_estimate - 1.5).abs() < 1e-9 && rep.deviation < 1e-9);
    }

    #[test]
    fn concentration_shrinks() {
        let x = WordPoly::parse("a+b", 2).unwrap();
        let rep = concentration_probe(&x, 1, 0, &[50, 200], 30, 1).unwrap();
        assert!(rep.rows[1].std < rep.rows[0].std, "{rep:?}");
        assert!(rep.rows.iter().all(|r| r.mean.is_finite() && r.std.is_finite() && !r.flagged));
        assert!(rep.monotone);
    }
}
