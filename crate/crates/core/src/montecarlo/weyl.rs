use std::collections::HashSet;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symgroup::{partitions_of, Partition};

/// Proof constant of the lower dimension bound.
pub const DIM_BOUND_C: f64 = std::f64::consts::LN_2 / 8.0;

/// Highest weight of a U(n) irreducible, stored as the representative
/// modulo `(1,…,1)` whose ℓ¹ norm is minimal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HighestWeight(Vec<i64>);

impl HighestWeight {
    /// Normalizes `weights` (weakly decreasing) to its minimal-ℓ¹ representative.
    pub fn new(weights: Vec<i64>) -> Result<HighestWeight> {
        if weights.is_empty() {
            return Err(Error::argument("highest weight needs n >= 1 entries"));
        }
        if weights.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::argument(format!("weight {weights:?} is not weakly decreasing")));
        }
        let n = weights.len();
        // Any t in the median interval minimizes Σ|Λ_i − t|; take the one nearest 0.
        let (lo, hi) = if n % 2 == 1 {
            (weights[n / 2], weights[n / 2])
        } else {
            (weights[n / 2], weights[n / 2 - 1])
        };
        let t = 0i64.clamp(lo, hi);
        Ok(HighestWeight(weights.into_iter().map(|x| x - t).collect()))
    }

    /// The weight `(λ₁,…,λ_p,0,…,0,−μ_q,…,−μ₁)` of `s_{λ,μ}` on U(n).
    pub fn from_pair(lambda: &Partition, mu: &Partition, n: usize) -> Result<HighestWeight> {
        if lambda.length() + mu.length() > n {
            return Err(Error::argument(format!(
                "n = {n} is smaller than ℓ(λ)+ℓ(μ) = {}",
                lambda.length() + mu.length()
            )));
        }
        HighestWeight::new(pair_weight(lambda, mu, n))
    }

    pub fn weights(&self) -> &[i64] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|x| x.unsigned_abs()).sum()
    }
}

fn pair_weight(lambda: &Partition, mu: &Partition, n: usize) -> Vec<i64> {
    (0..n)
        .map(|i| {
            let j = n - 1 - i;
            lambda.part(i) as i64 - mu.part(j) as i64
        })
        .collect()
}

/// Weyl dimension formula `∏_{i<j} (j−i+Λ_i−Λ_j)/(j−i)` in exact integers.
pub fn weyl_dim(weight: &HighestWeight) -> BigInt {
    let l = weight.weights();
    let n = l.len();
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..n {
        for j in (i + 1)..n {
            num *= BigInt::from((j - i) as i64 + l[i] - l[j]);
            den *= BigInt::from((j - i) as i64);
        }
    }
    num / den
}

/// `D_{λ,μ}(n)`, the dimension of the irreducible with character `s_{λ,μ}`.
pub fn stable_dim(lambda: &Partition, mu: &Partition, n: usize) -> Result<BigInt> {
    Ok(weyl_dim(&HighestWeight::from_pair(lambda, mu, n)?))
}

/// Which determinant formula evaluates the Schur polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchurMethod {
    /// Picks the bialternant unless the spectrum is clustered or large.
    Auto,
    Bialternant,
    JacobiTrudi,
}

/// `s_{λ,μ}(g)` for `g` with the given eigenvalues.
pub fn weyl_character_eval(lambda: &Partition, mu: &Partition, eigenvalues: &[Complex64]) -> Result<Complex64> {
    weyl_character_eval_with(lambda, mu, eigenvalues, SchurMethod::Auto)
}

pub fn weyl_character_eval_with(
    lambda: &Partition,
    mu: &Partition,
    eigenvalues: &[Complex64],
    method: SchurMethod,
) -> Result<Complex64> {
    let n = eigenvalues.len();
    if lambda.length() + mu.length() > n {
        return Err(Error::argument(format!(
            "{n} eigenvalues cannot carry ℓ(λ)+ℓ(μ) = {}",
            lambda.length() + mu.length()
        )));
    }
    // Shift by μ₁ to a polynomial weight ν and divide by det^{μ₁}.
    let shift = mu.part(0);
    let nu: Vec<usize> = pair_weight(lambda, mu, n).iter().map(|&x| (x + shift as i64) as usize).collect();
    let nu = Partition::from_unsorted(nu);
    let s = schur_eval_with(&nu, eigenvalues, method);
    if shift == 0 {
        return Ok(s);
    }
    let det: Complex64 = eigenvalues.iter().product();
    Ok(s / det.powu(shift as u32))
}

/// Schur polynomial `s_ν(x₁,…,x_n)`; zero when `ℓ(ν) > n`.
pub fn schur_eval(nu: &Partition, x: &[Complex64]) -> Complex64 {
    schur_eval_with(nu, x, SchurMethod::Auto)
}

pub fn schur_eval_with(nu: &Partition, x: &[Complex64], method: SchurMethod) -> Complex64 {
    let n = x.len();
    if nu.length() > n {
        return Complex64::zero();
    }
    if nu.is_empty() {
        return Complex64::one();
    }
    let method = match method {
        SchurMethod::Auto => {
            if n <= 12 && min_gap(x) > 1e-3 {
                SchurMethod::Bialternant
            } else {
                SchurMethod::JacobiTrudi
            }
        }
        m => m,
    };
    match method {
        SchurMethod::Bialternant => bialternant(nu, x),
        _ => dual_jacobi_trudi(nu, x),
    }
}

fn min_gap(x: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            gap = gap.min((x[i] - x[j]).norm());
        }
    }
    gap
}

fn bialternant(nu: &Partition, x: &[Complex64]) -> Complex64 {
    let n = x.len();
    let num = DMatrix::from_fn(n, n, |i, j| x[i].powu((nu.part(j) + n - 1 - j) as u32));
    let den = DMatrix::from_fn(n, n, |i, j| x[i].powu((n - 1 - j) as u32));
    num.determinant() / den.determinant()
}

/// `s_ν = det[e_{ν′_i − i + j}]` of size `ν₁`.
fn dual_jacobi_trudi(nu: &Partition, x: &[Complex64]) -> Complex64 {
    // Elementary symmetric polynomials from ∏(1 + x_i t).
    let mut e = vec![Complex64::zero(); x.len() + 1];
    e[0] = Complex64::one();
    for (m, &xi) in x.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            let prev = e[k - 1];
            e[k] += xi * prev;
        }
    }
    let conj = nu.conjugate();
    let size = conj.length();
    let m = DMatrix::from_fn(size, size, |i, j| {
        let idx = conj.part(i) as i64 - i as i64 + j as i64;
        if idx < 0 || idx as usize >= e.len() {
            Complex64::zero()
        } else {
            e[idx as usize]
        }
    });
    m.determinant()
}

/// Outcome of the two-sided dimension bound for one weight.
#[derive(Clone, Debug, Serialize)]
pub struct DimBoundRecord {
    pub weight: Vec<i64>,
    pub n: usize,
    pub l1: u64,
    pub log_dim: f64,
    pub log_lower: f64,
    pub log_upper: f64,
}

/// Checks `exp(c·min(‖Λ‖₁,n)) ≤ dim ≤ exp(‖Λ‖₁ log n)` with `c = log 2 / 8`.
pub fn dim_bounds_check(weight: &HighestWeight) -> Result<DimBoundRecord> {
    let n = weight.n();
    let l1 = weight.l1_norm();
    let dim = weyl_dim(weight);
    let log_dim = big_ln(&dim);
    let log_lower = DIM_BOUND_C * (l1.min(n as u64) as f64);
    let log_upper = l1 as f64 * (n as f64).ln();
    let rec = DimBoundRecord { weight: weight.weights().to_vec(), n, l1, log_dim, log_lower, log_upper };
    let slack = 1e-9 * (1.0 + log_dim.abs());
    if log_dim < log_lower - slack || log_dim > log_upper + slack {
        return Err(Error::violation(format!(
            "dimension bound fails for {:?}: log dim = {log_dim}, bounds [{log_lower}, {log_upper}]",
            weight.weights()
        )));
    }
    Ok(rec)
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        let f: f64 = x.to_string().parse().unwrap_or(f64::INFINITY);
        return f.ln();
    }
    let shift = bits - 900;
    let top: f64 = (x >> shift).to_string().parse().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// All highest weights of U(n) modulo `(1,…,1)` with `‖Λ‖₁ ≤ max_l1`, each once.
pub fn weights_up_to(n: usize, max_l1: usize) -> Result<Vec<HighestWeight>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let half = n / 2;
    for a in 0..=max_l1 {
        for b in 0..=(max_l1 - a) {
            for lambda in partitions_of(a)? {
                if lambda.length() > half {
                    continue;
                }
                for mu in partitions_of(b)? {
                    if mu.length() > half || lambda.length() + mu.length() > n {
                        continue;
                    }
                    let w = pair_weight(&lambda, &mu, n);
                    let last = w[n - 1];
                    let key: Vec<i64> = w.iter().map(|x| x - last).collect();
                    if seen.insert(key) {
                        let hw = HighestWeight::new(w)?;
                        if hw.l1_norm() as usize <= max_l1 {
                            out.push(hw);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Checks the classifier `dim < exp(c n^A) ⇒ ‖Λ‖₁ ≤ n^A` over all weights with
/// `‖Λ‖₁ ≤ max_l1`. Returns the number of weights below the dimension threshold.
pub fn small_dim_classifier_check(n: usize, a: f64, max_l1: usize) -> Result<usize> {
    let threshold = DIM_BOUND_C * (n as f64).powf(a);
    let mut below = 0;
    for w in weights_up_to(n, max_l1)? {
        if big_ln(&weyl_dim(&w)) < threshold {
            below += 1;
            if w.l1_norm() as f64 > (n as f64).powf(a) {
                return Err(Error::violation(format!(
                    "weight {:?} has dim < exp(c n^A) but ‖Λ‖₁ = {} > n^A",
                    w.weights(),
                    w.l1_norm()
                )));
            }
        }
    }
    Ok(below)
}
