use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::basechange::powersum_schur_basechange;
use super::lr::lr_coeff;
use super::partition::{partitions_up_to, Partition};
use crate::error::{Error, Result};
use crate::montecarlo::weyl::{schur_eval, weyl_character_eval};

/// Largest `|λ|+|μ|` for which expansions are built and validated.
pub const KOIKE_CAP: usize = 4;
/// Largest tolerated validation error.
pub const KOIKE_TOLERANCE: f64 = 1e-9;
const VALIDATION_SAMPLES: usize = 50;
const VALIDATION_SEED: u64 = 0x006b_6f69_6b65;

/// Expansion `s_{λ,μ}(g) = Σ α^{λ,μ}_{λ′,μ′} s_{λ′}(g) s_{μ′}(g⁻¹)`.
#[derive(Clone, Debug, Serialize)]
pub struct KoikeExpansion {
    pub lambda: Partition,
    pub mu: Partition,
    /// Nonzero coefficients keyed by `(λ′, μ′)`.
    pub terms: BTreeMap<(Partition, Partition), i64>,
    /// Largest identity residual seen during construction.
    pub validation_error: f64,
}

impl KoikeExpansion {
    pub fn coefficient(&self, lambda: &Partition, mu: &Partition) -> i64 {
        self.terms.get(&(lambda.clone(), mu.clone())).copied().unwrap_or(0)
    }

    /// Power-sum form `s_{λ,μ}(g) = Σ β_{ρ,ρ′} p_ρ(g) p_{ρ′}(g⁻¹)`.
    pub fn power_sum_terms(&self) -> Result<BTreeMap<(Partition, Partition), BigRational>> {
        let mut out: BTreeMap<(Partition, Partition), BigRational> = BTreeMap::new();
        for ((l, m), &alpha) in &self.terms {
            let bl = powersum_schur_basechange(l.size())?;
            let bm = powersum_schur_basechange(m.size())?;
            let il = bl.partitions.iter().position(|q| q == l).unwrap();
            let im = bm.partitions.iter().position(|q| q == m).unwrap();
            for (r, rho) in bl.partitions.iter().enumerate() {
                for (r2, rho2) in bm.partitions.iter().enumerate() {
                    let c = &bl.schur_to_power[il][r] * &bm.schur_to_power[im][r2]
                        * BigRational::from_integer(BigInt::from(alpha));
                    *out.entry((rho.clone(), rho2.clone())).or_insert_with(BigRational::zero) += c;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Evaluates the right-hand side of the expansion on a spectrum.
    pub fn eval(&self, eigenvalues: &[Complex64]) -> Complex64 {
        let conj: Vec<Complex64> = eigenvalues.iter().map(|z| z.conj()).collect();
        self.terms
            .iter()
            .map(|((l, m), &a)| schur_eval(l, eigenvalues) * schur_eval(m, &conj) * a as f64)
            .sum()
    }
}

/// `α^{λ,μ}_{λ′,μ′} = Σ_γ (−1)^{|γ|} c^λ_{λ′γ} c^μ_{μ′γ′}` with `γ′` the conjugate.
pub fn koike_coefficients(lambda: &Partition, mu: &Partition) -> Result<BTreeMap<(Partition, Partition), i64>> {
    let mut terms = BTreeMap::new();
    let gammas = partitions_up_to(lambda.size().min(mu.size()))?;
    for l2 in partitions_up_to(lambda.size())? {
        if !lambda.contains(&l2) {
            continue;
        }
        let g = lambda.size() - l2.size();
        if g > mu.size() {
            continue;
        }
        for m2 in partitions_up_to(mu.size() - g)? {
            if m2.size() + g != mu.size() || !mu.contains(&m2) {
                continue;
            }
            let mut total: i64 = 0;
            for gamma in gammas.iter().filter(|q| q.size() == g) {
                let a = lr_coeff(&l2, gamma, lambda) as i64;
                if a == 0 {
                    continue;
                }
                let b = lr_coeff(&m2, &gamma.conjugate(), mu) as i64;
                total += if g % 2 == 0 { a * b } else { -a * b };
            }
            if total != 0 {
                terms.insert((l2.clone(), m2), total);
            }
        }
    }
    Ok(terms)
}

/// Builds the expansion and checks it against direct character evaluation on
/// random diagonal unitaries for `n ∈ {k+ℓ, …, k+ℓ+3}`. Results are cached.
pub fn koike_expand(lambda: &Partition, mu: &Partition) -> Result<Arc<KoikeExpansion>> {
    type Cache = RwLock<HashMap<(Partition, Partition), Arc<KoikeExpansion>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    if lambda.size() + mu.size() > KOIKE_CAP {
        return Err(Error::unsupported(format!(
            "Koike expansion limited to |λ|+|μ| <= {KOIKE_CAP}, got {}",
            lambda.size() + mu.size()
        )));
    }
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (lambda.clone(), mu.clone());
    if let Some(e) = cache.read().unwrap().get(&key) {
        return Ok(e.clone());
    }
    let mut exp = KoikeExpansion {
        lambda: lambda.clone(),
        mu: mu.clone(),
        terms: koike_coefficients(lambda, mu)?,
        validation_error: 0.0,
    };
    exp.validation_error = validate(&exp)?;
    let exp = Arc::new(exp);
    cache.write().unwrap().insert(key, exp.clone());
    Ok(exp)
}

/// Builds every expansion with `|λ|+|μ| ≤ KOIKE_CAP` and returns the
/// largest validation error.
pub fn koike_validation_sweep() -> Result<f64> {
    let parts = partitions_up_to(KOIKE_CAP)?;
    let mut worst: f64 = 0.0;
    for lambda in &parts {
        for mu in parts.iter().filter(|m| lambda.size() + m.size() <= KOIKE_CAP) {
            worst = worst.max(koike_expand(lambda, mu)?.validation_error);
        }
    }
    Ok(worst)
}

fn validate(exp: &KoikeExpansion) -> Result<f64> {
    if exp.coefficient(&exp.lambda, &exp.mu) != 1 {
        return Err(Error::StructureViolation(format!(
            "Koike expansion of ({},{}) lacks its leading term",
            exp.lambda, exp.mu
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let base = (exp.lambda.size() + exp.mu.size()).max(exp.lambda.length() + exp.mu.length()).max(1);
    let mut worst = 0.0f64;
    for n in base..base + 4 {
        for _ in 0..VALIDATION_SAMPLES {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            let direct = weyl_character_eval(&exp.lambda, &exp.mu, &x)?;
            worst = worst.max((direct - exp.eval(&x)).norm());
        }
    }
    if worst >= KOIKE_TOLERANCE {
        return Err(Error::StructureViolation(format!(
            "Koike expansion of ({},{}) fails validation: error {worst:e}",
            exp.lambda, exp.mu
        )));
    }
    Ok(worst)
}
