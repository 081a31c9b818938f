//! Random walks on free groups: exact return probabilities, spectral-radius
//! brackets, proper-power statistics and rapid-decay norm bounds.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freegroup::{ball, ball_size, is_proper_power, Letter, Word};
use crate::montecarlo::norm::lanczos_top;
use crate::montecarlo::tensor::CVec;
use crate::poly::{rat_to_f64, ratio};
use crate::rng::substream;

/// Steps allowed for the exact radial return probability.
pub const RADIAL_STEP_CAP: usize = 40;
/// Steps allowed for exact convolution of a general measure.
pub const CONVOLUTION_STEP_CAP: usize = 20;
/// Largest ball used for compression lower bounds.
pub const COMPRESSION_BALL_CAP: usize = 200_000;

/// Finitely supported probability measure on `F_r`.
#[derive(Clone, Debug)]
pub struct WalkMeasure {
    rank: usize,
    support: Vec<(Word, BigRational)>,
    pub symmetric: bool,
    pub contains_identity: bool,
    pub generating: bool,
}

impl WalkMeasure {
    pub fn new(rank: usize, weights: Vec<(Word, BigRational)>) -> Result<WalkMeasure> {
        if rank == 0 {
            return Err(Error::argument("walks need rank >= 1"));
        }
        let mut merged: BTreeMap<Word, BigRational> = BTreeMap::new();
        for (w, p) in weights {
            if p <= BigRational::zero() {
                return Err(Error::argument(format!("non-positive weight {p} on {w}")));
            }
            let w = w.with_rank(rank)?;
            *merged.entry(w).or_insert_with(BigRational::zero) += p;
        }
        let total: BigRational = merged.values().sum();
        if total != BigRational::one() {
            return Err(Error::argument(format!("weights sum to {total}, not 1")));
        }
        let symmetric = merged.iter().all(|(w, p)| merged.get(&w.inverse()) == Some(p));
        let contains_identity = merged.keys().any(|w| w.is_identity());
        let words: Vec<Word> = merged.keys().cloned().collect();
        let generating = generates_free_group(rank, &words);
        Ok(WalkMeasure { rank, support: merged.into_iter().collect(), symmetric, contains_identity, generating })
    }

    /// Uniform on `x_i^{±1}`.
    pub fn uniform_generators(rank: usize) -> Result<WalkMeasure> {
        let p = ratio(1, 2 * rank as i64);
        let ws = (0..rank)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .map(|l| Ok((Word::from_letters(rank, [l])?, p.clone())))
            .collect::<Result<Vec<_>>>()?;
        WalkMeasure::new(rank, ws)
    }

    /// Uniform on `{e} ∪ {x_i^{±1}}`.
    pub fn lazy_uniform(rank: usize) -> Result<WalkMeasure> {
        let p = ratio(1, 2 * rank as i64 + 1);
        let mut ws = vec![(Word::identity(rank), p.clone())];
        for g in 0..rank {
            for inv in [false, true] {
                ws.push((Word::from_letters(rank, [Letter::new(g, inv)])?, p.clone()));
            }
        }
        WalkMeasure::new(rank, ws)
    }

    pub fn point_mass(rank: usize) -> Result<WalkMeasure> {
        WalkMeasure::new(rank, vec![(Word::identity(rank), BigRational::one())])
    }

    /// `uniform-gen`, `lazy`, `point`, or a list `word:p,word:p,…` with
    /// rational probabilities (`e` denotes the identity).
    pub fn parse(text: &str, rank: usize) -> Result<WalkMeasure> {
        match text {
            "uniform-gen" | "uniform" => Self::uniform_generators(rank),
            "lazy" | "lazy-uniform" => Self::lazy_uniform(rank),
            "point" => Self::point_mass(rank),
            _ => {
                let mut ws = Vec::new();
                for item in text.split(',').filter(|s| !s.trim().is_empty()) {
                    let (w, p) = item
                        .split_once(':')
                        .ok_or_else(|| Error::argument(format!("measure entry `{item}` lacks `:`")))?;
                    let w = w.trim();
                    let w = if w == "e" { Word::identity(rank) } else { Word::parse(w, rank)? };
                    let p: BigRational =
                        p.trim().parse().map_err(|_| Error::argument(format!("bad probability `{p}`")))?;
                    ws.push((w, p));
                }
                WalkMeasure::new(rank, ws)
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn support(&self) -> &[(Word, BigRational)] {
        &self.support
    }

    pub fn is_reasonable(&self) -> bool {
        self.symmetric && self.contains_identity && self.generating
    }

    pub fn support_radius(&self) -> usize {
        self.support.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// Masses of the spheres when the weight depends only on word length.
    pub fn radial_profile(&self) -> Option<Vec<BigRational>> {
        let radius = self.support_radius();
        let mut mass = vec![BigRational::zero(); radius + 1];
        let mut count = vec![0u128; radius + 1];
        let mut weight: Vec<Option<BigRational>> = vec![None; radius + 1];
        for (w, p) in &self.support {
            let l = w.len();
            mass[l] += p;
            count[l] += 1;
            match &weight[l] {
                Some(q) if q != p => return None,
                _ => weight[l] = Some(p.clone()),
            }
        }
        for l in 0..=radius {
            if count[l] != 0 && count[l] != sphere_size(self.rank, l) {
                return None;
            }
        }
        Some(mass)
    }
}

/// Stallings folding: the support generates `F_r` iff the folded graph of
/// its words is the rose with all `r` petals.
fn generates_free_group(rank: usize, words: &[Word]) -> bool {
    let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (from, generator, to)
    let mut vertices = 1usize;
    for w in words.iter().filter(|w| !w.is_identity()) {
        let mut cur = 0;
        let len = w.len();
        for (i, l) in w.letters().iter().enumerate() {
            let next = if i + 1 == len {
                0
            } else {
                vertices += 1;
                vertices - 1
            };
            if l.inverse {
                edges.push((next, l.generator, cur));
            } else {
                edges.push((cur, l.generator, next));
            }
            cur = next;
        }
    }
    let mut parent: Vec<usize> = (0..vertices).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    loop {
        let mut out: HashMap<(usize, usize), usize> = HashMap::new();
        let mut inc: HashMap<(usize, usize), usize> = HashMap::new();
        let mut merged = false;
        for &(a, g, b) in &edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if let Some(&t) = out.get(&(ra, g)) {
                let t = find(&mut parent, t);
                if t != rb {
                    parent[t] = rb;
                    merged = true;
                }
            } else {
                out.insert((ra, g), rb);
            }
            if let Some(&s) = inc.get(&(rb, g)) {
                let s = find(&mut parent, s);
                if s != ra {
                    parent[s] = ra;
                    merged = true;
                }
            } else {
                inc.insert((rb, g), ra);
            }
        }
        if !merged {
            break;
        }
    }
    let roots = (0..vertices).filter(|&v| find(&mut parent, v) == v).count();
    let mut gens = vec![false; rank];
    for &(_, g, _) in &edges {
        gens[g] = true;
    }
    roots == 1 && gens.iter().all(|&x| x)
}

/// `|S_L| = 2r(2r−1)^{L−1}`, and 1 for `L = 0`.
pub fn sphere_size(rank: usize, l: usize) -> u128 {
    if l == 0 {
        1
    } else {
        2 * rank as u128 * (2 * rank as u128 - 1).pow(l as u32 - 1)
    }
}

/// Kesten's value `√(2r−1)/r` for the simple random walk.
pub fn kesten_radius(rank: usize) -> f64 {
    (2.0 * rank as f64 - 1.0).sqrt() / rank as f64
}

/// Number of words `h ∈ S_L` with `|gh| = d + L − 2j` for `|g| = d`, by `j`.
fn cancellation_counts(rank: usize, d: usize, l: usize) -> Vec<(usize, u128)> {
    let q = 2 * rank as u128 - 1;
    if l == 0 {
        return vec![(d, 1)];
    }
    if d == 0 {
        return vec![(l, sphere_size(rank, l))];
    }
    let mut out = Vec::new();
    for j in 0..=d.min(l) {
        let count = if j == l {
            1
        } else if j == 0 {
            q.pow(l as u32)
        } else if j < d {
            (q - 1) * q.pow((l - j - 1) as u32)
        } else {
            q.pow((l - d) as u32)
        };
        if count > 0 {
            out.push((d + l - 2 * j, count));
        }
    }
    out
}

/// Exact law of `|g_n|` for a radial measure, via the distance chain.
pub fn radial_distance_law(rank: usize, profile: &[BigRational], steps: usize) -> Vec<BigRational> {
    let r = profile.len().saturating_sub(1);
    let mut dist = vec![BigRational::zero(); steps * r + 1];
    dist[0] = BigRational::one();
    for _ in 0..steps {
        let mut next = vec![BigRational::zero(); dist.len()];
        for (d, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (l, m) in profile.iter().enumerate() {
                if m.is_zero() {
                    continue;
                }
                let s = BigRational::from_integer(BigInt::from(sphere_size(rank, l)));
                for (nd, c) in cancellation_counts(rank, d, l) {
                    next[nd] += p * m * BigRational::from_integer(BigInt::from(c)) / &s;
                }
            }
        }
        dist = next;
    }
    dist
}

/// Same law in floating point, for many steps.
pub fn radial_distance_law_f64(rank: usize, profile: &[f64], steps: usize) -> Vec<f64> {
    let r = profile.len().saturating_sub(1);
    let mut dist = vec![0.0; steps * r + 1];
    dist[0] = 1.0;
    let kernels: Vec<Vec<Vec<(usize, f64)>>> = (0..=steps * r)
        .map(|d| {
            (0..=r)
                .map(|l| {
                    let s = sphere_size_f64(rank, l);
                    cancellation_counts_f64(rank, d, l).into_iter().map(|(nd, c)| (nd, c / s)).collect()
                })
                .collect()
        })
        .collect();
    for step in 0..steps {
        let reach = (step * r).min(dist.len() - 1);
        let mut next = vec![0.0; dist.len()];
        for d in 0..=reach {
            let p = dist[d];
            if p == 0.0 {
                continue;
            }
            for (l, &m) in profile.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                for &(nd, c) in &kernels[d][l] {
                    next[nd] += p * m * c;
                }
            }
        }
        dist = next;
    }
    dist
}

fn sphere_size_f64(rank: usize, l: usize) -> f64 {
    if l == 0 {
        1.0
    } else {
        2.0 * rank as f64 * (2.0 * rank as f64 - 1.0).powi(l as i32 - 1)
    }
}

fn cancellation_counts_f64(rank: usize, d: usize, l: usize) -> Vec<(usize, f64)> {
    let q = 2.0 * rank as f64 - 1.0;
    if l == 0 {
        return vec![(d, 1.0)];
    }
    if d == 0 {
        return vec![(l, sphere_size_f64(rank, l))];
    }
    (0..=d.min(l))
        .map(|j| {
            let c = if j == l {
                1.0
            } else if j == 0 {
                q.powi(l as i32)
            } else if j < d {
                (q - 1.0) * q.powi((l - j - 1) as i32)
            } else {
                q.powi((l - d) as i32)
            };
            (d + l - 2 * j, c)
        })
        .filter(|&(_, c)| c > 0.0)
        .collect()
}

/// `μ^{*steps}` as an exact map.
pub fn convolution_power(mu: &WalkMeasure, steps: usize) -> HashMap<Word, BigRational> {
    let mut cur: HashMap<Word, BigRational> = HashMap::new();
    cur.insert(Word::identity(mu.rank), BigRational::one());
    for _ in 0..steps {
        let mut next: HashMap<Word, BigRational> = HashMap::new();
        for (g, p) in &cur {
            for (s, q) in &mu.support {
                *next.entry(g.mul(s)).or_insert_with(BigRational::zero) += p * q;
            }
        }
        cur = next;
    }
    cur
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnProbability {
    pub steps: usize,
    #[serde(serialize_with = "ser_rational")]
    pub exact: BigRational,
    pub value: f64,
    pub method: &'static str,
}

fn ser_rational<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// `P(g_steps = e)`: radial chain when possible, otherwise meet-in-the-middle
/// convolution `Σ_g μ^{*a}(g) μ^{*b}(g⁻¹)`.
pub fn return_probability(mu: &WalkMeasure, steps: usize) -> Result<ReturnProbability> {
    if let Some(profile) = mu.radial_profile() {
        if steps > RADIAL_STEP_CAP {
            return Err(Error::unsupported(format!("exact radial walk limited to {RADIAL_STEP_CAP} steps")));
        }
        let exact = radial_distance_law(mu.rank, &profile, steps)[0].clone();
        return Ok(ReturnProbability { steps, value: rat_to_f64(&exact), exact, method: "radial" });
    }
    let exact = return_probability_convolution(mu, steps)?;
    Ok(ReturnProbability { steps, value: rat_to_f64(&exact), exact, method: "convolution" })
}

pub fn return_probability_convolution(mu: &WalkMeasure, steps: usize) -> Result<BigRational> {
    if steps > CONVOLUTION_STEP_CAP {
        return Err(Error::unsupported(format!("exact convolution limited to {CONVOLUTION_STEP_CAP} steps")));
    }
    let a = steps / 2;
    let left = convolution_power(mu, a);
    let right = if steps - a == a { left.clone() } else { convolution_power(mu, steps - a) };
    let mut total = BigRational::zero();
    for (g, p) in &left {
        if let Some(q) = right.get(&g.inverse()) {
            total += p * q;
        }
    }
    Ok(total)
}

/// Bracket `[lower, upper]` around `ρ(μ) = ‖λ(μ)‖`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralBracket {
    pub lower: f64,
    pub upper: f64,
    /// `max_m P(g_{2m} = e)^{1/2m}` over the exactly computed steps.
    pub return_root: f64,
    /// Largest Rayleigh quotient of a compression of `λ(μ)`.
    pub compression: f64,
    /// Power `m` used in `ρ^m ≤ Σ_q 3(1+q²) ‖(μ^{*m})_q‖₂`.
    pub haagerup_power: usize,
}

impl SpectralBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Clone, Debug)]
pub struct SpectralOptions {
    /// Radius of the radial compression.
    pub compression_radius: usize,
    /// Power used in the rapid-decay upper bound for radial measures.
    pub haagerup_power: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { compression_radius: 400, haagerup_power: 2000 }
    }
}

/// Brackets the spectral radius of a symmetric measure. Lower bounds are
/// return-probability roots and compression Rayleigh quotients; the upper
/// bound applies the rapid-decay inequality sphere by sphere to `μ^{*m}`.
pub fn spectral_radius(mu: &WalkMeasure, opts: &SpectralOptions) -> Result<SpectralBracket> {
    if !mu.symmetric {
        return Err(Error::argument("spectral radius bracket needs a symmetric measure"));
    }
    let rank = mu.rank;
    if let Some(profile) = mu.radial_profile() {
        let pf: Vec<f64> = profile.iter().map(rat_to_f64).collect();
        let mut return_root: f64 = 0.0;
        for m in 1..=RADIAL_STEP_CAP / 2 {
            let p = radial_distance_law(rank, &profile, 2 * m)[0].clone();
            return_root = return_root.max(rat_to_f64(&p).powf(1.0 / (2.0 * m as f64)));
        }
        let compression = radial_compression(rank, &pf, opts.compression_radius);
        let m = opts.haagerup_power;
        let law = radial_distance_law_f64(rank, &pf, m);
        let mut terms = Vec::new();
        for (q, &p) in law.iter().enumerate() {
            if p > 0.0 {
                let s = (2.0 * rank as f64).ln() + (q as f64 - 1.0).max(0.0) * (2.0 * rank as f64 - 1.0).ln();
                let s = if q == 0 { 0.0 } else { s };
                terms.push((3.0 * (1.0 + (q * q) as f64)).ln() + p.ln() - 0.5 * s);
            }
        }
        let upper = (log_sum_exp(&terms) / m as f64).exp().min(1.0);
        let lower = return_root.max(compression);
        return Ok(SpectralBracket { lower, upper, return_root, compression, haagerup_power: m });
    }
    // General finite support: exact convolution powers.
    let steps = CONVOLUTION_STEP_CAP / 2;
    let mut return_root: f64 = 0.0;
    for m in 1..=steps / 2 {
        let p = return_probability_convolution(mu, 2 * m)?;
        return_root = return_root.max(rat_to_f64(&p).powf(1.0 / (2.0 * m as f64)));
    }
    let terms: Vec<(Complex64, Word)> =
        mu.support.iter().map(|(w, p)| (Complex64::new(rat_to_f64(p), 0.0), w.clone())).collect();
    let radius = largest_radius_within_cap(rank, COMPRESSION_BALL_CAP / 4);
    let compression = compression_norm(&terms, rank, radius)?;
    let m = steps;
    let law = convolution_power(mu, m);
    let mut spheres: BTreeMap<usize, f64> = BTreeMap::new();
    for (g, p) in &law {
        *spheres.entry(g.len()).or_insert(0.0) += rat_to_f64(&(p * p));
    }
    let bound: f64 = spheres.iter().map(|(&q, &sq)| 3.0 * (1.0 + (q * q) as f64) * sq.sqrt()).sum();
    let upper = bound.powf(1.0 / m as f64).min(1.0);
    Ok(SpectralBracket { lower: return_root.max(compression), upper, return_root, compression, haagerup_power: m })
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Top of the spectrum (in modulus) of `λ(μ)` compressed to radial
/// functions on the ball of radius `radius`, in the basis `1_{S_d}/√|S_d|`.
pub fn radial_compression(rank: usize, profile: &[f64], radius: usize) -> f64 {
    let size = radius + 1;
    let mut t = DMatrix::<f64>::zeros(size, size);
    let ln_s = |d: usize| sphere_size_f64(rank, d).ln();
    for d in 0..size {
        for (l, &m) in profile.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let s = sphere_size_f64(rank, l);
            for (nd, c) in cancellation_counts_f64(rank, d, l) {
                if nd < size {
                    // ⟨e_nd, λ(μ) e_d⟩ = K(d→nd) √(|S_d|/|S_nd|)
                    t[(nd, d)] += m * c / s * (0.5 * (ln_s(d) - ln_s(nd))).exp();
                }
            }
        }
    }
    let t = (&t + t.transpose()) * 0.5;
    SymmetricEigen::new(t).eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn largest_radius_within_cap(rank: usize, cap: usize) -> usize {
    let mut r = 0;
    while ball_size(r + 1, rank) <= cap as u128 {
        r += 1;
    }
    r
}

/// Lower bound for `‖λ(a)‖`: the norm of `λ(a)` compressed to `ℓ²` of the
/// ball of the given radius.
pub fn compression_norm(a: &[(Complex64, Word)], rank: usize, radius: usize) -> Result<f64> {
    if ball_size(radius, rank) > COMPRESSION_BALL_CAP as u128 {
        return Err(Error::unsupported(format!(
            "compression ball of radius {radius} exceeds {COMPRESSION_BALL_CAP} words"
        )));
    }
    let words = ball(radius, rank)?;
    let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for (col, x) in words.iter().enumerate() {
        for (c, h) in a {
            if let Some(&row) = index.get(&h.with_rank(rank)?.mul(x)) {
                entries.push((row, col, *c));
            }
        }
    }
    let d = words.len();
    let apply = |v: &CVec| -> CVec {
        let mut y = CVec::zeros(d);
        for &(r, c, w) in &entries {
            y[r] += w * v[c];
        }
        let mut z = CVec::zeros(d);
        for &(r, c, w) in &entries {
            z[c] += w.conj() * y[r];
        }
        z
    };
    let mut rng = substream(0, "compression", radius as u64);
    let start = CVec::from_fn(d, |_, _| Complex64::new(rng.random::<f64>() + 0.5, 0.0));
    let (top, _, _) = lanczos_top(apply, start, d, 300, 1e-12, true);
    Ok(top.max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct HaagerupRecord {
    pub support_radius: usize,
    pub l2: f64,
    pub upper: f64,
    pub lower: f64,
    pub compression_radius: usize,
}

/// Rapid-decay check: `lower ≤ ‖λ(a)‖ ≤ 3(1+q²)‖a‖₂` for `a` supported in
/// the radius-`q` ball, with the lower bound from the radius-`(q+3)` ball.
pub fn haagerup_check(a: &[(Complex64, Word)], rank: usize) -> Result<HaagerupRecord> {
    let q = a.iter().map(|(_, w)| w.len()).max().unwrap_or(0);
    let mut merged: HashMap<Word, Complex64> = HashMap::new();
    for (c, w) in a {
        *merged.entry(w.with_rank(rank)?).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
    let l2 = merged.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let upper = 3.0 * (1.0 + (q * q) as f64) * l2;
    let terms: Vec<(Complex64, Word)> = merged.into_iter().map(|(w, c)| (c, w)).collect();
    let lower = compression_norm(&terms, rank, q + 3)?;
    if lower > upper * (1.0 + 1e-9) {
        return Err(Error::violation(format!("compression {lower} exceeds the rapid-decay bound {upper}")));
    }
    Ok(HaagerupRecord { support_radius: q, l2, upper, lower, compression_radius: q + 3 })
}

/// One row of the proper-power table.
#[derive(Clone, Debug, Serialize)]
pub struct PowerRow {
    pub n: usize,
    pub return_prob: Option<f64>,
    pub count: u64,
    pub samples: u64,
    pub proper_power_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProperPowerTable {
    pub rows: Vec<PowerRow>,
    pub seed: u64,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Samples `samples` walks of `steps` steps and records, for each `n`, how
/// often `g_n` is a proper power.
pub fn proper_power_stats(mu: &WalkMeasure, steps: usize, samples: u64, seed: u64) -> Result<ProperPowerTable> {
    let cumulative: Vec<(f64, &Word)> = {
        let mut acc = 0.0;
        mu.support
            .iter()
            .map(|(w, p)| {
                acc += rat_to_f64(p);
                (acc, w)
            })
            .collect()
    };
    let chunks = 64u64;
    let per_chunk: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = samples / chunks + u64::from(c < samples % chunks);
            let mut rng = substream(seed, "walk", c);
            let mut hits = vec![0u64; steps + 1];
            for _ in 0..count {
                let mut g = Word::identity(mu.rank);
                for n in 1..=steps {
                    let u: f64 = rng.random();
                    let s = cumulative.iter().find(|(a, _)| u < *a).map_or(cumulative.last().unwrap().1, |x| x.1);
                    g = g.mul(s);
                    if is_proper_power(&g).is_some() {
                        hits[n] += 1;
                    }
                }
            }
            hits
        })
        .collect();
    let radial = mu.radial_profile();
    let mut rows = Vec::with_capacity(steps);
    for n in 1..=steps {
        let count: u64 = per_chunk.iter().map(|h| h[n]).sum();
        let (lo, hi) = wilson_interval(count, samples);
        let return_prob = match &radial {
            Some(p) if n <= RADIAL_STEP_CAP => Some(rat_to_f64(&radial_distance_law(mu.rank, p, n)[0])),
            _ => None,
        };
        rows.push(PowerRow {
            n,
            return_prob,
            count,
            samples,
            proper_power_prob: count as f64 / samples as f64,
            ci_low: lo,
            ci_high: hi,
        });
    }
    Ok(ProperPowerTable { rows, seed })
}

/// Exact `P(g_n is a proper power)` by convolution.
pub fn proper_power_probability_exact(mu: &WalkMeasure, n: usize) -> Result<BigRational> {
    if n > CONVOLUTION_STEP_CAP {
        return Err(Error::unsupported(format!("exact convolution limited to {CONVOLUTION_STEP_CAP} steps")));
    }
    Ok(convolution_power(mu, n)
        .into_iter()
        .filter(|(g, _)| is_proper_power(g).is_some())
        .map(|(_, p)| p)
        .sum())
}

/// Least-squares slope of `log p` against `n` over rows with `lo ≤ n ≤ hi`
/// and a nonzero estimate, weighted by the binomial information `count`.
pub fn fit_log_slope(table: &ProperPowerTable, lo: usize, hi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.n >= lo && r.n <= hi && r.count > 0)
        .map(|r| (r.n as f64, r.proper_power_prob.ln(), r.count as f64))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / sw;
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn measure_flags() {
        let u = WalkMeasure::uniform_generators(2).unwrap();
        assert!(u.symmetric && !u.contains_identity && u.generating && !u.is_reasonable());
        let l = WalkMeasure::lazy_uniform(2).unwrap();
        assert!(l.is_reasonable());
        let m = WalkMeasure::parse("e:1/2,ab:1/4,BA:1/4", 2).unwrap();
        assert!(m.symmetric && !m.generating);
        let m = WalkMeasure::parse("e:1/3,ab:1/6,BA:1/6,b:1/6,B:1/6", 2).unwrap();
        assert!(m.generating && m.is_reasonable());
        let m = WalkMeasure::parse("a:1/2,b:1/2", 2).unwrap();
        assert!(!m.symmetric);
        assert!(WalkMeasure::parse("a:1/2", 2).is_err());
        assert!(WalkMeasure::parse("aa:1/2,AA:1/2", 2).is_ok_and(|m| !m.generating));
        assert!(u.radial_profile().is_some());
        assert!(WalkMeasure::parse("a:1/2,A:1/2", 2).unwrap().radial_profile().is_none());
    }

    #[test]
    fn return_probability_examples() {
        let u = WalkMeasure::uniform_generators(2).unwrap();
        assert_eq!(return_probability(&u, 2).unwrap().exact, ratio(1, 4));
        assert_eq!(return_probability(&u, 4).unwrap().exact, ratio(7, 64));
        assert_eq!(return_probability(&u, 5).unwrap().exact, rat(0));
        assert!(return_probability(&u, 41).is_err());
    }

    #[test]
    fn radial_chain_matches_convolution() {
        for mu in [
            WalkMeasure::uniform_generators(2).unwrap(),
            WalkMeasure::lazy_uniform(2).unwrap(),
            WalkMeasure::uniform_generators(3).unwrap(),
        ] {
            let profile = mu.radial_profile().unwrap();
            for steps in 0..=10 {
                let a = radial_distance_law(mu.rank(), &profile, steps)[0].clone();
                let b = return_probability_convolution(&mu, steps).unwrap();
                assert_eq!(a, b);
            }
        }
        // A radial measure with mass on the sphere of radius 2.
        let mut ws = vec![(w(""), ratio(1, 4))];
        for x in ball(2, 2).unwrap().into_iter().filter(|x| x.len() == 2) {
            ws.push((x, ratio(3, 48)));
        }
        let mu = WalkMeasure::new(2, ws).unwrap();
        let profile = mu.radial_profile().unwrap();
        for steps in 0..=6 {
            assert_eq!(radial_distance_law(2, &profile, steps)[0], return_probability_convolution(&mu, steps).unwrap());
        }
    }

    #[test]
    fn supermultiplicativity_and_bracket() {
        let u = WalkMeasure::uniform_generators(2).unwrap();
        let profile = u.radial_profile().unwrap();
        let p: Vec<BigRational> = (0..=20).map(|m| radial_distance_law(2, &profile, 2 * m)[0].clone()).collect();
        for a in 1..=10 {
            for b in 1..=10 {
                assert!(p[a + b] >= &p[a] * &p[b]);
            }
        }
        let br = spectral_radius(&u, &SpectralOptions::default()).unwrap();
        let rho = kesten_radius(2);
        assert!(br.contains(rho) && br.width() < 0.05, "{br:?}");
        for (m, pm) in p.iter().enumerate() {
            assert!(rat_to_f64(pm) <= br.upper.powi(2 * m as i32) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn brackets_for_other_measures() {
        let pm = WalkMeasure::point_mass(2).unwrap();
        let br = spectral_radius(&pm, &SpectralOptions::default()).unwrap();
        assert!((br.lower - 1.0).abs() < 1e-12 && (br.upper - 1.0).abs() < 1e-12);
        let lazy = WalkMeasure::lazy_uniform(2).unwrap();
        let br = spectral_radius(&lazy, &SpectralOptions::default()).unwrap();
        let expect = (1.0 + 4.0 * kesten_radius(2)) / 5.0;
        assert!(br.contains(expect), "{br:?}");
        let gen = WalkMeasure::parse("e:1/3,ab:1/6,BA:1/6,b:1/6,B:1/6", 2).unwrap();
        let br = spectral_radius(&gen, &SpectralOptions::default()).unwrap();
        assert!(br.lower <= br.upper && br.upper <= 1.0 && br.lower > 0.5, "{br:?}");
    }

    #[test]
    fn haagerup_examples() {
        let one = Complex64::new(1.0, 0.0);
        let r = haagerup_check(&[(one, w("a"))], 2).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-9 && (r.upper - 6.0).abs() < 1e-12);
        let r = haagerup_check(&[(one, w(""))], 2).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-9 && (r.upper - 3.0).abs() < 1e-12 && (r.l2 - 1.0).abs() < 1e-12);
        let gens: Vec<(Complex64, Word)> = ["a", "A", "b", "B"].iter().map(|s| (one, w(s))).collect();
        let mut prev = 0.0;
        for radius in 1..=7 {
            let v = compression_norm(&gens, 2, radius).unwrap();
            assert!(v >= prev - 1e-9 && v <= 2.0 * 3f64.sqrt() + 1e-9);
            prev = v;
        }
        assert!(prev > 3.2);
    }

    #[test]
    fn sampler_matches_exhaustive_enumeration() {
        let mu = WalkMeasure::lazy_uniform(2).unwrap();
        let table = proper_power_stats(&mu, 6, 40_000, 5).unwrap();
        for row in &table.rows {
            let exact = rat_to_f64(&proper_power_probability_exact(&mu, row.n).unwrap());
            // Slightly wider than the 95% interval to keep six comparisons robust.
            let se = (exact * (1.0 - exact) / row.samples as f64).sqrt();
            assert!((row.proper_power_prob - exact).abs() <= 4.0 * se + 1e-12, "n={} {row:?} exact {exact}", row.n);
        }
        let u = WalkMeasure::uniform_generators(2).unwrap();
        let t = proper_power_stats(&u, 1, 1000, 1).unwrap();
        assert_eq!(t.rows[0].count, 0);
    }

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5 && lo > 0.39 && hi < 0.61);
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }
}
