use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Terms summed explicitly in the normalization.
const NORMALIZATION_TERMS: usize = 1 << 20;
/// Products are truncated where `t·a_j ≤ TAIL_ARGUMENT`.
const TAIL_ARGUMENT: f64 = 0.1;
/// Truncation points are `BASE_TRUNCATION·2^m`.
const BASE_TRUNCATION: usize = 64;
const TRUNCATION_LEVELS: usize = 22;
const STORED_TERMS: usize = 1 << 16;

/// `log sinc x = Σ_m LOG_SINC[m]·x^{2m+2}` for the first terms.
const LOG_SINC: [f64; 3] = [-1.0 / 6.0, -1.0 / 180.0, -1.0 / 2835.0];

/// Law of `Σ_j a_j X_j` with `X_j` uniform on `[−1, 1]` and
/// `a_j = c/(j·log(2+j)^{1+ε})`, normalized so that `Σ a_j = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct BumpProfile {
    pub epsilon: f64,
    pub c: f64,
    /// Terms summed explicitly when normalizing.
    pub truncation: usize,
    /// `Σ_{j≤J} a_j`.
    pub partial_sum: f64,
    /// `Σ_{j>J} a_j`, from the integral and Euler–Maclaurin corrections.
    pub tail_sum: f64,
    /// `inf_t −log|μ̂(t)|·log(2+t)^{1+ε}/t` over the fitting grid.
    pub fitted_m: f64,
    pub fit_range: (f64, f64),
    #[serde(skip)]
    stored: Vec<f64>,
    /// `tails[level][p] = Σ_{j>J_level} a_j^{2p+2}` for `p = 0, 1, 2, 3`.
    #[serde(skip)]
    tails: Vec<[f64; 4]>,
}

fn unnormalized(eps: f64, j: f64) -> f64 {
    1.0 / (j * (2.0 + j).ln().powf(1.0 + eps))
}

/// Composite Simpson rule on `[a, b]`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `Σ_{j>J} u_j^p` for `u_j = 1/(j·log(2+j)^{1+ε})`.
fn unnormalized_tail(eps: f64, big_j: usize, p: u32) -> f64 {
    // Sum a stretch explicitly so the Euler–Maclaurin remainder is negligible.
    let head: f64 = (big_j + 1..=big_j + 1024).rev().map(|j| unnormalized(eps, j as f64).powi(p as i32)).sum();
    head + euler_maclaurin_tail(eps, big_j + 1024, p)
}

fn euler_maclaurin_tail(eps: f64, big_j: usize, p: u32) -> f64 {
    let jf = big_j as f64;
    let e1 = 1.0 + eps;
    let integral = if p == 1 {
        // x = J·e^s turns the integrand into log(2+Je^s)^{−(1+ε)}; its
        // leading part (log J + s)^{−(1+ε)} integrates in closed form.
        let l0 = jf.ln();
        let correction = simpson(
            |s| (2.0 + jf * s.exp()).ln().powf(-e1) - (l0 + s).powf(-e1),
            0.0,
            40.0,
            4000,
        );
        l0.powf(-eps) / eps + correction
    } else {
        let pf = p as f64;
        simpson(
            |s| {
                let x = jf * s.exp();
                x * unnormalized(eps, x).powf(pf)
            },
            0.0,
            60.0 / (pf - 1.0),
            4000,
        )
    };
    let f = unnormalized(eps, jf).powi(p as i32);
    let dlog = -(p as f64) * (1.0 / jf + e1 / ((2.0 + jf) * (2.0 + jf).ln()));
    // Σ_{j>J} f(j) = ∫_J^∞ f − f(J)/2 − f′(J)/12 + …
    integral - f / 2.0 - f * dlog / 12.0
}

impl BumpProfile {
    pub fn new(epsilon: f64) -> Result<BumpProfile> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::argument("bump profile needs ε > 0"));
        }
        let head: f64 = (1..=NORMALIZATION_TERMS).rev().map(|j| unnormalized(epsilon, j as f64)).sum();
        let tail = unnormalized_tail(epsilon, NORMALIZATION_TERMS, 1);
        let c = 1.0 / (head + tail);
        let stored = (1..=STORED_TERMS).map(|j| c * unnormalized(epsilon, j as f64)).collect();
        let tails = (0..TRUNCATION_LEVELS)
            .map(|level| {
                let j = BASE_TRUNCATION << level;
                let mut out = [0.0; 4];
                for (p, slot) in out.iter_mut().enumerate() {
                    let power = 2 * p as u32 + 2;
                    *slot = c.powi(power as i32) * unnormalized_tail(epsilon, j, power);
                }
                out
            })
            .collect();
        let mut profile = BumpProfile {
            epsilon,
            c,
            truncation: NORMALIZATION_TERMS,
            partial_sum: c * head,
            tail_sum: c * tail,
            fitted_m: 0.0,
            fit_range: (1.0, 1e4),
            stored,
            tails,
        };
        profile.fitted_m = profile.fit_decay(1.0, 1e4, 1000);
        Ok(profile)
    }

    /// `a_j` for `j ≥ 1`.
    pub fn a(&self, j: usize) -> f64 {
        assert!(j >= 1, "coefficients start at j = 1");
        self.stored.get(j - 1).copied().unwrap_or_else(|| self.c * unnormalized(self.epsilon, j as f64))
    }

    /// `μ̂(t) = ∏_j sin(t a_j)/(t a_j)` with truncation data.
    pub fn fourier(&self, t: f64) -> Result<FourierValue> {
        let t = t.abs();
        if t == 0.0 {
            return Ok(FourierValue { t, value: 1.0, truncation: 0, tail_log: 0.0, tail_error: 0.0 });
        }
        let level = (0..TRUNCATION_LEVELS)
            .find(|&l| t * self.a((BASE_TRUNCATION << l) + 1) <= TAIL_ARGUMENT)
            .ok_or_else(|| Error::unsupported(format!("t = {t} needs more than {} factors", BASE_TRUNCATION << (TRUNCATION_LEVELS - 1))))?;
        let big_j = BASE_TRUNCATION << level;
        let mut value = 1.0;
        let mut log_abs = 0.0;
        for j in 1..=big_j {
            let x = t * self.a(j);
            let s = x.sin() / x;
            if s == 0.0 {
                value = 0.0;
                break;
            }
            log_abs += s.abs().ln();
            if s < 0.0 {
                value = -value;
            }
        }
        let sums = &self.tails[level];
        let tail_log: f64 = LOG_SINC.iter().enumerate().map(|(p, k)| k * t.powi(2 * p as i32 + 2) * sums[p]).sum();
        // Remaining series terms are bounded by x⁸/37800 times a geometric factor.
        let tail_error = t.powi(8) * sums[3] / 37800.0 / (1.0 - TAIL_ARGUMENT * TAIL_ARGUMENT);
        if value != 0.0 {
            value *= (log_abs + tail_log).exp();
        }
        Ok(FourierValue { t, value, truncation: big_j, tail_log, tail_error })
    }

    /// `∏_{j ≤ t/log(2+t)^{1+ε}} 1/(t a_j)`, as a logarithm.
    pub fn log_envelope(&self, t: f64) -> f64 {
        let t = t.abs();
        let upto = (t / (2.0 + t).ln().powf(1.0 + self.epsilon)).floor() as usize;
        (1..=upto).map(|j| -(t * self.a(j)).ln()).sum()
    }

    /// `−log|μ̂(t)|·log(2+t)^{1+ε}/t`.
    pub fn decay_ratio(&self, t: f64) -> Result<f64> {
        let v = self.fourier(t)?.value.abs();
        Ok(if v == 0.0 { f64::INFINITY } else { -v.ln() * (2.0 + t).ln().powf(1.0 + self.epsilon) / t })
    }

    /// Infimum of [`decay_ratio`](Self::decay_ratio) over a log-spaced grid.
    pub fn fit_decay(&self, t_min: f64, t_max: f64, points: usize) -> f64 {
        log_grid(t_min, t_max, points)
            .filter_map(|t| self.decay_ratio(t).ok())
            .fold(f64::INFINITY, f64::min)
    }

    /// `exp(−M|t|/log(2+|t|)^{1+ε})` with the fitted `M`.
    pub fn decay_bound(&self, t: f64) -> f64 {
        let t = t.abs();
        (-self.fitted_m * t / (2.0 + t).ln().powf(1.0 + self.epsilon)).exp()
    }

    /// Fourier coefficient of `φ_α(θ) = f(θ/α)` on `R/2πZ`: `(α/2π)·μ̂(kα)`.
    pub fn periodized_coefficient(&self, alpha: f64, k: i64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(Error::argument("periodization needs 0 < α < π"));
        }
        Ok(alpha / (2.0 * PI) * self.fourier(k as f64 * alpha)?.value)
    }

    /// Checks `|φ̂_α(k)| ≤ exp(−M|k|α/log(2+|k|α)^{1+ε})` for `|k| ≤ k_max`.
    pub fn periodized_check(&self, alpha: f64, k_max: i64) -> Result<PeriodizedRecord> {
        let mut worst = f64::NEG_INFINITY;
        let mut worst_k = 0;
        for k in 0..=k_max {
            let v = self.periodized_coefficient(alpha, k)?.abs();
            let bound = self.decay_bound(k as f64 * alpha);
            let excess = if v == 0.0 { f64::NEG_INFINITY } else { v.ln() - bound.ln() };
            if excess > worst {
                worst = excess;
                worst_k = k;
            }
        }
        Ok(PeriodizedRecord { alpha, k_max, fitted_m: self.fitted_m, worst_log_excess: worst, worst_k, holds: worst <= 0.0 })
    }
}

fn log_grid(t_min: f64, t_max: f64, points: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (t_min.ln(), t_max.ln());
    let steps = points.max(2) - 1;
    (0..=steps).map(move |i| (a + (b - a) * i as f64 / steps as f64).exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierValue {
    pub t: f64,
    pub value: f64,
    /// Factors multiplied explicitly.
    pub truncation: usize,
    /// Series value of `log ∏_{j>J} sinc(t a_j)`.
    pub tail_log: f64,
    /// Bound on the error of `tail_log`.
    pub tail_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodizedRecord {
    pub alpha: f64,
    pub k_max: i64,
    pub fitted_m: f64,
    /// `max_k log|φ̂_α(k)| − log bound(k)`.
    pub worst_log_excess: f64,
    pub worst_k: i64,
    pub holds: bool,
}

/// `μ̂(t)` for the profile.
pub fn bump_fourier(profile: &BumpProfile, t: f64) -> Result<f64> {
    Ok(profile.fourier(t)?.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct BumpRow {
    pub t: f64,
    pub fourier: f64,
    /// `∏_{j ≤ t/log(2+t)^{1+ε}} 1/(t a_j)`, capped at 1.
    pub envelope: f64,
    /// `exp(−M t/log(2+t)^{1+ε})`.
    pub decay_bound: f64,
}

/// Rows on a log-spaced grid of `[1, t_max]`.
pub fn bump_table(profile: &BumpProfile, t_max: f64, points: usize) -> Result<Vec<BumpRow>> {
    if !(t_max >= 1.0) {
        return Err(Error::argument("tmax must be at least 1"));
    }
    log_grid(1.0, t_max, points)
        .map(|t| {
            Ok(BumpRow {
                t,
                fourier: bump_fourier(profile, t)?,
                envelope: profile.log_envelope(t).min(0.0).exp(),
                decay_bound: profile.decay_bound(t),
            })
        })
        .collect()
}
