use serde::Serialize;

use crate::error::{Error, Result};

/// Slack allowed before a grid estimate is reported as a violation.
const SLACK: f64 = 1e-9;

/// Horner evaluation, coefficients from the constant term up.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn poly_derivative(coeffs: &[f64], k: usize) -> Vec<f64> {
    let mut p = coeffs.to_vec();
    for _ in 0..k {
        if p.is_empty() {
            break;
        }
        p = p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    }
    p
}

fn degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

/// `sup_{[a,b]} |P|` from Chebyshev–Lobatto nodes, with every local
/// maximum polished by Newton steps on `P′`.
pub fn sup_abs(coeffs: &[f64], a: f64, b: f64, grid: usize) -> f64 {
    let m = grid.max(3);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let nodes: Vec<f64> = (0..m).map(|j| mid + half * (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos()).collect();
    let vals: Vec<f64> = nodes.iter().map(|&x| poly_eval(coeffs, x).abs()).collect();
    let d1 = poly_derivative(coeffs, 1);
    let d2 = poly_derivative(coeffs, 2);
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for j in 1..m - 1 {
        if vals[j] >= vals[j - 1] && vals[j] >= vals[j + 1] {
            // nodes decrease with j
            let (lo, hi) = (nodes[j + 1], nodes[j - 1]);
            let mut x = nodes[j];
            for _ in 0..30 {
                let s = poly_eval(&d2, x);
                if s == 0.0 {
                    break;
                }
                let next = (x - poly_eval(&d1, x) / s).clamp(lo, hi);
                if next == x {
                    break;
                }
                x = next;
            }
            best = best.max(poly_eval(coeffs, x).abs());
        }
    }
    best
}

/// `(2/(b−a))^k · D²(D²−1)…(D²−(k−1)²)/(2k−1)!!`.
pub fn markov_bound_factor(d: usize, k: usize, a: f64, b: f64) -> f64 {
    let d2 = (d * d) as f64;
    let mut f = (2.0 / (b - a)).powi(k as i32);
    for i in 0..k {
        f *= (d2 - (i * i) as f64) / (2 * i + 1) as f64;
    }
    f
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovRecord {
    pub degree: usize,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Compares `sup|P^{(k)}|` with the Markov brothers bound on `[a, b]`.
/// The default grid has `64·D` nodes.
pub fn markov_check(coeffs: &[f64], k: usize, a: f64, b: f64, grid: Option<usize>) -> Result<MarkovRecord> {
    let d = degree(coeffs);
    if k == 0 || d < k {
        return Err(Error::argument(format!("Markov check needs 1 <= k <= degree, got k = {k}, D = {d}")));
    }
    if !(a < b) {
        return Err(Error::argument("interval must have a < b"));
    }
    let grid = grid.unwrap_or(64 * d);
    let lhs = sup_abs(&poly_derivative(coeffs, k), a, b, grid);
    let rhs = markov_bound_factor(d, k, a, b) * sup_abs(coeffs, a, b, grid);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    if ratio > 1.0 + SLACK {
        return Err(Error::violation(format!("Markov ratio {ratio} exceeds 1")));
    }
    Ok(MarkovRecord { degree: d, k, lhs, rhs, ratio })
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonNetRecord {
    pub degree: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// `sup_{[0,1/N]} |P|`.
    pub sup_interval: f64,
    /// `max(|P(0)|, max_{N≤n≤cap} |P(1/n)|)`, a lower bound for the sup over `n ≥ N`.
    pub sup_samples: f64,
    /// `1/(1 − D²/(N+1))`.
    pub factor: f64,
    pub sample_cap: usize,
    /// Per `k = 1..D`: `(sup_{[0,1/(2D²)]} |P^{(k)}|, bound)`.
    pub derivative_checks: Vec<(f64, f64)>,
}

fn sup_over_samples(coeffs: &[f64], from: usize, cap: usize) -> f64 {
    (from..=cap).map(|n| poly_eval(coeffs, 1.0 / n as f64).abs()).fold(poly_eval(coeffs, 0.0).abs(), f64::max)
}

/// Checks `sup_{[0,1/N]}|P| ≤ sup_{n≥N}|P(1/n)|/(1 − D²/(N+1))` and the
/// derivative consequence `sup_{[0,1/(2D²)]}|P^{(k)}| ≤ 2^{2k+1}D^{4k}/(2k−1)!! · sup_{n≥D²}|P(1/n)|`.
pub fn epsilon_net_check(coeffs: &[f64], n: usize) -> Result<EpsilonNetRecord> {
    let d = degree(coeffs);
    if n < (d * d).max(1) {
        return Err(Error::argument(format!("epsilon-net check needs N >= D² = {}", d * d)));
    }
    let grid = 64 * d.max(1);
    let cap = (1000 * n).max(10_000);
    let sup_interval = sup_abs(coeffs, 0.0, 1.0 / n as f64, grid);
    let sup_samples = sup_over_samples(coeffs, n, cap);
    let factor = 1.0 / (1.0 - (d * d) as f64 / (n + 1) as f64);
    let scale = sup_interval.max(1e-300);
    if sup_interval > factor * sup_samples + SLACK * scale {
        return Err(Error::violation(format!(
            "sup on [0,1/N] = {sup_interval} exceeds {factor} × {sup_samples}"
        )));
    }
    let mut derivative_checks = Vec::new();
    if d >= 1 {
        let base = sup_over_samples(coeffs, d * d, (1000 * d * d).max(10_000));
        let end = 1.0 / (2.0 * (d * d) as f64);
        let mut double_fact = 1.0;
        for k in 1..=d {
            double_fact *= (2 * k - 1) as f64;
            let lhs = sup_abs(&poly_derivative(coeffs, k), 0.0, end, grid);
            let bound = 2f64.powi(2 * k as i32 + 1) * (d as f64).powi(4 * k as i32) / double_fact * base;
            if lhs > bound * (1.0 + SLACK) {
                return Err(Error::violation(format!("derivative {k}: {lhs} exceeds {bound}")));
            }
            derivative_checks.push((lhs, bound));
        }
    }
    Ok(EpsilonNetRecord { degree: d, n, sup_interval, sup_samples, factor, sample_cap: cap, derivative_checks })
}
