use serde::Serialize;

use crate::error::{Error, Result};

/// Constant used in the reported bound for derivatives of `1/g_L`.
pub const INVERSE_CONSTANT: f64 = 8.0;

/// `m`-th derivative of `h = log g_L` at `t`, for `|t| < 1/L`.
fn log_derivative(l: usize, t: f64, m: usize) -> f64 {
    let fact: f64 = (1..m).map(|x| x as f64).product();
    let mut total = 0.0;
    for c in 1..=l {
        let mult = (l / c) as f64;
        let c = c as f64;
        // log(1 − ct) + log(1 + ct)
        let a = -fact * c.powi(m as i32) / (1.0 - c * t).powi(m as i32);
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let b = sign * fact * c.powi(m as i32) / (1.0 + c * t).powi(m as i32);
        total += mult * (a + b);
    }
    total
}

fn g_value(l: usize, t: f64) -> f64 {
    (1..=l).map(|c| (1.0 - (c * c) as f64 * t * t).powi((l / c) as i32)).product()
}

/// Derivatives `f, f′, …, f^{(i)}` of `f = exp(sign·h)` from
/// `f^{(m)} = Σ_{j<m} C(m−1, j) f^{(j)} (sign·h)^{(m−j)}`.
fn exp_log_derivatives(l: usize, t: f64, i: usize, f0: f64, sign: f64) -> Vec<f64> {
    let h: Vec<f64> = (0..=i).map(|m| if m == 0 { 0.0 } else { sign * log_derivative(l, t, m) }).collect();
    let mut f = vec![f0];
    for m in 1..=i {
        let mut binom = 1.0;
        let mut s = 0.0;
        for j in 0..m {
            s += binom * f[j] * h[m - j];
            binom = binom * (m - 1 - j) as f64 / (j + 1) as f64;
        }
        f.push(s);
    }
    f
}

fn check_domain(l: usize, t: f64) -> Result<()> {
    if l == 0 {
        return Err(Error::argument("g_L needs L >= 1"));
    }
    if !(t.abs() < 1.0 / l as f64) {
        return Err(Error::argument(format!("t = {t} outside |t| < 1/L")));
    }
    Ok(())
}

/// `g_L^{(i)}(t)` for `g_L(t) = ∏_{c≤L} (1 − c²t²)^{⌊L/c⌋}`.
pub fn g_eval(l: usize, t: f64, i: usize) -> Result<f64> {
    check_domain(l, t)?;
    Ok(exp_log_derivatives(l, t, i, g_value(l, t), 1.0)[i])
}

/// `(1/g_L)^{(i)}(t)`.
pub fn g_inverse_eval(l: usize, t: f64, i: usize) -> Result<f64> {
    check_domain(l, t)?;
    Ok(exp_log_derivatives(l, t, i, 1.0 / g_value(l, t), -1.0)[i])
}

#[derive(Clone, Debug, Serialize)]
pub struct GBoundRecord {
    #[serde(rename = "L")]
    pub l: usize,
    pub i: usize,
    pub grid: usize,
    pub min_g: f64,
    pub max_g: f64,
    pub max_derivative: f64,
    /// `(3iL^{3/2})^i`.
    pub derivative_bound: f64,
    pub max_inverse_derivative: f64,
    /// `2·i!·(C√i L^{3/2})^i` with `C =` [`INVERSE_CONSTANT`].
    pub inverse_bound: f64,
    pub inverse_constant: f64,
    pub inverse_bound_holds: bool,
}

/// Checks `½ ≤ g_L ≤ 1` and `|g_L^{(i)}| ≤ (3iL^{3/2})^i` on a uniform grid
/// of `[0, 1/(2L²)]`; the `1/g_L` bound is reported, not enforced.
pub fn g_derivative_bound_check(l: usize, i: usize, grid: usize) -> Result<GBoundRecord> {
    if l == 0 || l > 20 || i > 12 || grid < 2 {
        return Err(Error::argument("g bound check needs 1 <= L <= 20, i <= 12 and grid >= 2"));
    }
    let end = 1.0 / (2.0 * (l * l) as f64);
    let l32 = (l as f64).powf(1.5);
    let derivative_bound = (3.0 * i as f64 * l32).powi(i as i32);
    let fact: f64 = (1..=i).map(|x| x as f64).product();
    let inverse_bound = 2.0 * fact * (INVERSE_CONSTANT * (i as f64).sqrt() * l32).powi(i as i32);
    let mut rec = GBoundRecord {
        l,
        i,
        grid,
        min_g: f64::INFINITY,
        max_g: f64::NEG_INFINITY,
        max_derivative: 0.0,
        derivative_bound,
        max_inverse_derivative: 0.0,
        inverse_bound,
        inverse_constant: INVERSE_CONSTANT,
        inverse_bound_holds: true,
    };
    for s in 0..grid {
        let t = end * s as f64 / (grid - 1) as f64;
        let g = g_value(l, t);
        rec.min_g = rec.min_g.min(g);
        rec.max_g = rec.max_g.max(g);
        rec.max_derivative = rec.max_derivative.max(g_eval(l, t, i)?.abs());
        rec.max_inverse_derivative = rec.max_inverse_derivative.max(g_inverse_eval(l, t, i)?.abs());
    }
    rec.inverse_bound_holds = rec.max_inverse_derivative <= rec.inverse_bound;
    if rec.min_g < 0.5 || rec.max_g > 1.0 {
        return Err(Error::violation(format!("g_{l} leaves [1/2, 1]: range [{}, {}]", rec.min_g, rec.max_g)));
    }
    if rec.max_derivative > derivative_bound * (1.0 + 1e-12) {
        return Err(Error::violation(format!(
            "|g_{l}^({i})| reaches {} above (3iL^1.5)^i = {derivative_bound}",
            rec.max_derivative
        )));
    }
    Ok(rec)
}
