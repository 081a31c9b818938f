use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::tensor::{CVec, ImplicitTensorOperator};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Iterative scheme used by [`estimate_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormMethod {
    /// Power iteration on `A*A`.
    Power,
    /// Lanczos on `A*A` with full reorthogonalization.
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub method: NormMethod,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { tol: 1e-6, max_iter: 2000, restarts: 3, method: NormMethod::Power, seed: 0 }
    }
}

/// Lower-biased estimate of `‖A‖` with the spread across restarts.
#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    pub estimate: f64,
    pub restarts: Vec<f64>,
    /// `(max − min)/max` over restarts.
    pub spread: f64,
    pub iterations: usize,
    pub method: NormMethod,
}

fn random_unit(d: usize, seed: u64, index: u64) -> CVec {
    let mut rng = substream(seed, "norm-restart", index);
    let v = CVec::from_fn(d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let nv = v.norm();
    v / Complex64::new(nv, 0.0)
}

fn gram_apply(op: &ImplicitTensorOperator, adj: &ImplicitTensorOperator, x: &CVec) -> CVec {
    adj.apply(&op.apply(x))
}

fn power_run(op: &ImplicitTensorOperator, adj: &ImplicitTensorOperator, start: CVec, opts: &NormOptions) -> (f64, usize, bool) {
    let mut v = start;
    let mut prev = 0.0;
    for it in 1..=opts.max_iter {
        let w = gram_apply(op, adj, &v);
        let lambda = v.dotc(&w).re.max(0.0);
        let nw = w.norm();
        if nw == 0.0 {
            return (0.0, it, true);
        }
        v = w / Complex64::new(nw, 0.0);
        let est = lambda.sqrt();
        if it > 1 && (est - prev).abs() <= opts.tol * 0.1 * est.max(1e-300) {
            return (est, it, true);
        }
        prev = est;
    }
    (prev, opts.max_iter, false)
}

fn lanczos_run(op: &ImplicitTensorOperator, adj: &ImplicitTensorOperator, start: CVec, opts: &NormOptions) -> (f64, usize, bool) {
    let top = lanczos_top(|x| gram_apply(op, adj, x), start, op.dim(), opts.max_iter, opts.tol * 0.1, true);
    (top.0.max(0.0).sqrt(), top.1, top.2)
}

/// Largest Ritz value (or largest in modulus when `largest_only` is false)
/// of a Hermitian operator, by Lanczos with full reorthogonalization.
/// Returns `(value, steps, converged)`.
pub fn lanczos_top(
    apply: impl Fn(&CVec) -> CVec,
    start: CVec,
    dim: usize,
    max_steps: usize,
    tol: f64,
    largest_only: bool,
) -> (f64, usize, bool) {
    let steps = max_steps.min(dim);
    let mut basis: Vec<CVec> = Vec::with_capacity(steps);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = start.clone() / Complex64::new(start.norm(), 0.0);
    let mut prev = f64::NAN;
    let ritz = |alpha: &[f64], beta: &[f64]| -> f64 {
        let (lo, hi) = tridiagonal_extremes(alpha, beta);
        if largest_only {
            hi
        } else {
            hi.abs().max(lo.abs())
        }
    };
    for j in 0..steps {
        basis.push(q.clone());
        let mut w = apply(&q);
        let a = q.dotc(&w).re;
        alpha.push(a);
        // Full reorthogonalization, twice for stability.
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w.axpy(-c, b, Complex64::new(1.0, 0.0));
            }
        }
        let bnorm = w.norm();
        if j % 5 == 4 || bnorm < 1e-12 || j + 1 == steps {
            let cur = ritz(&alpha, &beta);
            if bnorm < 1e-12 || (prev.is_finite() && (cur - prev).abs() <= tol * cur.abs().max(1e-300)) {
                return (cur, j + 1, true);
            }
            prev = cur;
        }
        if j + 1 == steps {
            break;
        }
        beta.push(bnorm);
        q = w / Complex64::new(bnorm, 0.0);
    }
    (prev, steps, steps == dim)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] / d };
        d = alpha[i] - x - off;
        if d == 0.0 {
            d = -f64::EPSILON * (x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalues of a symmetric tridiagonal matrix by
/// Sturm bisection.
pub fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let mut radius: f64 = 0.0;
    let mut g_lo = f64::INFINITY;
    let mut g_hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < m { beta[i].abs() } else { 0.0 };
        g_lo = g_lo.min(alpha[i] - r);
        g_hi = g_hi.max(alpha[i] + r);
        radius = radius.max(alpha[i].abs() + r);
    }
    let bisect = |target: usize| {
        // Smallest x with at least `target` eigenvalues below it.
        let (mut lo, mut hi) = (g_lo - 1e-12 * radius - 1e-300, g_hi + 1e-12 * radius + 1e-300);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * radius {
                break;
            }
            if sturm_count(alpha, beta, mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (bisect(1), bisect(m))
}

/// Estimates `‖op‖` from several seeded restarts. Every restart yields a
/// lower bound; the reported value is their maximum.
pub fn estimate_norm(op: &ImplicitTensorOperator, opts: &NormOptions) -> Result<NormEstimate> {
    let adj = op.adjoint();
    let mut values = Vec::with_capacity(opts.restarts);
    let mut iterations = 0;
    let mut all_converged = true;
    for r in 0..opts.restarts.max(1) {
        let start = random_unit(op.dim(), opts.seed, r as u64);
        let (v, it, ok) = match opts.method {
            NormMethod::Power => power_run(op, &adj, start, opts),
            NormMethod::Lanczos => lanczos_run(op, &adj, start, opts),
        };
        values.push(v);
        iterations = iterations.max(it);
        all_converged &= ok;
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if max > 0.0 { (max - min) / max } else { 0.0 };
    if !all_converged {
        return Err(Error::NonConvergence { iterations, best: max });
    }
    Ok(NormEstimate { estimate: max, restarts: values, spread, iterations, method: opts.method })
}
