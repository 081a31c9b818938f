use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::tensor::{phi_wiring, CVec, ImplicitTensorOperator, TensorOp};
use super::weyl::stable_dim;
use crate::error::{Error, Result};
use crate::symgroup::{all_perms, Partition, Perm};
use crate::weingarten::z_element;

/// Largest `n^{k+ℓ}` accepted by [`q_projector`].
pub const Q_CAP: usize = 10_000;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `q = D_{λ,μ}(n)·Φ(z)`, the orthogonal projection onto the isotypic
/// component of `s_{λ,μ}` inside `(Cⁿ)^{⊗k} ⊗ ((Cⁿ)^∨)^{⊗ℓ}`.
pub fn q_projector(lambda: &Partition, mu: &Partition, n: usize) -> Result<ImplicitTensorOperator> {
    let (k, l) = (lambda.size(), mu.size());
    if n < k + l {
        return Err(Error::argument(format!("q needs n >= k+ℓ = {}, got {n}", k + l)));
    }
    let dim = (n as u128).pow((k + l) as u32);
    if dim > Q_CAP as u128 {
        return Err(Error::unsupported(format!("q is limited to n^(k+ℓ) <= {Q_CAP}, got {dim}")));
    }
    let z = z_element(lambda, mu)?;
    let d: f64 = stable_dim(lambda, mu, n)?.to_string().parse().unwrap();
    let terms = z
        .eval_f64(n as f64)
        .into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(p, v)| TensorOp::Scaled(c(d * v), Box::new(TensorOp::Perm(p))))
        .collect();
    ImplicitTensorOperator::new(n, k, l, TensorOp::Sum(terms))
}

/// The vector of `Φ(σ)` for `σ ∈ S_k`, as an element of `(Cⁿ)^{⊗k}⊗((Cⁿ)^∨)^{⊗k}`:
/// entries `∏_a δ(i_{σ(a)} = j_a)`.
pub fn permutation_vector(n: usize, sigma: &Perm) -> CVec {
    let k = sigma.degree();
    let m = 2 * k;
    let mut v = CVec::zeros(n.pow(m as u32));
    let mut idx = vec![0usize; k];
    loop {
        // i = idx, j_a = i_{σ(a)}
        let mut lin = 0;
        for &i in &idx {
            lin = lin * n + i;
        }
        for a in 0..k {
            lin = lin * n + idx[sigma.apply(a)];
        }
        v[lin] = c(1.0);
        let mut p = k;
        loop {
            if p == 0 {
                return v;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < n {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Orthogonal projection onto the U(n)-invariant vectors, spanned by the
/// `Φ(σ)`, `σ ∈ S_k`; the zero operator unless `k = ℓ`.
pub fn invariant_projector(k: usize, l: usize, n: usize) -> Result<ImplicitTensorOperator> {
    if k != l || k == 0 {
        return if k == 0 && l == 0 {
            ImplicitTensorOperator::identity(n, 0, 0)
        } else {
            ImplicitTensorOperator::zero(n, k, l)
        };
    }
    if k > 4 {
        return Err(Error::unsupported(format!("invariant projector limited to k <= 4, got {k}")));
    }
    if n < k {
        return Err(Error::argument(format!("invariant projector needs n >= k = {k}, got {n}")));
    }
    let perms = all_perms(k);
    let vectors: Vec<CVec> = perms.iter().map(|s| permutation_vector(n, s)).collect();
    let m = perms.len();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        c((n as f64).powi(perms[i].inverse().compose(&perms[j]).num_cycles() as i32))
    });
    let inv = gram.try_inverse().ok_or_else(|| Error::argument("singular Gram matrix"))?;
    ImplicitTensorOperator::new(n, k, l, TensorOp::LowRank { vectors: Arc::new(vectors), coeffs: Arc::new(inv) })
}

/// Numerical checks that `q` is an orthogonal projection with invariant image.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectorReport {
    pub n: usize,
    pub trace: f64,
    pub expected_trace: f64,
    pub idempotence: f64,
    pub self_adjointness: f64,
    pub commutator: f64,
    pub contraction: f64,
}

/// Dense checks of `q`: `q² = q`, `q = q*`, `Tr q`, commutation with
/// `π⁰(U)` for the given unitaries, and the mixed contractions vanishing.
pub fn check_q(lambda: &Partition, mu: &Partition, n: usize, unitaries: &[DMatrix<Complex64>]) -> Result<ProjectorReport> {
    let (k, l) = (lambda.size(), mu.size());
    let q = q_projector(lambda, mu, n)?;
    let dq = q.to_dense()?;
    let sup = |m: &DMatrix<Complex64>| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let idempotence = sup(&(&dq * &dq - &dq));
    let self_adjointness = sup(&(&dq - dq.adjoint()));
    let trace = dq.trace().re;
    let expected_trace: f64 = stable_dim(lambda, mu, n)?.to_string().parse().unwrap();
    let mut commutator = 0.0f64;
    for u in unitaries {
        let g = ImplicitTensorOperator::pi0(k, l, u.clone())?.to_dense()?;
        commutator = commutator.max(sup(&(&g * &dq - &dq * &g)));
    }
    Ok(ProjectorReport {
        n,
        trace,
        expected_trace,
        idempotence,
        self_adjointness,
        commutator,
        contraction: contraction_residual(&dq, n, k, l),
    })
}

/// Largest `|Σ_u q_{I,J}|` over contractions of one covariant and one
/// contravariant leg, on the input side and on the output side.
pub fn contraction_residual(q: &DMatrix<Complex64>, n: usize, k: usize, l: usize) -> f64 {
    let m = k + l;
    let d = q.nrows();
    let place: Vec<usize> = (0..m).map(|a| n.pow((m - 1 - a) as u32)).collect();
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in k..m {
            for row in 0..d {
                for col in 0..d {
                    // Enumerate each contraction once: legs a and b of col start at 0.
                    if !(col / place[a]).is_multiple_of(n) || !(col / place[b]).is_multiple_of(n) {
                        continue;
                    }
                    let mut s_in = Complex64::new(0.0, 0.0);
                    let mut s_out = Complex64::new(0.0, 0.0);
                    for u in 0..n {
                        let shifted = col + u * (place[a] + place[b]);
                        s_in += q[(row, shifted)];
                        s_out += q[(shifted, row)];
                    }
                    worst = worst.max(s_in.norm()).max(s_out.norm());
                }
            }
        }
    }
    worst
}

/// `Tr(Φ(π))` at dimension `n`, from the wiring of `Φ(π)`.
pub fn phi_trace(n: usize, k: usize, pi: &Perm) -> f64 {
    let m = pi.degree();
    let w = phi_wiring(m, k, pi);
    // Count loops: identify output slot i with input slot i (the trace), then
    // union the wiring edges.
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(s, t) in w.out_pairs.iter().chain(&w.in_pairs).chain(&w.through) {
        let (a, b) = (find(&mut parent, s), find(&mut parent, t));
        parent[a] = b;
    }
    let loops = (0..m).filter(|&i| find(&mut parent, i) == i).count();
    (n as f64).powi(loops as i32)
}

/// `s_{λ,μ}(g)` computed as `Tr(q·π⁰(g))`.
pub fn character_via_projector(lambda: &Partition, mu: &Partition, g: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = g.nrows();
    let q = q_projector(lambda, mu, n)?;
    let a = ImplicitTensorOperator::pi0(lambda.size(), mu.size(), g.clone())?;
    Ok(q.then_after(&a).to_dense()?.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::haar::{eigenvalues, haar_unitary};
    use crate::montecarlo::weyl::weyl_character_eval;
    use crate::rng::substream;
    use crate::symgroup::partitions_of;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn adjoint_projector_at_four() {
        let us: Vec<_> = (0..3).map(|i| haar_unitary(4, &mut substream(21, "u", i))).collect();
        let r = check_q(&p(&[1]), &p(&[1]), 4, &us).unwrap();
        assert!((r.trace - 15.0).abs() < 1e-10);
        assert!(r.idempotence < 1e-10);
        assert!(r.self_adjointness < 1e-12);
        assert!(r.commutator < 1e-10);
        assert!(r.contraction < 1e-12);
    }

    #[test]
    fn all_small_projectors() {
        for a in 0..=3usize {
            for b in 0..=(3 - a) {
                if a + b == 0 {
                    continue;
                }
                for l in partitions_of(a).unwrap() {
                    for m in partitions_of(b).unwrap() {
                        let n = (a + b).max(l.length() + m.length()).max(2);
                        let us = vec![haar_unitary(n, &mut substream(22, "u", n as u64))];
                        let r = check_q(&l, &m, n, &us).unwrap();
                        assert!((r.trace - r.expected_trace).abs() < 1e-8, "λ={l} μ={m} {r:?}");
                        assert!(r.idempotence < 1e-9 && r.commutator < 1e-9 && r.contraction < 1e-9, "{r:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn projector_route_matches_weyl_character() {
        let n = 4;
        let g = haar_unitary(n, &mut substream(23, "g", 0));
        let ev = eigenvalues(&g);
        for (l, m) in [(p(&[1]), p(&[1])), (p(&[2]), Partition::empty()), (p(&[1, 1]), p(&[1])), (p(&[2]), p(&[1]))] {
            let a = character_via_projector(&l, &m, &g).unwrap();
            let b = weyl_character_eval(&l, &m, &ev).unwrap();
            assert!((a - b).norm() < 1e-9, "λ={l} μ={m}: {a} vs {b}");
        }
    }

    #[test]
    fn invariant_projector_ranks() {
        for (k, n) in [(1, 3), (2, 4), (2, 2), (3, 3)] {
            let pr = invariant_projector(k, k, n).unwrap();
            let d = pr.to_dense().unwrap();
            let rank = (1..=k).product::<usize>() as f64;
            assert!((d.trace().re - rank).abs() < 1e-9);
            assert!((&d * &d - &d).norm() < 1e-9);
        }
        let z = invariant_projector(2, 1, 3).unwrap();
        assert!(matches!(z.root, TensorOp::Zero));
        // k = ℓ = 1: the normalized identity tensor.
        let d = invariant_projector(1, 1, 3).unwrap().to_dense().unwrap();
        assert!((d[(0, 4)].re - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn phi_trace_matches_dense() {
        for (n, k, l) in [(3, 1, 1), (2, 2, 1), (2, 1, 2)] {
            for pi in all_perms(k + l) {
                let d = ImplicitTensorOperator::phi(n, k, l, pi.clone()).unwrap().to_dense().unwrap();
                assert!((d.trace().re - phi_trace(n, k, &pi)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn caps() {
        assert!(q_projector(&p(&[1]), &p(&[1]), 200).is_err());
        assert!(q_projector(&p(&[2]), &p(&[1]), 2).is_err());
    }
}
