use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::symgroup::Perm;

pub type CVec = DVector<Complex64>;

/// Largest vector length an operator may act on.
pub const APPLY_CAP: usize = 10_000_000;
/// Largest dimension materialized by [`ImplicitTensorOperator::to_dense`].
pub const DENSE_CAP: usize = 2048;

/// Expression tree of primitive actions on `(Cⁿ)^{⊗k} ⊗ ((Cⁿ)^∨)^{⊗ℓ}`.
#[derive(Clone, Debug)]
pub enum TensorOp {
    Identity,
    Zero,
    /// `π⁰(U) = U^{⊗k} ⊗ Ū^{⊗ℓ}`.
    Local(Arc<DMatrix<Complex64>>),
    /// `Φ(π)` for `π ∈ S_{k+ℓ}`.
    Perm(Perm),
    Dense(Arc<DMatrix<Complex64>>),
    /// `Σ_{ij} v_i C_{ij} ⟨v_j, ·⟩`.
    LowRank { vectors: Arc<Vec<CVec>>, coeffs: Arc<DMatrix<Complex64>> },
    Scaled(Complex64, Box<TensorOp>),
    Sum(Vec<TensorOp>),
    /// Matrix product: the last factor acts first.
    Product(Vec<TensorOp>),
    Adjoint(Box<TensorOp>),
}

/// Matrix-free operator of dimension `n^{k+ℓ}`. Vectors are row-major in
/// the tensor indices, the first factor most significant.
#[derive(Clone, Debug)]
pub struct ImplicitTensorOperator {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub root: TensorOp,
}

impl ImplicitTensorOperator {
    pub fn new(n: usize, k: usize, l: usize, root: TensorOp) -> Result<Self> {
        let dim = (n as u128).pow((k + l) as u32);
        if dim > APPLY_CAP as u128 {
            return Err(Error::unsupported(format!("tensor dimension {dim} exceeds the cap {APPLY_CAP}")));
        }
        let op = ImplicitTensorOperator { n, k, l, root };
        op.validate(&op.root)?;
        Ok(op)
    }

    fn validate(&self, node: &TensorOp) -> Result<()> {
        let dim = self.dim();
        match node {
            TensorOp::Local(u) if u.nrows() != self.n || u.ncols() != self.n => {
                Err(Error::Shape(format!("local factor is {}x{}, expected n = {}", u.nrows(), u.ncols(), self.n)))
            }
            TensorOp::Perm(p) if p.degree() != self.k + self.l => {
                Err(Error::Shape(format!("permutation of degree {} on {} factors", p.degree(), self.k + self.l)))
            }
            TensorOp::Dense(m) if m.nrows() != dim || m.ncols() != dim => {
                Err(Error::Shape(format!("dense block {}x{} on dimension {dim}", m.nrows(), m.ncols())))
            }
            TensorOp::LowRank { vectors, coeffs } => {
                if vectors.iter().any(|v| v.len() != dim) || coeffs.nrows() != vectors.len() || coeffs.ncols() != vectors.len() {
                    return Err(Error::Shape("low-rank factor dimensions disagree".into()));
                }
                Ok(())
            }
            TensorOp::Scaled(_, x) | TensorOp::Adjoint(x) => self.validate(x),
            TensorOp::Sum(xs) | TensorOp::Product(xs) => xs.iter().try_for_each(|x| self.validate(x)),
            _ => Ok(()),
        }
    }

    pub fn identity(n: usize, k: usize, l: usize) -> Result<Self> {
        Self::new(n, k, l, TensorOp::Identity)
    }

    pub fn zero(n: usize, k: usize, l: usize) -> Result<Self> {
        Self::new(n, k, l, TensorOp::Zero)
    }

    pub fn pi0(k: usize, l: usize, u: DMatrix<Complex64>) -> Result<Self> {
        Self::new(u.nrows(), k, l, TensorOp::Local(Arc::new(u)))
    }

    pub fn phi(n: usize, k: usize, l: usize, pi: Perm) -> Result<Self> {
        Self::new(n, k, l, TensorOp::Perm(pi))
    }

    pub fn dim(&self) -> usize {
        self.n.pow((self.k + self.l) as u32)
    }

    fn with(&self, root: TensorOp) -> Self {
        ImplicitTensorOperator { n: self.n, k: self.k, l: self.l, root }
    }

    fn check_same(&self, other: &Self) {
        assert!(
            self.n == other.n && self.k == other.k && self.l == other.l,
            "operators act on different spaces"
        );
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.with(TensorOp::Scaled(c, Box::new(self.root.clone())))
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.check_same(other);
        self.with(TensorOp::Sum(vec![self.root.clone(), other.root.clone()]))
    }

    pub fn sum(ops: &[Self]) -> Self {
        let first = &ops[0];
        ops.iter().for_each(|o| first.check_same(o));
        first.with(TensorOp::Sum(ops.iter().map(|o| o.root.clone()).collect()))
    }

    /// `self ∘ other`.
    pub fn then_after(&self, other: &Self) -> Self {
        self.check_same(other);
        self.with(TensorOp::Product(vec![self.root.clone(), other.root.clone()]))
    }

    /// Wraps the tree in an adjoint node.
    pub fn adjoint_node(&self) -> Self {
        self.with(TensorOp::Adjoint(Box::new(self.root.clone())))
    }

    /// Pushes the adjoint down to the leaves.
    pub fn adjoint(&self) -> Self {
        self.with(adjoint_tree(&self.root))
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        assert_eq!(x.len(), self.dim(), "vector length mismatch");
        self.apply_node(&self.root, x)
    }

    fn apply_node(&self, node: &TensorOp, x: &CVec) -> CVec {
        match node {
            TensorOp::Identity => x.clone(),
            TensorOp::Zero => CVec::zeros(x.len()),
            TensorOp::Local(u) => {
                let ubar = (self.l > 0).then(|| u.map(|z| z.conj()));
                let mut v = x.clone();
                for pos in 0..self.k + self.l {
                    let m = if pos < self.k { u.as_ref() } else { ubar.as_ref().unwrap() };
                    v = apply_factor(&v, self.n, self.k + self.l, pos, m);
                }
                v
            }
            TensorOp::Perm(p) => apply_phi(x, self.n, self.k, p),
            TensorOp::Dense(m) => m.as_ref() * x,
            TensorOp::LowRank { vectors, coeffs } => {
                let dots = DVector::from_iterator(vectors.len(), vectors.iter().map(|v| v.dotc(x)));
                let c = coeffs.as_ref() * dots;
                let mut out = CVec::zeros(x.len());
                for (v, ci) in vectors.iter().zip(c.iter()) {
                    out.axpy(*ci, v, Complex64::new(1.0, 0.0));
                }
                out
            }
            TensorOp::Scaled(c, inner) => self.apply_node(inner, x) * *c,
            TensorOp::Sum(xs) => {
                let mut out = CVec::zeros(x.len());
                for t in xs {
                    out += self.apply_node(t, x);
                }
                out
            }
            TensorOp::Product(xs) => {
                let mut v = x.clone();
                for t in xs.iter().rev() {
                    v = self.apply_node(t, &v);
                }
                v
            }
            TensorOp::Adjoint(inner) => self.apply_node(&adjoint_tree(inner), x),
        }
    }

    /// Dense matrix, for dimensions up to [`DENSE_CAP`].
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let d = self.dim();
        if d > DENSE_CAP {
            return Err(Error::unsupported(format!("dense materialization limited to {DENSE_CAP}, got {d}")));
        }
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = CVec::zeros(d);
            e[j] = Complex64::new(1.0, 0.0);
            m.set_column(j, &self.apply(&e));
        }
        Ok(m)
    }
}

fn adjoint_tree(node: &TensorOp) -> TensorOp {
    match node {
        TensorOp::Identity => TensorOp::Identity,
        TensorOp::Zero => TensorOp::Zero,
        TensorOp::Local(u) => TensorOp::Local(Arc::new(u.adjoint())),
        TensorOp::Perm(p) => TensorOp::Perm(p.inverse()),
        TensorOp::Dense(m) => TensorOp::Dense(Arc::new(m.adjoint())),
        TensorOp::LowRank { vectors, coeffs } => {
            TensorOp::LowRank { vectors: vectors.clone(), coeffs: Arc::new(coeffs.adjoint()) }
        }
        TensorOp::Scaled(c, x) => TensorOp::Scaled(c.conj(), Box::new(adjoint_tree(x))),
        TensorOp::Sum(xs) => TensorOp::Sum(xs.iter().map(adjoint_tree).collect()),
        TensorOp::Product(xs) => TensorOp::Product(xs.iter().rev().map(adjoint_tree).collect()),
        TensorOp::Adjoint(x) => (**x).clone(),
    }
}

/// Applies `a` to tensor factor `pos` of an `m`-fold tensor.
pub fn apply_factor(x: &CVec, n: usize, m: usize, pos: usize, a: &DMatrix<Complex64>) -> CVec {
    let stride = n.pow((m - 1 - pos) as u32);
    let block = n * stride;
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    let xs = x.as_slice();
    // Each block is a row-major n×stride matrix Y, mapped to a·Y.
    let kernel = |(o, dst): (usize, &mut [Complex64])| {
        let src = DMatrixView::from_slice_with_strides(&xs[o * block..(o + 1) * block], n, stride, stride, 1);
        let mut dst = DMatrixViewMut::from_slice_with_strides_mut(dst, n, stride, stride, 1);
        dst.gemm(Complex64::new(1.0, 0.0), a, &src, Complex64::new(0.0, 0.0));
    };
    if x.len() >= 1 << 15 && x.len() > block {
        out.par_chunks_mut(block).enumerate().for_each(kernel);
    } else {
        out.chunks_mut(block).enumerate().for_each(kernel);
    }
    CVec::from_vec(out)
}

/// Slot matching of `Φ(π)`: the permutation operator of `π` with its last
/// `ℓ` tensor legs transposed. Slots `0..m` are output indices, `m..2m`
/// input indices.
pub(crate) struct PhiWiring {
    /// Output slots forced equal.
    pub out_pairs: Vec<(usize, usize)>,
    /// Input slots summed together.
    pub in_pairs: Vec<(usize, usize)>,
    /// `(output slot, input slot)` copied through.
    pub through: Vec<(usize, usize)>,
}

pub(crate) fn phi_wiring(m: usize, k: usize, pi: &Perm) -> PhiWiring {
    let x = |b: usize| if b < k { b } else { m + b };
    let y = |a: usize| if a < k { m + a } else { a };
    let mut w = PhiWiring { out_pairs: vec![], in_pairs: vec![], through: vec![] };
    for a in 0..m {
        let (s, t) = (x(pi.apply(a)), y(a));
        match (s < m, t < m) {
            (true, true) => w.out_pairs.push((s, t)),
            (false, false) => w.in_pairs.push((s - m, t - m)),
            (true, false) => w.through.push((s, t - m)),
            (false, true) => w.through.push((t, s - m)),
        }
    }
    w
}

fn apply_phi(x: &CVec, n: usize, k: usize, pi: &Perm) -> CVec {
    let m = pi.degree();
    let w = phi_wiring(m, k, pi);
    let place: Vec<usize> = (0..m).map(|a| n.pow((m - 1 - a) as u32)).collect();
    let traces = w.in_pairs.len();
    let trace_steps = n.pow(traces as u32);
    let xs = x.as_slice();
    let out: Vec<Complex64> = (0..x.len())
        .into_par_iter()
        .map(|idx| {
            let digit = |a: usize| (idx / place[a]) % n;
            if w.out_pairs.iter().any(|&(s, t)| digit(s) != digit(t)) {
                return Complex64::new(0.0, 0.0);
            }
            let base: usize = w.through.iter().map(|&(o, i)| digit(o) * place[i]).sum();
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..trace_steps {
                let mut off = base;
                let mut rest = t;
                for &(a, b) in &w.in_pairs {
                    let v = rest % n;
                    rest /= n;
                    off += v * (place[a] + place[b]);
                }
                acc += xs[off];
            }
            acc
        })
        .collect();
    CVec::from_vec(out)
}
