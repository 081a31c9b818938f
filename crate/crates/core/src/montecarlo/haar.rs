use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::substream;

/// Compact group a tuple is sampled from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Group {
    #[serde(rename = "U(n)")]
    Unitary,
    #[serde(rename = "SU(n)")]
    SpecialUnitary,
}

/// Haar unitary: QR of a complex Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`, which makes the law exactly invariant.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Haar element of SU(n). If `U` is Haar on U(n) and `W ∈ SU(n)`, then `WU`
/// is Haar on U(n) with `det(WU) = det U`, so correcting the last column by
/// `conj(det)` maps `WU` to `W·V`: the law of `V` is left SU(n)-invariant.
pub fn haar_special_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let mut u = haar_unitary(n, rng);
    let det = u.determinant();
    let fix = (det / det.norm()).conj();
    let mut col = u.column_mut(n - 1);
    col *= fix;
    u
}

/// `max |(U*U − I)_{ij}|`.
pub fn unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let e = if i == j { p[(i, j)] - Complex64::new(1.0, 0.0) } else { p[(i, j)] };
            worst = worst.max(e.norm());
        }
    }
    worst
}

/// An `r`-tuple of Haar matrices with its seed provenance.
#[derive(Clone, Debug)]
pub struct UnitaryTuple {
    pub n: usize,
    pub matrices: Vec<DMatrix<Complex64>>,
    pub group: Group,
    pub seed: u64,
    pub index: u64,
}

impl UnitaryTuple {
    /// Sample `index` of the tuple family under `seed`.
    pub fn sample(r: usize, n: usize, group: Group, seed: u64, index: u64) -> Result<UnitaryTuple> {
        if n == 0 || (group == Group::SpecialUnitary && n < 2) {
            return Err(Error::argument(format!("cannot sample {group:?} with n = {n}")));
        }
        let mut rng = substream(seed, "tuple", index);
        let matrices = (0..r)
            .map(|_| match group {
                Group::Unitary => haar_unitary(n, &mut rng),
                Group::SpecialUnitary => haar_special_unitary(n, &mut rng),
            })
            .collect();
        Ok(UnitaryTuple { n, matrices, group, seed, index })
    }
}

/// Eigenvalues of a normal matrix via the complex Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let t = m.clone().schur().unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}
