//! The Weingarten function, the relative norm `‖σ‖_{k,ℓ}` and the group
//! algebra elements built from them.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{rat_to_f64, RationalFunction};
use crate::symgroup::{all_perms, char_table, factorial, partitions_of, schur_dim_rational, Partition, Perm};

/// Largest `L` accepted by [`wg`].
pub const WG_CAP: usize = 8;
/// Largest `k+ℓ` accepted by [`z_element`].
pub const Z_CAP: usize = 6;

/// Multiplication data for `S_m` with permutations indexed by rank.
pub struct SymGroup {
    pub m: usize,
    pub perms: Vec<Perm>,
    /// `class[i]` indexes `partitions_of(m)` by the cycle type of `perms[i]`.
    pub class: Vec<usize>,
    pub inverse: Vec<usize>,
    /// `compose[a * m! + b]` is the rank of `perms[a] ∘ perms[b]`.
    compose: Vec<u32>,
}

impl SymGroup {
    fn build(m: usize) -> Result<SymGroup> {
        let perms = all_perms(m);
        let parts = partitions_of(m)?;
        let class = perms
            .iter()
            .map(|p| parts.iter().position(|q| *q == p.cycle_type()).unwrap())
            .collect();
        let inverse = perms.iter().map(|p| p.inverse().rank()).collect();
        let size = perms.len();
        let mut compose = vec![0u32; size * size];
        for a in 0..size {
            for b in 0..size {
                compose[a * size + b] = perms[a].compose(&perms[b]).rank() as u32;
            }
        }
        Ok(SymGroup { m, perms, class, inverse, compose })
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.compose[a * self.perms.len() + b] as usize
    }
}

/// Cached multiplication table of `S_m` for `m ≤ Z_CAP`.
pub fn sym_group(m: usize) -> Result<Arc<SymGroup>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<SymGroup>>>> = OnceLock::new();
    if m > Z_CAP {
        return Err(Error::unsupported(format!("group tables limited to S_{Z_CAP}, got S_{m}")));
    }
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(g) = cache.read().unwrap().get(&m) {
        return Ok(g.clone());
    }
    let g = Arc::new(SymGroup::build(m)?);
    cache.write().unwrap().insert(m, g.clone());
    Ok(g)
}

/// `Wg_L` on every conjugacy class, indexed like `partitions_of(L)`.
pub fn wg_table(l: usize) -> Result<Arc<Vec<RationalFunction>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<RationalFunction>>>>> = OnceLock::new();
    if l == 0 || l > WG_CAP {
        return Err(Error::unsupported(format!("Weingarten function needs 1 <= L <= {WG_CAP}, got {l}")));
    }
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().unwrap().get(&l) {
        return Ok(t.clone());
    }
    let table = char_table(l)?;
    let lf = factorial(l);
    let norm = BigRational::new(BigInt::one(), &lf * &lf);
    let inv_dims: Vec<RationalFunction> = table
        .partitions
        .iter()
        .map(|lam| {
            let d = lam.dimension();
            schur_dim_rational(lam)
                .recip()
                .expect("s_λ(1) is a nonzero polynomial")
                .scale(&BigRational::from_integer(&d * &d))
        })
        .collect();
    let values: Vec<RationalFunction> = (0..table.partitions.len())
        .map(|rho| {
            let mut acc = RationalFunction::zero();
            for (i, f) in inv_dims.iter().enumerate() {
                let chi = table.values[i][rho];
                if chi != 0 {
                    acc = &acc + &f.scale(&BigRational::from_integer(BigInt::from(chi)));
                }
            }
            acc.scale(&norm)
        })
        .collect();
    let values = Arc::new(values);
    cache.write().unwrap().insert(l, values.clone());
    Ok(values)
}

/// `Wg_L(π)` as a rational function of `n`.
pub fn wg(l: usize, pi: &Perm) -> Result<RationalFunction> {
    if pi.degree() != l {
        return Err(Error::argument(format!("permutation of degree {} passed to Wg_{l}", pi.degree())));
    }
    wg_by_type(l, &pi.cycle_type())
}

/// `Wg_L` on the class of cycle type `ρ ⊢ L`.
pub fn wg_by_type(l: usize, rho: &Partition) -> Result<RationalFunction> {
    if rho.size() != l {
        return Err(Error::argument(format!("cycle type {rho} is not a partition of {l}")));
    }
    let table = wg_table(l)?;
    let idx = partitions_of(l)?.iter().position(|q| q == rho).unwrap();
    Ok(table[idx].clone())
}

/// Largest `d ≥ 0` with `d(d+|c|) ≤ L`: the multiplicity bound for the factor
/// `(n+c)` in the denominators of `Wg_L`.
pub fn pole_multiplicity(l: usize, c: i64) -> usize {
    let c = c.unsigned_abs() as usize;
    let mut d = 0;
    while (d + 1) * (d + 1 + c) <= l {
        d += 1;
    }
    d
}

/// Minimal `m` with `σ ∈ (S_k×S_ℓ)·t₁⋯t_m` for transpositions `t_i`.
pub fn norm_kl(sigma: &Perm, k: usize, l: usize) -> Result<usize> {
    if sigma.degree() != k + l {
        return Err(Error::argument(format!(
            "permutation of degree {} but k+ℓ = {}",
            sigma.degree(),
            k + l
        )));
    }
    let table = norm_kl_table(k, l)?;
    Ok(table[sigma.rank()])
}

/// `‖·‖_{k,ℓ}` for every permutation of `S_{k+ℓ}`, indexed by rank.
pub fn norm_kl_table(k: usize, l: usize) -> Result<Arc<Vec<usize>>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<Vec<usize>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().unwrap().get(&(k, l)) {
        return Ok(t.clone());
    }
    let m = k + l;
    let g = sym_group(m)?;
    let mut dist = vec![usize::MAX; g.order()];
    let mut queue = VecDeque::new();
    for (i, p) in g.perms.iter().enumerate() {
        if p.images()[..k].iter().all(|&x| x < k) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    let transpositions: Vec<usize> = (0..m)
        .flat_map(|a| ((a + 1)..m).map(move |b| Perm::transposition(m, a, b).rank()))
        .collect();
    while let Some(i) = queue.pop_front() {
        for &t in &transpositions {
            let j = g.mul(i, t);
            if dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let dist = Arc::new(dist);
    cache.write().unwrap().insert((k, l), dist.clone());
    Ok(dist)
}

/// Element of `C[S_m]` with rational-function coefficients in `n`.
#[derive(Clone, PartialEq)]
pub struct SymAlgebraElement {
    m: usize,
    coeffs: BTreeMap<Perm, RationalFunction>,
}

impl SymAlgebraElement {
    pub fn zero(m: usize) -> Self {
        SymAlgebraElement { m, coeffs: BTreeMap::new() }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_terms(m, [(Perm::identity(m), RationalFunction::one())])
    }

    pub fn from_terms(m: usize, terms: impl IntoIterator<Item = (Perm, RationalFunction)>) -> Self {
        let mut e = Self::zero(m);
        for (p, c) in terms {
            assert_eq!(p.degree(), m, "permutation degree mismatch");
            e.add_term(p, &c);
        }
        e
    }

    fn add_term(&mut self, p: Perm, c: &RationalFunction) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&p) {
            Some(v) => {
                *v = &*v + c;
                if v.is_zero() {
                    self.coeffs.remove(&p);
                }
            }
            None => {
                self.coeffs.insert(p, c.clone());
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn coeff(&self, p: &Perm) -> RationalFunction {
        self.coeffs.get(p).cloned().unwrap_or_else(RationalFunction::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Perm, &RationalFunction)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        Self::from_terms(self.m, self.coeffs.iter().map(|(p, v)| (p.clone(), v * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.coeffs {
            out.add_term(p.clone(), c);
        }
        out
    }

    /// Convolution product `(ab)(τ) = Σ_σ a(σ) b(σ⁻¹τ)`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "degree mismatch");
        let mut out = Self::zero(self.m);
        for (p, a) in &self.coeffs {
            for (q, b) in &other.coeffs {
                out.add_term(p.compose(q), &(a * b));
            }
        }
        out
    }

    /// The anti-involution `σ ↦ σ⁻¹`.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.m, self.coeffs.iter().map(|(p, c)| (p.inverse(), c.clone())))
    }

    /// Coefficients at a numeric `n`, indexed by permutation rank.
    pub fn eval_f64(&self, n: f64) -> Vec<(Perm, f64)> {
        self.coeffs.iter().map(|(p, c)| (p.clone(), c.eval_f64(n))).collect()
    }

    /// Coefficients at an exact `n`; `None` at a pole.
    pub fn eval(&self, n: &BigRational) -> Option<Vec<(Perm, BigRational)>> {
        self.coeffs.iter().map(|(p, c)| Some((p.clone(), c.eval(n)?))).collect()
    }
}

impl fmt::Debug for SymAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter().map(|(p, c)| (p.to_string(), c.to_string()))).finish()
    }
}

impl Serialize for SymAlgebraElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            perm: &'a Perm,
            coeff: &'a RationalFunction,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            m: usize,
            terms: Vec<Term<'a>>,
        }
        Repr { m: self.m, terms: self.coeffs.iter().map(|(perm, coeff)| Term { perm, coeff }).collect() }
            .serialize(s)
    }
}

/// Dense group-algebra vector with exact constant coefficients, by rank.
type Dense = Vec<BigRational>;

fn dense_mul(g: &SymGroup, a: &Dense, b: &Dense) -> Dense {
    let mut out = vec![BigRational::zero(); g.order()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[g.mul(i, j)] += x * y;
            }
        }
    }
    out
}

fn dense_projection(lambda: &Partition) -> Result<Dense> {
    let k = lambda.size();
    let g = sym_group(k)?;
    let t = char_table(k)?;
    let li = t.index_of(lambda).unwrap();
    let scale = BigRational::new(lambda.dimension(), factorial(k));
    Ok(g.class.iter().map(|&c| &scale * BigRational::from_integer(BigInt::from(t.values[li][c]))).collect())
}

/// Central idempotent `p_λ = (d_λ/k!) Σ_σ χ_λ(σ) σ` of `C[S_k]`.
pub fn central_projection(lambda: &Partition) -> Result<SymAlgebraElement> {
    let k = lambda.size();
    let g = sym_group(k)?;
    let d = dense_projection(lambda)?;
    Ok(SymAlgebraElement::from_terms(
        k,
        d.into_iter().enumerate().map(|(i, c)| (g.perms[i].clone(), RationalFunction::constant(c))),
    ))
}

/// `Σ_π Wg_L(π) π`.
pub fn wg_element(l: usize) -> Result<SymAlgebraElement> {
    let g = sym_group(l)?;
    let table = wg_table(l)?;
    Ok(SymAlgebraElement::from_terms(l, g.perms.iter().enumerate().map(|(i, p)| (p.clone(), table[g.class[i]].clone()))))
}

/// Sum over the Young subgroup `S_λ ⊂ S_k` that permutes within the row blocks.
fn young_subgroup_sum(lambda: &Partition) -> Result<Dense> {
    let k = lambda.size();
    let g = sym_group(k)?;
    let mut block = Vec::with_capacity(k);
    for (b, &len) in lambda.parts().iter().enumerate() {
        block.extend(std::iter::repeat_n(b, len));
    }
    Ok(g.perms
        .iter()
        .map(|p| {
            if (0..k).all(|i| block[p.apply(i)] == block[i]) {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect())
}

/// `z = ([S_k:S_λ][S_ℓ:S_μ]/(d_λ d_μ)) · p_{λ⊗μ} (Σ_{S_λ×S_μ} σ) p_{λ⊗μ} · Wg_{k+ℓ}`.
pub fn z_element(lambda: &Partition, mu: &Partition) -> Result<SymAlgebraElement> {
    let (k, l) = (lambda.size(), mu.size());
    let m = k + l;
    if m == 0 || m > Z_CAP {
        return Err(Error::unsupported(format!("z element needs 1 <= k+ℓ <= {Z_CAP}, got {m}")));
    }
    // p_λ is central and idempotent, so p_λ Y p_λ = p_λ Y.
    let side = |p: &Partition| -> Result<Dense> {
        let g = sym_group(p.size())?;
        Ok(dense_mul(&g, &dense_projection(p)?, &young_subgroup_sum(p)?))
    };
    let (a, b) = (side(lambda)?, side(mu)?);
    let index = |p: &Partition| -> BigInt {
        let young: BigInt = p.parts().iter().map(|&x| factorial(x)).product();
        factorial(p.size()) / young
    };
    let c = BigRational::new(index(lambda) * index(mu), lambda.dimension() * mu.dimension());
    let gk = sym_group(k)?;
    let gl = sym_group(l)?;
    let g = sym_group(m)?;
    // (A⊗B) embedded in C[S_{k+ℓ}].
    let mut ab = vec![BigRational::zero(); g.order()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                ab[gk.perms[i].direct_sum(&gl.perms[j]).rank()] = &c * x * y;
            }
        }
    }
    // z(τ) = Σ_σ ab(σ) Wg(σ⁻¹τ), grouped by the class of σ⁻¹τ.
    let wg = wg_table(m)?;
    let classes = wg.len();
    let mut terms = Vec::new();
    for tau in 0..g.order() {
        let mut by_class = vec![BigRational::zero(); classes];
        for (s, x) in ab.iter().enumerate() {
            if !x.is_zero() {
                by_class[g.class[g.mul(g.inverse[s], tau)]] += x;
            }
        }
        let mut coeff = RationalFunction::zero();
        for (cls, w) in by_class.iter().enumerate() {
            if !w.is_zero() {
                coeff = &coeff + &wg[cls].scale(w);
            }
        }
        terms.push((g.perms[tau].clone(), coeff));
    }
    Ok(SymAlgebraElement::from_terms(m, terms))
}

/// `n^{#cycles(σ⁻¹τ)}` Gram matrix of permutation operators at a numeric `n`.
pub fn gram_matrix_f64(m: usize, n: f64) -> Result<Vec<Vec<f64>>> {
    let g = sym_group(m)?;
    Ok((0..g.order())
        .map(|s| (0..g.order()).map(|t| n.powi(g.perms[g.mul(g.inverse[s], t)].num_cycles() as i32)).collect())
        .collect())
}

/// Convenience: the float value of an exact rational.
pub fn to_f64(x: &BigRational) -> f64 {
    rat_to_f64(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, Poly};
    use proptest::prelude::*;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(wg(1, &Perm::identity(1)).unwrap().to_string(), "(1)/(n)");
        let n2m1 = RationalFunction::new(Poly::one(), Poly::from_i64(&[-1, 0, 1])).unwrap();
        assert_eq!(wg(2, &Perm::identity(2)).unwrap(), n2m1);
        let t = RationalFunction::new(Poly::from_i64(&[-1]), Poly::from_i64(&[0, -1, 0, 1])).unwrap();
        assert_eq!(wg(2, &Perm::transposition(2, 0, 1)).unwrap(), t);
        assert!(matches!(wg_table(9), Err(Error::Unsupported(_))));
        assert!(wg(3, &Perm::identity(2)).is_err());
    }

    #[test]
    fn gram_inversion_oracle() {
        for l in 1..=4 {
            let g = sym_group(l).unwrap();
            let table = wg_table(l).unwrap();
            for n in l..=l + 2 {
                let nr = rat(n as i64);
                let wgv: Vec<BigRational> = table.iter().map(|f| f.eval(&nr).unwrap()).collect();
                for s in 0..g.order() {
                    for pi in 0..g.order() {
                        let mut acc = BigRational::zero();
                        for t in 0..g.order() {
                            let cyc = g.perms[g.mul(g.inverse[s], t)].num_cycles();
                            let w = &wgv[g.class[g.mul(g.inverse[t], pi)]];
                            acc += nr.pow(cyc as i32) * w;
                        }
                        let expect = if s == pi { BigRational::one() } else { BigRational::zero() };
                        assert_eq!(acc, expect, "L={l} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn pole_profile() {
        assert_eq!(pole_multiplicity(2, 1), 1);
        assert_eq!(pole_multiplicity(4, 0), 2);
        for l in 1..=8 {
            assert_eq!(pole_multiplicity(l, l as i64), 0);
            assert!(pole_multiplicity(l, 1) <= l);
        }
        // Observed multiplicities in the denominators never exceed the bound.
        for l in 1..=6 {
            for f in wg_table(l).unwrap().iter() {
                for c in -(l as i64)..=(l as i64) {
                    let factor = Poly::linear(c);
                    let mut den = f.denom().clone();
                    let mut mult = 0;
                    loop {
                        let (q, r) = den.div_rem(&factor);
                        if !r.is_zero() {
                            break;
                        }
                        den = q;
                        mult += 1;
                    }
                    assert!(mult <= pole_multiplicity(l, c), "L={l} c={c} mult={mult}");
                }
            }
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_kl(&Perm::identity(3), 2, 1).unwrap(), 0);
        assert_eq!(norm_kl(&Perm::transposition(2, 0, 1), 2, 0).unwrap(), 0);
        assert_eq!(norm_kl(&Perm::transposition(2, 0, 1), 1, 1).unwrap(), 1);
        // Brute force: σ ∈ (S_k×S_ℓ)·t₁⋯t_m ⟺ σ maps m elements of the first block out of it.
        for (k, l) in [(2, 2), (3, 2), (1, 4), (3, 3)] {
            for s in all_perms(k + l) {
                let crossing = s.images()[..k].iter().filter(|&&x| x >= k).count();
                assert_eq!(norm_kl(&s, k, l).unwrap(), crossing);
            }
        }
    }

    #[test]
    fn projections_are_orthogonal_idempotents() {
        for k in 1..=4 {
            let ps: Vec<SymAlgebraElement> =
                partitions_of(k).unwrap().iter().map(|l| central_projection(l).unwrap()).collect();
            let mut total = SymAlgebraElement::zero(k);
            for (i, a) in ps.iter().enumerate() {
                total = total.add(a);
                for (j, b) in ps.iter().enumerate() {
                    let prod = a.mul(b);
                    if i == j {
                        assert_eq!(&prod, a);
                    } else {
                        assert!(prod.is_zero());
                    }
                }
            }
            assert_eq!(total, SymAlgebraElement::identity(k));
        }
    }

    #[test]
    fn z_examples() {
        let z = z_element(&p(&[1]), &Partition::empty()).unwrap();
        assert_eq!(z.support_len(), 1);
        assert_eq!(z.coeff(&Perm::identity(1)).to_string(), "(1)/(n)");
        let z = z_element(&p(&[1]), &p(&[1])).unwrap();
        assert_eq!(z.coeff(&Perm::identity(2)).valuation_at_infinity(), Some(2));
        assert!(z.coeff(&Perm::transposition(2, 0, 1)).valuation_at_infinity().unwrap() >= 3);
    }

    #[test]
    fn z_decay_and_self_adjointness() {
        for a in 0..=4usize {
            for b in 0..=(4 - a) {
                if a + b == 0 {
                    continue;
                }
                for l in partitions_of(a).unwrap() {
                    for m in partitions_of(b).unwrap() {
                        let z = z_element(&l, &m).unwrap();
                        assert_eq!(z.adjoint(), z);
                        for (tau, c) in z.terms() {
                            let need = (a + b + norm_kl(tau, a, b).unwrap()) as i64;
                            assert!(c.valuation_at_infinity().unwrap() >= need, "λ={l} μ={m} τ={tau}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn wg_element_inverts_gram_at_large_n() {
        // Σ_τ n^{#(τ)} τ · Σ_π Wg(π) π = id, symbolically.
        for l in 1..=3 {
            let g = sym_group(l).unwrap();
            let gram = SymAlgebraElement::from_terms(
                l,
                g.perms.iter().map(|q| (q.clone(), RationalFunction::from_poly(Poly::monomial(rat(1), q.num_cycles())))),
            );
            assert_eq!(gram.mul(&wg_element(l).unwrap()), SymAlgebraElement::identity(l));
        }
    }

    proptest! {
        #[test]
        fn wg_is_a_class_function(l in 1usize..=5, a in 0usize..120, b in 0usize..120) {
            let g = sym_group(l).unwrap();
            let pi = &g.perms[a % g.order()];
            let rho = &g.perms[b % g.order()];
            let conj = rho.compose(pi).compose(&rho.inverse());
            prop_assert_eq!(wg(l, pi).unwrap(), wg(l, &conj).unwrap());
        }
    }
}
