//! Laurent coordinate ring of the deformation to the normal cone for the
//! linear model `V = ℝ^{l+k} ⊃ M = ℝ^l × {0}`.
//!
//! Variables are laid out as `x_1..x_l, y_1..y_k`. An element is
//! `Σ_p f_p t^{−p}`; it belongs to the ring when each `f_p` with `p > 0`
//! vanishes to order `p` along `y = 0`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::eqforms::VectorField;
use crate::poly::{Mono, PolyFn, Shape};
use crate::scalar::{Scalar, Q};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DncError {
    #[error("λ = 0 is the zero fiber; use eval_zero")]
    ZeroLambda,
    #[error("not in the ring: t^-{p} coefficient has monomial {mono:?} of y-degree below {p}")]
    NotMember { p: i32, mono: Mono },
    #[error("point has {got} coordinates, expected {expected}")]
    Shape { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Model {
    pub l: usize,
    pub k: usize,
}

impl Model {
    pub fn new(l: usize, k: usize) -> Self {
        Model { l, k }
    }

    pub fn shape(&self) -> Shape {
        Shape::chart(self.l + self.k)
    }

    pub fn ys(&self) -> std::ops::Range<usize> {
        self.l..self.l + self.k
    }

    pub fn y(&self, j: usize) -> PolyFn {
        PolyFn::x(self.shape(), self.l + j)
    }

    pub fn x(&self, i: usize) -> PolyFn {
        PolyFn::x(self.shape(), i)
    }

    /// Vanishing order along `y = 0`; `None` for the zero function.
    pub fn y_order(&self, f: &PolyFn) -> Option<i32> {
        f.min_degree_in(self.ys())
    }

    pub fn vanishes_to(&self, f: &PolyFn, p: i32) -> bool {
        self.y_order(f).map_or(true, |o| o >= p)
    }
}

/// A point `X_m` of the normal bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalVector {
    pub base: Vec<Scalar>,
    pub normal: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentFn {
    pub model: Model,
    terms: BTreeMap<i32, PolyFn>,
}

impl LaurentFn {
    pub fn zero(model: Model) -> Self {
        LaurentFn { model, terms: BTreeMap::new() }
    }

    /// `f · t^{−p}`.
    pub fn single(model: Model, p: i32, f: PolyFn) -> Self {
        let mut s = Self::zero(model);
        s.add(p, &f);
        s
    }

    pub fn constant(model: Model, c: Scalar) -> Self {
        Self::single(model, 0, PolyFn::constant(model.shape(), c))
    }

    pub fn terms(&self) -> &BTreeMap<i32, PolyFn> {
        &self.terms
    }

    pub fn add(&mut self, p: i32, f: &PolyFn) {
        if f.is_zero() {
            return;
        }
        let e = self.terms.entry(p).or_insert_with(|| PolyFn::zero(f.shape));
        *e = &*e + f;
        if e.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn sum(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (p, f) in &o.terms {
            s.add(*p, f);
        }
        s
    }

    pub fn product(&self, o: &Self) -> Self {
        let mut s = Self::zero(self.model);
        for (p, f) in &self.terms {
            for (q, g) in &o.terms {
                s.add(p + q, &(f * g));
            }
        }
        s
    }

    /// First offending monomial, if any.
    pub fn membership_witness(&self) -> Option<(i32, Mono)> {
        for (p, f) in &self.terms {
            if *p <= 0 {
                continue;
            }
            for m in f.terms().keys() {
                let d: i32 = m[self.model.ys()].iter().sum();
                if d < *p {
                    return Some((*p, m.clone()));
                }
            }
        }
        None
    }

    pub fn is_member(&self) -> bool {
        self.membership_witness().is_none()
    }

    fn require_member(&self) -> Result<(), DncError> {
        match self.membership_witness() {
            Some((p, mono)) => Err(DncError::NotMember { p, mono }),
            None => Ok(()),
        }
    }
}

pub fn membership(f: &LaurentFn) -> bool {
    f.is_member()
}

/// `Σ_p f_p(v) λ^{−p}` on the fiber `t = λ ≠ 0`.
pub fn eval_generic(f: &LaurentFn, v: &[Scalar], lambda: &Q) -> Result<Scalar, DncError> {
    use num_traits::Zero;
    if lambda.is_zero() {
        return Err(DncError::ZeroLambda);
    }
    let n = f.model.l + f.model.k;
    if v.len() != n {
        return Err(DncError::Shape { expected: n, got: v.len() });
    }
    let lam = Scalar::from_q(lambda.clone());
    let mut acc = Scalar::zero();
    for (p, fp) in &f.terms {
        let w = lam.pow(-p).expect("nonzero rational is a unit");
        acc = &acc + &(&fp.eval(v) * &w);
    }
    Ok(acc)
}

fn check_normal(f: &LaurentFn, xm: &NormalVector) -> Result<(), DncError> {
    if xm.base.len() != f.model.l {
        return Err(DncError::Shape { expected: f.model.l, got: xm.base.len() });
    }
    if xm.normal.len() != f.model.k {
        return Err(DncError::Shape { expected: f.model.k, got: xm.normal.len() });
    }
    Ok(())
}

/// Zero-fiber character at `X_m`, read off from monomials: a term
/// `c·x^β y^α t^{−p}` contributes `c·m^β X^α` exactly when `|α| = p ≥ 0`.
pub fn eval_zero(f: &LaurentFn, xm: &NormalVector) -> Result<Scalar, DncError> {
    f.require_member()?;
    check_normal(f, xm)?;
    let l = f.model.l;
    let mut acc = Scalar::zero();
    for (p, fp) in &f.terms {
        if *p < 0 {
            continue;
        }
        for (m, c) in fp.terms() {
            let ydeg: i32 = m[l..].iter().sum();
            if ydeg != *p {
                continue;
            }
            let mut v = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if i < l { &xm.base[i] } else { &xm.normal[i - l] };
                v = &v * &base.pow(e).expect("positive power");
            }
            acc = &acc + &v;
        }
    }
    Ok(acc)
}

/// Applies the derivation `Σ v^i ∂_i`.
pub fn apply_field(v: &VectorField, f: &PolyFn) -> PolyFn {
    let mut out = PolyFn::zero(f.shape);
    for (i, c) in v.comps.iter().enumerate() {
        if !c.is_zero() {
            out = &out + &(c * &f.deriv(i));
        }
    }
    out
}

/// `ε_m ∘ exp(tX)`: the operator `tX` sends `g t^{−p}` to `(Xg) t^{−p+1}`; the
/// character `ε_m` keeps the `t⁰` coefficient at `(m, 0)`. `field` is any
/// vector field whose normal part along `M` is `X_m`.
pub fn eval_exp_flow(f: &LaurentFn, m: &[Scalar], field: &VectorField) -> Result<Scalar, DncError> {
    f.require_member()?;
    let l = f.model.l;
    let mut point: Vec<Scalar> = m.to_vec();
    point.extend(std::iter::repeat(Scalar::zero()).take(f.model.k));
    if m.len() != l {
        return Err(DncError::Shape { expected: l, got: m.len() });
    }
    let mut acc = Scalar::zero();
    for (p, fp) in &f.terms {
        if *p < 0 {
            continue;
        }
        let mut g = fp.clone();
        let mut fact = Q::from_integer(1.into());
        for j in 1..=*p {
            g = apply_field(field, &g);
            fact *= Q::from_integer(j.into());
        }
        acc = &acc + &g.eval(&point).scale_q(&fact.recip());
    }
    Ok(acc)
}

/// Constant field `Σ X_j ∂_{y_j}`.
pub fn normal_field(model: Model, normal: &[Scalar]) -> VectorField {
    let s = model.shape();
    let mut comps = vec![PolyFn::zero(s); model.l + model.k];
    for (j, a) in normal.iter().enumerate() {
        comps[model.l + j] = PolyFn::constant(s, a.clone());
    }
    VectorField::new(comps)
}

/// `eval_generic` along `λ ↦ (m, λX_m)` as an exact polynomial in `λ`.
pub fn generic_along_path(f: &LaurentFn, xm: &NormalVector) -> Result<PolyFn, DncError> {
    f.require_member()?;
    check_normal(f, xm)?;
    let l = f.model.l;
    let ls = Shape::chart(1);
    let mut out = PolyFn::zero(ls);
    for (p, fp) in &f.terms {
        for (m, c) in fp.terms() {
            let mut v = c.clone();
            let mut lam_pow = -p;
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if i < l { &xm.base[i] } else { &xm.normal[i - l] };
                v = &v * &base.pow(e).expect("positive power");
                if i >= l {
                    lam_pow += e;
                }
            }
            out.add_term(vec![lam_pow], v);
        }
    }
    Ok(out)
}

/// Euler-like test: `Rf − pf` vanishes to order `p + 1`.
pub fn euler_like_check(model: Model, r: &VectorField, f: &PolyFn, p: i32) -> bool {
    let rf = apply_field(r, f);
    let rem = &rf - &f.scale(&Scalar::int(p as i64));
    model.vanishes_to(&rem, p + 1)
}

/// `Σ_j y_j ∂_{y_j}`.
pub fn euler_field(model: Model) -> VectorField {
    let s = model.shape();
    let mut comps = vec![PolyFn::zero(s); model.l + model.k];
    for j in 0..model.k {
        comps[model.l + j] = model.y(j);
    }
    VectorField::new(comps)
}

pub mod gen {
    use super::*;
    use rand::Rng;

    pub fn scalar<R: Rng>(rng: &mut R) -> Scalar {
        Scalar::ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3))
    }

    /// Random ring member with `p ∈ [−1, 2]`, total degrees ≤ 4.
    pub fn member<R: Rng>(rng: &mut R, model: Model, terms: usize) -> LaurentFn {
        let mut f = LaurentFn::zero(model);
        let n = model.l + model.k;
        for _ in 0..terms {
            let p = rng.gen_range(-1..=2i32);
            let mut m = vec![0; n];
            let ydeg = p.max(0) + rng.gen_range(0..=1);
            if model.k == 0 && ydeg > 0 {
                continue;
            }
            for _ in 0..ydeg {
                m[model.l + rng.gen_range(0..model.k)] += 1;
            }
            if model.l > 0 {
                for _ in 0..rng.gen_range(0..=2) {
                    m[rng.gen_range(0..model.l)] += 1;
                }
            }
            f.add(p, &PolyFn::monomial(model.shape(), m, scalar(rng)));
        }
        f
    }

    pub fn normal_vector<R: Rng>(rng: &mut R, model: Model) -> NormalVector {
        NormalVector { base: (0..model.l).map(|_| scalar(rng)).collect(), normal: (0..model.k).map(|_| scalar(rng)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn model() -> Model {
        Model::new(1, 2)
    }

    #[test]
    fn membership_examples() {
        let m = model();
        assert!(membership(&LaurentFn::single(m, 1, m.y(0))));
        assert!(!membership(&LaurentFn::single(m, 1, m.x(0))));
        let f = &(&m.y(0) * &m.y(1)) + &m.y(0).pow(3);
        assert!(membership(&LaurentFn::single(m, 2, f)));
    }

    #[test]
    fn generic_examples() {
        let m = model();
        let f = LaurentFn::single(m, 1, m.y(0));
        let v = [Scalar::int(7), Scalar::int(3), Scalar::int(0)];
        assert_eq!(eval_generic(&f, &v, &q(2, 1)).unwrap(), Scalar::ratio(3, 2));
        assert_eq!(eval_generic(&LaurentFn::constant(m, Scalar::int(5)), &v, &q(1, 3)).unwrap(), Scalar::int(5));
        assert_eq!(eval_generic(&f, &v, &q(0, 1)), Err(DncError::ZeroLambda));
    }

    #[test]
    fn zero_fiber_examples() {
        let m = model();
        let a = Scalar::ratio(5, 2);
        let xm = NormalVector { base: vec![Scalar::int(1)], normal: vec![a.clone(), Scalar::int(0)] };
        assert_eq!(eval_zero(&LaurentFn::single(m, 1, m.y(0)), &xm).unwrap(), a);
        assert_eq!(eval_zero(&LaurentFn::single(m, 2, m.y(0).pow(2)), &xm).unwrap(), &a * &a);
        let f0 = &m.x(0) + &PolyFn::int(m.shape(), 3);
        assert_eq!(eval_zero(&LaurentFn::single(m, 0, f0), &xm).unwrap(), Scalar::int(4));
        assert!(matches!(eval_zero(&LaurentFn::single(m, 1, m.x(0)), &xm), Err(DncError::NotMember { .. })));
    }

    #[test]
    fn euler_like_examples() {
        let m = Model::new(0, 2);
        let e = euler_field(m);
        assert!(euler_like_check(m, &e, &(&m.y(0) * &m.y(1)), 2));
        let mut bent = e.clone();
        bent.comps[0] = &bent.comps[0] + &m.y(0).pow(2);
        assert!(euler_like_check(m, &bent, &m.y(0), 1));
        let d1 = normal_field(m, &[Scalar::one(), Scalar::zero()]);
        assert!(!euler_like_check(m, &d1, &m.y(0), 1));
    }

    #[test]
    fn exp_factorization_on_basis() {
        let m = model();
        let xm = NormalVector { base: vec![Scalar::ratio(2, 3)], normal: vec![Scalar::ratio(-1, 2), Scalar::int(3)] };
        let field = normal_field(m, &xm.normal);
        for a1 in 0..=5 {
            for a2 in 0..=5 - a1 {
                for b in 0..=2 {
                    for p in -1..=(a1 + a2) {
                        let f = LaurentFn::single(m, p, PolyFn::monomial(m.shape(), vec![b, a1, a2], Scalar::one()));
                        assert_eq!(eval_zero(&f, &xm).unwrap(), eval_exp_flow(&f, &xm.base, &field).unwrap());
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn characters_are_homomorphisms(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = model();
            let f = gen::member(&mut rng, m, 4);
            let g = gen::member(&mut rng, m, 4);
            let xm = gen::normal_vector(&mut rng, m);
            let fg = f.product(&g);
            prop_assert!(fg.is_member());
            prop_assert_eq!(eval_zero(&fg, &xm).unwrap(), &eval_zero(&f, &xm).unwrap() * &eval_zero(&g, &xm).unwrap());
            let v: Vec<Scalar> = (0..3).map(|_| gen::scalar(&mut rng)).collect();
            let lam = q(rng.gen_range(1..5), rng.gen_range(1..5));
            prop_assert_eq!(eval_generic(&fg, &v, &lam).unwrap(), &eval_generic(&f, &v, &lam).unwrap() * &eval_generic(&g, &v, &lam).unwrap());
            let path = generic_along_path(&f, &xm).unwrap();
            prop_assert!(path.min_degree_in(0..1).map_or(true, |d| d >= 0));
            prop_assert_eq!(path.constant_term(), eval_zero(&f, &xm).unwrap());
        }

        #[test]
        fn zero_fiber_ignores_extension(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = model();
            let f = gen::member(&mut rng, m, 4);
            let xm = gen::normal_vector(&mut rng, m);
            let mut field = normal_field(m, &xm.normal);
            // Perturb by a field vanishing on M.
            for c in field.comps.iter_mut() {
                *c = &*c + &(&m.y(rng.gen_range(0..2)) * &PolyFn::constant(m.shape(), gen::scalar(&mut rng)));
            }
            prop_assert_eq!(eval_exp_flow(&f, &xm.base, &field).unwrap(), eval_zero(&f, &xm).unwrap());
        }
    }
}
