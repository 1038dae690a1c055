//! Exterior and Clifford algebras of `ℝⁿ` with polynomial coefficients.
//!
//! Blades are bitmasks over generators `0..n` (generator `k` is `e_{k+1}`).
//! The Clifford relation is `e_i² = -1`; that single sign is what makes the
//! Berezin constant `(-2i)^{n/2}` come out. Quantization sends `e_I` (wedge) to
//! the ordered Clifford product `e_{i1}⋯e_{ik}`, so on blades both `quantize`
//! and `symbol_map` only change the tag.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{Mat, Ring};
use crate::poly::{owned_ops, PolyFn, Shape};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algebra {
    Exterior,
    Clifford,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("expected {expected:?} element, got {got:?}")]
    WrongAlgebra { expected: Algebra, got: Algebra },
    #[error("supertrace needs even dimension, got {0}")]
    OddDimension(usize),
}

/// Sign of moving blade `b` past blade `a` into sorted order: true when odd.
pub fn reorder_odd(a: u32, b: u32) -> bool {
    let mut a = a >> 1;
    let mut s = 0;
    while a != 0 {
        s += (a & b).count_ones();
        a >>= 1;
    }
    s % 2 == 1
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multivector {
    pub dim: usize,
    pub tag: Algebra,
    pub shape: Shape,
    terms: BTreeMap<u32, PolyFn>,
}

impl Multivector {
    pub fn zero(dim: usize, tag: Algebra, shape: Shape) -> Self {
        assert!(dim <= 16, "dimension too large");
        Multivector { dim, tag, shape, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, tag: Algebra, p: PolyFn) -> Self {
        Self::blade(dim, tag, 0, p)
    }

    pub fn one(dim: usize, tag: Algebra, shape: Shape) -> Self {
        Self::scalar(dim, tag, PolyFn::one(shape))
    }

    pub fn blade(dim: usize, tag: Algebra, mask: u32, p: PolyFn) -> Self {
        let shape = p.shape;
        let mut m = Self::zero(dim, tag, shape);
        assert!(mask < (1u32 << dim), "blade out of range");
        if !p.is_zero() {
            m.terms.insert(mask, p);
        }
        m
    }

    /// The constant blade `e_I` with coefficient `c`.
    pub fn const_blade(dim: usize, tag: Algebra, shape: Shape, mask: u32, c: Scalar) -> Self {
        Self::blade(dim, tag, mask, PolyFn::constant(shape, c))
    }

    /// Generator `e_{k+1}`.
    pub fn gen(dim: usize, tag: Algebra, shape: Shape, k: usize) -> Self {
        Self::const_blade(dim, tag, shape, 1 << k, Scalar::one())
    }

    /// `Σ v_k e_k` for polynomial components.
    pub fn vector(dim: usize, tag: Algebra, v: &[PolyFn]) -> Self {
        assert_eq!(v.len(), dim);
        let mut m = Self::zero(dim, tag, v[0].shape);
        for (k, p) in v.iter().enumerate() {
            m.add_blade(1 << k, p);
        }
        m
    }

    pub fn top_mask(&self) -> u32 {
        ((1u64 << self.dim) - 1) as u32
    }

    pub fn terms(&self) -> &BTreeMap<u32, PolyFn> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_blade(&mut self, mask: u32, p: &PolyFn) {
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(v) => {
                *v = &*v + p;
                if v.is_zero() {
                    self.terms.remove(&mask);
                }
            }
            None => {
                self.terms.insert(mask, p.clone());
            }
        }
    }

    pub fn coeff(&self, mask: u32) -> PolyFn {
        self.terms.get(&mask).cloned().unwrap_or_else(|| PolyFn::zero(self.shape))
    }

    pub fn top(&self) -> PolyFn {
        self.coeff(self.top_mask())
    }

    pub fn scalar_part(&self) -> PolyFn {
        self.coeff(0)
    }

    pub fn grade(&self, k: u32) -> Self {
        self.filter(|mask| mask.count_ones() == k)
    }

    pub fn filter(&self, keep: impl Fn(u32) -> bool) -> Self {
        let mut m = Self::zero(self.dim, self.tag, self.shape);
        for (k, p) in &self.terms {
            if keep(*k) {
                m.terms.insert(*k, p.clone());
            }
        }
        m
    }

    pub fn max_grade(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.count_ones()).max()
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|k| k.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|k| k.count_ones() % 2 == 1)
    }

    pub fn retag(&self, tag: Algebra) -> Self {
        Multivector { tag, ..self.clone() }
    }

    pub fn map_coeffs(&self, f: impl Fn(&PolyFn) -> PolyFn) -> Self {
        let shape = self.terms.values().next().map(|p| f(p).shape).unwrap_or(self.shape);
        let mut m = Self::zero(self.dim, self.tag, shape);
        for (k, p) in &self.terms {
            m.add_blade(*k, &f(p));
        }
        m.shape = shape;
        m
    }

    /// Like `map_coeffs` but with an explicit target shape (needed when empty).
    pub fn map_into(&self, shape: Shape, f: impl Fn(&PolyFn) -> PolyFn) -> Self {
        let mut m = Self::zero(self.dim, self.tag, shape);
        for (k, p) in &self.terms {
            m.add_blade(*k, &f(p));
        }
        m
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map_into(self.shape, |p| p.scale(c))
    }

    pub fn scale_poly(&self, p: &PolyFn) -> Self {
        self.map_into(self.shape, |q| q * p)
    }

    pub fn deriv(&self, i: usize) -> Self {
        self.map_into(self.shape, |p| p.deriv(i))
    }

    /// Smallest equivariant degree `|I| + 2·(X-degree)` among the terms.
    pub fn min_eq_degree(&self) -> Option<i32> {
        let mut best: Option<i32> = None;
        for (k, p) in &self.terms {
            for m in p.terms().keys() {
                let d = k.count_ones() as i32 + 2 * self.shape.lie_degree(m);
                best = Some(best.map_or(d, |b: i32| b.min(d)));
            }
        }
        best
    }

    fn check_pair(&self, o: &Self) -> Result<(), AlgebraError> {
        if self.dim != o.dim {
            return Err(AlgebraError::DimensionMismatch(self.dim, o.dim));
        }
        if self.tag != o.tag {
            return Err(AlgebraError::WrongAlgebra { expected: self.tag, got: o.tag });
        }
        Ok(())
    }

    fn product(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.dim, self.tag, self.shape);
        for (a, pa) in &self.terms {
            for (b, pb) in &o.terms {
                let (mask, neg) = match self.tag {
                    Algebra::Exterior => {
                        if a & b != 0 {
                            continue;
                        }
                        (a | b, reorder_odd(*a, *b))
                    }
                    Algebra::Clifford => {
                        let contracted = (a & b).count_ones() % 2 == 1;
                        (a ^ b, reorder_odd(*a, *b) ^ contracted)
                    }
                };
                let prod = pa * pb;
                if neg {
                    out.add_blade(mask, &-&prod);
                } else {
                    out.add_blade(mask, &prod);
                }
            }
        }
        out
    }

    /// Interior product with the vector field `Σ v_k ∂_k` (exterior elements).
    pub fn contract(&self, v: &[PolyFn]) -> Self {
        let mut out = Self::zero(self.dim, self.tag, self.shape);
        for (mask, p) in &self.terms {
            let mut seen = 0;
            for k in 0..self.dim {
                if mask & (1 << k) == 0 {
                    continue;
                }
                if !v[k].is_zero() {
                    let term = p * &v[k];
                    let rest = mask & !(1 << k);
                    if seen % 2 == 1 {
                        out.add_blade(rest, &-&term);
                    } else {
                        out.add_blade(rest, &term);
                    }
                }
                seen += 1;
            }
        }
        out
    }

    /// Total sum of coefficient sizes, for cost estimates in tests.
    pub fn size(&self) -> usize {
        self.terms.values().map(|p| p.len()).sum()
    }
}

pub fn wedge(a: &Multivector, b: &Multivector) -> Result<Multivector, AlgebraError> {
    a.check_pair(b)?;
    if a.tag != Algebra::Exterior {
        return Err(AlgebraError::WrongAlgebra { expected: Algebra::Exterior, got: a.tag });
    }
    Ok(a.product(b))
}

pub fn clifford_mul(a: &Multivector, b: &Multivector) -> Result<Multivector, AlgebraError> {
    a.check_pair(b)?;
    if a.tag != Algebra::Clifford {
        return Err(AlgebraError::WrongAlgebra { expected: Algebra::Clifford, got: a.tag });
    }
    Ok(a.product(b))
}

pub fn quantize(a: &Multivector) -> Result<Multivector, AlgebraError> {
    if a.tag != Algebra::Exterior {
        return Err(AlgebraError::WrongAlgebra { expected: Algebra::Exterior, got: a.tag });
    }
    Ok(a.retag(Algebra::Clifford))
}

pub fn symbol_map(a: &Multivector) -> Result<Multivector, AlgebraError> {
    if a.tag != Algebra::Clifford {
        return Err(AlgebraError::WrongAlgebra { expected: Algebra::Clifford, got: a.tag });
    }
    Ok(a.retag(Algebra::Exterior))
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, o: &Multivector) -> Multivector {
        self.check_pair(o).expect("multivector add");
        let mut m = self.clone();
        for (k, p) in &o.terms {
            m.add_blade(*k, p);
        }
        m
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, o: &Multivector) -> Multivector {
        self + &(-o)
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.map_into(self.shape, |p| -p)
    }
}

impl Mul for &Multivector {
    type Output = Multivector;
    fn mul(self, o: &Multivector) -> Multivector {
        self.check_pair(o).expect("multivector product");
        self.product(o)
    }
}

owned_ops!(Multivector);

impl Ring for Multivector {
    fn zero_like(&self) -> Self {
        Multivector::zero(self.dim, self.tag, self.shape)
    }
    fn one_like(&self) -> Self {
        Multivector::one(self.dim, self.tag, self.shape)
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn rneg(&self) -> Self {
        -self
    }
    fn rscale_q(&self, c: &crate::scalar::Q) -> Self {
        self.map_into(self.shape, |p| p.scale_q(c))
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, p) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{p}]")?;
            if *k != 0 {
                write!(f, "e")?;
                for i in 0..self.dim {
                    if k & (1 << i) != 0 {
                        write!(f, "{}", i + 1)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Matrix of multivectors: the twisted algebra `Cl(n) ⊗ End(W)` or `Λ ⊗ End(W)`.
pub type TwistedElement = Mat<Multivector>;

/// `(-2i)^{n/2}`.
pub fn berezin_constant(n: usize) -> Result<Scalar, AlgebraError> {
    if n % 2 == 1 {
        return Err(AlgebraError::OddDimension(n));
    }
    let h = (n / 2) as i64;
    Ok(Scalar::term(crate::scalar::Q::from_integer((-2i64).pow(h as u32).into()), h, 0))
}

/// `(-2i)^{n/2}` times the trace of the top-blade coefficient.
pub fn berezin_str(a: &TwistedElement, n: usize) -> Result<PolyFn, AlgebraError> {
    let c = berezin_constant(n)?;
    let first = a.get(0, 0);
    let mut acc = PolyFn::zero(first.shape);
    for i in 0..a.rows() {
        let e = a.get(i, i);
        if e.dim != n {
            return Err(AlgebraError::DimensionMismatch(e.dim, n));
        }
        acc = &acc + &e.top();
    }
    Ok(acc.scale(&c))
}

/// Berezin supertrace with a grading on the twisting factor (`+1`/`-1` per row).
pub fn berezin_str_graded(a: &TwistedElement, n: usize, grading: &[i8]) -> Result<PolyFn, AlgebraError> {
    let c = berezin_constant(n)?;
    let mut acc = PolyFn::zero(a.get(0, 0).shape);
    for (i, g) in grading.iter().enumerate() {
        let e = a.get(i, i);
        if e.dim != n {
            return Err(AlgebraError::DimensionMismatch(e.dim, n));
        }
        let t = e.top();
        acc = if *g < 0 { &acc - &t } else { &acc + &t };
    }
    Ok(acc.scale(&c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh() -> Shape {
        Shape::constants()
    }

    fn e(tag: Algebra, n: usize, k: usize) -> Multivector {
        Multivector::gen(n, tag, sh(), k)
    }

    #[test]
    fn wedge_examples() {
        let (e1, e2) = (e(Algebra::Exterior, 3, 0), e(Algebra::Exterior, 3, 1));
        assert!(wedge(&e1, &e1).unwrap().is_zero());
        let e12 = wedge(&e1, &e2).unwrap();
        assert_eq!(e12, Multivector::const_blade(3, Algebra::Exterior, sh(), 0b11, Scalar::one()));
        assert_eq!(wedge(&(&e1 + &e2), &e2).unwrap(), e12);
        assert_eq!(wedge(&e2, &e1).unwrap(), -&e12);
    }

    #[test]
    fn clifford_examples() {
        let (e1, e2) = (e(Algebra::Clifford, 2, 0), e(Algebra::Clifford, 2, 1));
        assert_eq!(&e1 * &e1, Multivector::const_blade(2, Algebra::Clifford, sh(), 0, Scalar::int(-1)));
        let e12 = &e1 * &e2;
        assert_eq!(e12, Multivector::const_blade(2, Algebra::Clifford, sh(), 0b11, Scalar::one()));
        assert_eq!(&e12 * &e12, Multivector::const_blade(2, Algebra::Clifford, sh(), 0, Scalar::int(-1)));
    }

    #[test]
    fn mismatched_dimension_rejected() {
        let a = e(Algebra::Exterior, 2, 0);
        let b = e(Algebra::Exterior, 3, 0);
        assert_eq!(wedge(&a, &b), Err(AlgebraError::DimensionMismatch(2, 3)));
    }

    #[test]
    fn berezin_examples() {
        let one = Mat::identity(1, &Multivector::one(2, Algebra::Clifford, sh()));
        assert!(berezin_str(&one, 2).unwrap().is_zero());
        let top2 = Mat::diag_const(1, &Multivector::const_blade(2, Algebra::Clifford, sh(), 0b11, Scalar::one()));
        assert_eq!(berezin_str(&top2, 2).unwrap().constant_term(), Scalar::term(crate::scalar::q(-2, 1), 1, 0));
        let top4 = Mat::diag_const(1, &Multivector::const_blade(4, Algebra::Clifford, sh(), 0b1111, Scalar::one()));
        assert_eq!(berezin_str(&top4, 4).unwrap().constant_term(), Scalar::int(-4));
        assert_eq!(berezin_str(&top2, 3), Err(AlgebraError::OddDimension(3)));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(50))]
        #[test]
        fn products_associate_and_filter(seed in proptest::prelude::any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = crate::eqforms::form_shape(3, 1, 2);
            let [a, b, c] = [0, 1, 2].map(|_| crate::eqforms::gen::form(&mut rng, 3, s, 1, 3));
            proptest::prop_assert_eq!(wedge(&wedge(&a, &b).unwrap(), &c).unwrap(), wedge(&a, &wedge(&b, &c).unwrap()).unwrap());
            let (qa, qb, qc) = (quantize(&a).unwrap(), quantize(&b).unwrap(), quantize(&c).unwrap());
            proptest::prop_assert_eq!(&(&qa * &qb) * &qc, &qa * &(&qb * &qc));
            let ab = &qa * &qb;
            let (ga, gb) = (a.max_grade().unwrap_or(0), b.max_grade().unwrap_or(0));
            proptest::prop_assert!(ab.max_grade().map_or(true, |g| g <= ga + gb));
            proptest::prop_assert_eq!(symbol_map(&quantize(&a).unwrap()).unwrap(), a);
        }
    }
}
