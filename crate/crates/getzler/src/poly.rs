//! Sparse polynomials in chart variables `x_1..x_nx` and Lie parameters
//! `X_1..X_nl`, truncated at total `X`-degree `J`.
//!
//! Exponents are signed so that a chart variable can also serve as a Laurent
//! variable (the formal time in the heat kernel). Truncation only looks at the
//! Lie block, so products re-truncate automatically.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Scalar, Q};

pub type Mono = Vec<i32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub nx: usize,
    pub nl: usize,
    /// Largest kept `X`-degree; `None` keeps everything.
    pub j: Option<u32>,
}

impl Shape {
    pub const fn new(nx: usize, nl: usize, j: u32) -> Self {
        Shape { nx, nl, j: Some(j) }
    }

    pub const fn chart(nx: usize) -> Self {
        Shape { nx, nl: 0, j: None }
    }

    pub const fn constants() -> Self {
        Shape { nx: 0, nl: 0, j: None }
    }

    pub fn nvars(&self) -> usize {
        self.nx + self.nl
    }

    pub fn lie_degree(&self, m: &[i32]) -> i32 {
        m[self.nx..].iter().sum()
    }

    pub fn keeps(&self, m: &[i32]) -> bool {
        match self.j {
            Some(j) => self.lie_degree(m) <= j as i32,
            None => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyFn {
    pub shape: Shape,
    terms: BTreeMap<Mono, Scalar>,
}

impl PolyFn {
    pub fn zero(shape: Shape) -> Self {
        PolyFn { shape, terms: BTreeMap::new() }
    }

    pub fn one(shape: Shape) -> Self {
        Self::constant(shape, Scalar::one())
    }

    pub fn constant(shape: Shape, c: Scalar) -> Self {
        Self::monomial(shape, vec![0; shape.nvars()], c)
    }

    pub fn int(shape: Shape, n: i64) -> Self {
        Self::constant(shape, Scalar::int(n))
    }

    pub fn monomial(shape: Shape, m: Mono, c: Scalar) -> Self {
        assert_eq!(m.len(), shape.nvars(), "monomial length");
        let mut p = Self::zero(shape);
        if !c.is_zero() && shape.keeps(&m) {
            p.terms.insert(m, c);
        }
        p
    }

    /// The variable with flat index `i` (chart variables first).
    pub fn var(shape: Shape, i: usize) -> Self {
        let mut m = vec![0; shape.nvars()];
        m[i] = 1;
        Self::monomial(shape, m, Scalar::one())
    }

    pub fn x(shape: Shape, i: usize) -> Self {
        assert!(i < shape.nx);
        Self::var(shape, i)
    }

    pub fn lie(shape: Shape, a: usize) -> Self {
        assert!(a < shape.nl);
        Self::var(shape, shape.nx + a)
    }

    pub fn terms(&self) -> &BTreeMap<Mono, Scalar> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Mono, Scalar> {
        self.terms
    }

    pub fn from_terms(shape: Shape, terms: impl IntoIterator<Item = (Mono, Scalar)>) -> Self {
        let mut p = Self::zero(shape);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: Scalar) {
        if c.is_zero() || !self.shape.keeps(&m) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn coeff(&self, m: &[i32]) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&vec![0; self.shape.nvars()])
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.iter().all(|&e| e == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.shape);
        }
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            let w = v * c;
            if !w.is_zero() {
                p.terms.insert(m.clone(), w);
            }
        }
        p
    }

    pub fn scale_q(&self, c: &Q) -> Self {
        self.scale(&Scalar::from_q(c.clone()))
    }

    /// Partial derivative in the flat variable `i`.
    pub fn deriv(&self, i: usize) -> Self {
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            let e = m[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            p.add_term(m2, v * &Scalar::int(e as i64));
        }
        p
    }

    /// Multiplies by the monomial `var_i^e` (Laurent shifts allowed).
    pub fn shift(&self, i: usize, e: i32) -> Self {
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            let mut m2 = m.clone();
            m2[i] += e;
            p.add_term(m2, v.clone());
        }
        p
    }

    /// Smallest and largest total degree over the variables in `range`.
    pub fn degree_span(&self, range: std::ops::Range<usize>) -> Option<(i32, i32)> {
        let mut span: Option<(i32, i32)> = None;
        for m in self.terms.keys() {
            let d: i32 = m[range.clone()].iter().sum();
            span = Some(match span {
                None => (d, d),
                Some((lo, hi)) => (lo.min(d), hi.max(d)),
            });
        }
        span
    }

    pub fn min_degree_in(&self, range: std::ops::Range<usize>) -> Option<i32> {
        self.degree_span(range).map(|s| s.0)
    }

    pub fn max_degree_in(&self, range: std::ops::Range<usize>) -> Option<i32> {
        self.degree_span(range).map(|s| s.1)
    }

    /// Keeps the terms whose degree in `range` equals `d`.
    pub fn homogeneous_part(&self, range: std::ops::Range<usize>, d: i32) -> Self {
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            if m[range.clone()].iter().sum::<i32>() == d {
                p.terms.insert(m.clone(), v.clone());
            }
        }
        p
    }

    /// Keeps the terms whose degree in `range` is below `d`.
    pub fn truncate_degree(&self, range: std::ops::Range<usize>, d: i32) -> Self {
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            if m[range.clone()].iter().sum::<i32>() < d {
                p.terms.insert(m.clone(), v.clone());
            }
        }
        p
    }

    /// Substitutes constants for some variables.
    pub fn subs(&self, vals: &[(usize, Scalar)]) -> Self {
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            let mut c = v.clone();
            let mut m2 = m.clone();
            for (i, x) in vals {
                let e = m2[*i];
                if e != 0 {
                    c = &c * &x.pow(e).expect("Laurent variable evaluated at a non-unit");
                    m2[*i] = 0;
                }
            }
            p.add_term(m2, c);
        }
        p
    }

    /// Sets the variables in `range` to zero.
    pub fn restrict_zero(&self, range: std::ops::Range<usize>) -> Self {
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            if m[range.clone()].iter().all(|&e| e == 0) {
                p.terms.insert(m.clone(), v.clone());
            }
        }
        p
    }

    /// Full evaluation; every variable gets a value.
    pub fn eval(&self, vals: &[Scalar]) -> Scalar {
        assert_eq!(vals.len(), self.shape.nvars());
        let all: Vec<(usize, Scalar)> = vals.iter().cloned().enumerate().collect();
        self.subs(&all).constant_term()
    }

    /// Rewrites every monomial into another shape; `f` returns `None` to drop.
    pub fn remap(&self, shape: Shape, f: impl Fn(&[i32]) -> Option<Mono>) -> Self {
        let mut p = Self::zero(shape);
        for (m, v) in &self.terms {
            if let Some(m2) = f(m) {
                p.add_term(m2, v.clone());
            }
        }
        p
    }

    /// Same polynomial with `extra` chart variables appended after the chart block.
    pub fn extend_chart(&self, extra: usize) -> Self {
        let s = self.shape;
        let ns = Shape { nx: s.nx + extra, ..s };
        self.remap(ns, |m| {
            let mut v = m[..s.nx].to_vec();
            v.extend(std::iter::repeat(0).take(extra));
            v.extend_from_slice(&m[s.nx..]);
            Some(v)
        })
    }

    /// Largest power of any variable, for sizing loops.
    pub fn max_abs_exponent(&self) -> i32 {
        self.terms.keys().flat_map(|m| m.iter().map(|e| e.abs())).max().unwrap_or(0)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        let mut p = Self::zero(self.shape);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), f(v));
        }
        p
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.shape);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &PolyFn {
    type Output = PolyFn;
    fn add(self, rhs: &PolyFn) -> PolyFn {
        debug_assert_eq!(self.shape, rhs.shape, "shape mismatch");
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut p = big.clone();
        for (m, v) in &small.terms {
            p.add_term(m.clone(), v.clone());
        }
        p
    }
}

impl Sub for &PolyFn {
    type Output = PolyFn;
    fn sub(self, rhs: &PolyFn) -> PolyFn {
        debug_assert_eq!(self.shape, rhs.shape, "shape mismatch");
        let mut p = self.clone();
        for (m, v) in &rhs.terms {
            p.add_term(m.clone(), -v);
        }
        p
    }
}

impl Neg for &PolyFn {
    type Output = PolyFn;
    fn neg(self) -> PolyFn {
        PolyFn { shape: self.shape, terms: self.terms.iter().map(|(m, v)| (m.clone(), -v)).collect() }
    }
}

impl Mul for &PolyFn {
    type Output = PolyFn;
    fn mul(self, rhs: &PolyFn) -> PolyFn {
        debug_assert_eq!(self.shape, rhs.shape, "shape mismatch");
        let mut p = PolyFn::zero(self.shape);
        if self.is_zero() || rhs.is_zero() {
            return p;
        }
        let n = self.shape.nvars();
        for (ma, va) in &self.terms {
            for (mb, vb) in &rhs.terms {
                let m: Mono = (0..n).map(|k| ma[k] + mb[k]).collect();
                if !self.shape.keeps(&m) {
                    continue;
                }
                p.add_term(m, va * vb);
            }
        }
        p
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl std::ops::Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                &self + &rhs
            }
        }
        impl std::ops::Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                &self - &rhs
            }
        }
        impl std::ops::Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                &self * &rhs
            }
        }
        impl std::ops::Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}
pub(crate) use owned_ops;

owned_ops!(PolyFn);

impl fmt::Display for PolyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({v})")?;
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = if i < self.shape.nx { format!("x{}", i + 1) } else { format!("X{}", i - self.shape.nx + 1) };
                if e == 1 {
                    write!(f, "·{name}")?;
                } else {
                    write!(f, "·{name}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_drops_high_lie_degree() {
        let s = Shape::new(1, 1, 1);
        let x = PolyFn::lie(s, 0);
        assert!((&x * &x).is_zero());
        assert!(!x.is_zero());
    }

    #[test]
    fn derivative_of_laurent_power() {
        let s = Shape::chart(1);
        let t_inv = PolyFn::monomial(s, vec![-1], Scalar::one());
        let d = t_inv.deriv(0);
        assert_eq!(d, PolyFn::monomial(s, vec![-2], Scalar::int(-1)));
    }

    #[test]
    fn extend_chart_keeps_lie_block() {
        let s = Shape::new(1, 1, 2);
        let p = &PolyFn::x(s, 0) * &PolyFn::lie(s, 0);
        let e = p.extend_chart(2);
        assert_eq!(e.shape.nx, 3);
        assert_eq!(e.coeff(&[1, 0, 0, 1]), Scalar::one());
    }
}
