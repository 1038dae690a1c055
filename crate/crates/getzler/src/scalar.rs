//! Exact scalars: finite sums of `q · i^k · (2π)^m`.
//!
//! A single term is the number format the algebra needs for the constants
//! `(2πi)^{-n/2}` and `(4π)^{-n/2}`; sums of terms with different tags close the
//! set under addition, so the whole thing is a commutative ring. The canonical
//! form keeps `k ∈ {0, 1}` (a factor `i² = -1` is folded into `q`), terms sorted
//! by `(k, m)`, and no zero coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rational shorthand used throughout the crate.
pub type Q = BigRational;

/// Builds the rational `n / d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub q: Q,
    pub i_pow: u8,
    pub twopi_pow: i32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Scalar {
    terms: Vec<Term>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_q(Q::one())
    }

    pub fn from_q(v: Q) -> Self {
        Self::term(v, 0, 0)
    }

    pub fn int(n: i64) -> Self {
        Self::from_q(Q::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_q(q(n, d))
    }

    /// `v · i^k · (2π)^m` in canonical form.
    pub fn term(v: Q, k: i64, m: i32) -> Self {
        if v.is_zero() {
            return Self::zero();
        }
        let k = k.rem_euclid(4) as u8;
        let (v, k) = if k >= 2 { (-v, k - 2) } else { (v, k) };
        Scalar { terms: vec![Term { q: v, i_pow: k, twopi_pow: m }] }
    }

    pub fn i() -> Self {
        Self::term(Q::one(), 1, 0)
    }

    pub fn two_pi() -> Self {
        Self::term(Q::one(), 0, 1)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].i_pow == 0 && self.terms[0].twopi_pow == 0 && self.terms[0].q.is_one()
    }

    /// The value as a plain rational, if it is one.
    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [t] if t.i_pow == 0 && t.twopi_pow == 0 => Some(t.q.clone()),
            _ => None,
        }
    }

    pub fn scale_q(&self, v: &Q) -> Self {
        if v.is_zero() {
            return Self::zero();
        }
        Scalar { terms: self.terms.iter().map(|t| Term { q: &t.q * v, ..t.clone() }).collect() }
    }

    /// Multiplicative inverse; only single terms are units in this ring.
    pub fn inverse(&self) -> Option<Self> {
        match self.terms.as_slice() {
            [t] => {
                let inv = t.q.recip();
                Some(Self::term(inv, -(t.i_pow as i64), -t.twopi_pow))
            }
            _ => None,
        }
    }

    pub fn pow(&self, e: i32) -> Option<Self> {
        if e < 0 {
            return self.inverse().map(|inv| inv.pow(-e).expect("non-negative power"));
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Some(acc)
    }

    /// Numeric value; only used at the float boundary.
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for t in &self.terms {
            let v = t.q.to_f64().unwrap_or(f64::NAN) * (2.0 * std::f64::consts::PI).powi(t.twopi_pow);
            if t.i_pow == 0 {
                re += v;
            } else {
                im += v;
            }
        }
        (re, im)
    }

    fn from_sorted(mut terms: Vec<Term>) -> Self {
        terms.retain(|t| !t.q.is_zero());
        Scalar { terms }
    }
}

fn key(t: &Term) -> (u8, i32) {
    (t.i_pow, t.twopi_pow)
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if rhs.terms.is_empty() {
            return self.clone();
        }
        if self.terms.is_empty() {
            return rhs.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut a, mut b) = (0, 0);
        while a < self.terms.len() && b < rhs.terms.len() {
            let (x, y) = (&self.terms[a], &rhs.terms[b]);
            match key(x).cmp(&key(y)) {
                Ordering::Less => {
                    out.push(x.clone());
                    a += 1;
                }
                Ordering::Greater => {
                    out.push(y.clone());
                    b += 1;
                }
                Ordering::Equal => {
                    out.push(Term { q: &x.q + &y.q, ..x.clone() });
                    a += 1;
                    b += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[a..]);
        out.extend_from_slice(&rhs.terms[b..]);
        Scalar::from_sorted(out)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { terms: self.terms.iter().map(|t| Term { q: -t.q.clone(), ..t.clone() }).collect() }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return Scalar::zero();
        }
        if self.terms.len() == 1 && rhs.terms.len() == 1 {
            let (x, y) = (&self.terms[0], &rhs.terms[0]);
            return Scalar::term(&x.q * &y.q, (x.i_pow + y.i_pow) as i64, x.twopi_pow + y.twopi_pow);
        }
        let mut acc = Scalar::zero();
        for x in &self.terms {
            for y in &rhs.terms {
                let t = Scalar::term(&x.q * &y.q, (x.i_pow + y.i_pow) as i64, x.twopi_pow + y.twopi_pow);
                acc = &acc + &t;
            }
        }
        acc
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl From<Q> for Scalar {
    fn from(v: Q) -> Self {
        Scalar::from_q(v)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, t) in self.terms.iter().enumerate() {
            let neg = t.q.is_negative();
            if n > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            write!(f, "{}", t.q.abs())?;
            if t.i_pow == 1 {
                write!(f, "·i")?;
            }
            if t.twopi_pow != 0 {
                write!(f, "·(2π)^{}", t.twopi_pow)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared_folds_into_sign() {
        let m1 = &Scalar::i() * &Scalar::i();
        assert_eq!(m1, Scalar::int(-1));
        assert_eq!(Scalar::term(Q::one(), 3, 0), -Scalar::i());
    }

    #[test]
    fn kirillov_constants_agree() {
        // (4π)^{-1}·(-2i) and (2πi)^{-1} are the same single term.
        let four_pi_inv = Scalar::term(q(1, 2), 0, -1);
        let lhs = &four_pi_inv * &Scalar::term(q(-2, 1), 1, 0);
        let rhs = (&Scalar::two_pi() * &Scalar::i()).inverse().unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mixed_sums_stay_canonical() {
        let a = &Scalar::two_pi() + &Scalar::int(1);
        let b = &a - &Scalar::two_pi();
        assert_eq!(b, Scalar::one());
        assert!(a.inverse().is_none());
    }
}
