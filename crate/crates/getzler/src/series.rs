//! Truncated power series in one variable with exact rational coefficients,
//! and their evaluation on nilpotent ring elements.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::matrix::Ring;
use crate::scalar::Q;

/// `Σ_{k<len} c_k z^k`; everything of order `z^len` and above is dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub c: Vec<Q>,
}

fn factorial(n: usize) -> Q {
    Q::from_integer((1..=n as u64).fold(BigInt::one(), |a, k| a * BigInt::from(k)))
}

impl Series {
    pub fn zero(len: usize) -> Self {
        Series { c: vec![Q::zero(); len] }
    }

    pub fn one(len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.c[0] = Q::one();
        }
        s
    }

    /// The variable `z` itself.
    pub fn var(len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 1 {
            s.c[1] = Q::one();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        Series { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Series { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, v: &Q) -> Self {
        Series { c: self.c.iter().map(|a| a * v).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        let mut out = Self::zero(n);
        for (i, a) in self.c.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                out.c[i + j] += a * b;
            }
        }
        out
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn inv(&self) -> Option<Self> {
        let a0 = self.c.first()?;
        if a0.is_zero() {
            return None;
        }
        let n = self.len();
        let mut out = Self::zero(n);
        out.c[0] = a0.recip();
        for k in 1..n {
            let mut acc = Q::zero();
            for j in 1..=k {
                acc += &self.c[j] * &out.c[k - j];
            }
            out.c[k] = -acc * &out.c[0];
        }
        Some(out)
    }

    /// `z ↦ c·z`.
    pub fn rescale_var(&self, v: &Q) -> Self {
        let mut p = Q::one();
        let mut out = self.clone();
        for a in out.c.iter_mut() {
            *a = &*a * &p;
            p = &p * v;
        }
        out
    }

    /// `f(g(z))` for `g` without constant term.
    pub fn compose(&self, g: &Self) -> Self {
        assert!(g.c.first().map_or(true, |a| a.is_zero()), "inner series must vanish at 0");
        let n = self.len().min(g.len());
        let mut out = Self::zero(n);
        let mut pw = Self::one(n);
        for a in self.c.iter().take(n) {
            out = out.add(&pw.scale(a));
            pw = pw.mul(g);
        }
        out
    }

    pub fn exp_series(len: usize) -> Self {
        Series { c: (0..len).map(|k| factorial(k).recip()).collect() }
    }

    /// `log(1 + z)`.
    pub fn log1p_series(len: usize) -> Self {
        let mut s = Self::zero(len);
        for k in 1..len {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            s.c[k] = Q::new(BigInt::from(sign), BigInt::from(k as i64));
        }
        s
    }

    /// `sqrt(1 + z)` by the binomial series.
    pub fn sqrt1p_series(len: usize) -> Self {
        let mut s = Self::zero(len);
        let half = Q::new(BigInt::one(), BigInt::from(2));
        let mut binom = Q::one();
        for k in 0..len {
            s.c[k] = binom.clone();
            binom = binom * (&half - Q::from_integer(BigInt::from(k as i64))) / Q::from_integer(BigInt::from(k as i64 + 1));
        }
        s
    }

    /// `sinh(z/2)/(z/2)`.
    pub fn sinhc_half(len: usize) -> Self {
        let mut s = Self::zero(len);
        for k in (0..len).step_by(2) {
            s.c[k] = (factorial(k + 1) * Q::from_integer(BigInt::from(2).pow(k as u32))).recip();
        }
        s
    }

    /// `cosh(z/2)`.
    pub fn cosh_half(len: usize) -> Self {
        let mut s = Self::zero(len);
        for k in (0..len).step_by(2) {
            s.c[k] = (factorial(k) * Q::from_integer(BigInt::from(2).pow(k as u32))).recip();
        }
        s
    }

    /// `(z/2)/sinh(z/2)`.
    pub fn ahat_series(len: usize) -> Self {
        Self::sinhc_half(len).inv().expect("unit constant term")
    }

    /// `log((z/2)/sinh(z/2))`.
    pub fn log_ahat_series(len: usize) -> Self {
        let u = Self::ahat_series(len).sub(&Self::one(len));
        Self::log1p_series(len).compose(&u)
    }

    /// `(z/2)·coth(z/2)`.
    pub fn half_coth_series(len: usize) -> Self {
        Self::cosh_half(len).mul(&Self::ahat_series(len))
    }

    /// `Σ c_k x^k` for a single ring element.
    pub fn eval<T: Ring>(&self, x: &T) -> T {
        let mut acc = x.zero_like();
        for a in self.c.iter().rev() {
            acc = acc.rmul(x).radd(&x.one_like().rscale_q(a));
        }
        acc
    }

    /// Evaluation that stops as soon as powers of `x` vanish (nilpotent input).
    pub fn eval_nilpotent<T: Ring>(&self, x: &T) -> T {
        let mut acc = x.zero_like();
        let mut pw = x.one_like();
        for a in &self.c {
            if pw.is_zero_elem() {
                break;
            }
            if !a.is_zero() {
                acc = acc.radd(&pw.rscale_q(a));
            }
            pw = pw.rmul(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn ahat_coefficients() {
        let a = Series::ahat_series(6);
        assert_eq!(a.c[0], q(1, 1));
        assert_eq!(a.c[2], q(-1, 24));
        assert_eq!(a.c[4], q(7, 5760));
    }

    #[test]
    fn exp_log_round_trip() {
        let n = 8;
        let l = Series::log1p_series(n);
        let e = Series::exp_series(n).compose(&l);
        assert_eq!(e, Series::one(n).add(&Series::var(n)));
    }

    #[test]
    fn sqrt_squares_back() {
        let s = Series::sqrt1p_series(7);
        assert_eq!(s.mul(&s), Series::one(7).add(&Series::var(7)));
    }

    #[test]
    fn coth_coefficients() {
        let c = Series::half_coth_series(5);
        assert_eq!(c.c[0], q(1, 1));
        assert_eq!(c.c[2], q(1, 12));
        assert_eq!(c.c[4], q(-1, 720));
    }
}
