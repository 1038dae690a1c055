//! Dense square-or-not matrices over any of the crate's coefficient rings.

use std::fmt;

use crate::poly::PolyFn;
use crate::scalar::{Scalar, Q};

/// The handful of ring operations the matrix code needs.
///
/// Zero and one are produced from an existing element because polynomial
/// rings carry their variable layout at runtime.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn radd(&self, o: &Self) -> Self;
    fn rsub(&self, o: &Self) -> Self;
    fn rmul(&self, o: &Self) -> Self;
    fn rneg(&self) -> Self;
    fn rscale_q(&self, c: &Q) -> Self;
}

impl Ring for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero()
    }
    fn one_like(&self) -> Self {
        Scalar::one()
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
    fn rscale_q(&self, c: &Q) -> Self {
        self.scale_q(c)
    }
}

impl Ring for PolyFn {
    fn zero_like(&self) -> Self {
        PolyFn::zero(self.shape)
    }
    fn one_like(&self) -> Self {
        PolyFn::one(self.shape)
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
    fn rscale_q(&self, c: &Q) -> Self {
        self.scale_q(c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Ring> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize, proto: &T) -> Self {
        let z = proto.zero_like();
        Self::from_fn(rows, cols, |_, _| z.clone())
    }

    pub fn identity(n: usize, proto: &T) -> Self {
        let (z, o) = (proto.zero_like(), proto.one_like());
        Self::from_fn(n, n, |r, c| if r == c { o.clone() } else { z.clone() })
    }

    /// `x · 1` for a ring element `x`.
    pub fn diag_const(n: usize, x: &T) -> Self {
        let z = x.zero_like();
        Self::from_fn(n, n, |r, c| if r == c { x.clone() } else { z.clone() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero_elem())
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.radd(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape mismatch");
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.rsub(b)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.rneg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch");
        let z = self.data.first().or(o.data.first()).expect("empty matrix").zero_like();
        Self::from_fn(self.rows, o.cols, |r, c| {
            let mut acc = z.clone();
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero_elem() {
                    continue;
                }
                let b = o.get(k, c);
                if b.is_zero_elem() {
                    continue;
                }
                acc = acc.radd(&a.rmul(b));
            }
            acc
        })
    }

    /// Left multiplication of every entry by `x`.
    pub fn lscale(&self, x: &T) -> Self {
        self.map(|a| x.rmul(a))
    }

    pub fn rscale(&self, x: &T) -> Self {
        self.map(|a| a.rmul(x))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn trace(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut acc = self.data[0].zero_like();
        for i in 0..self.rows {
            acc = acc.radd(self.get(i, i));
        }
        acc
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = v[0].zero_like();
                for (c, x) in v.iter().enumerate() {
                    let a = self.get(r, c);
                    if !a.is_zero_elem() && !x.is_zero_elem() {
                        acc = acc.radd(&a.rmul(x));
                    }
                }
                acc
            })
            .collect()
    }
}

impl<T: Ring> Ring for Mat<T> {
    fn zero_like(&self) -> Self {
        Mat::zeros(self.rows, self.cols, &self.data[0])
    }
    fn one_like(&self) -> Self {
        Mat::identity(self.rows, &self.data[0])
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn radd(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn rsub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn rmul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn rneg(&self) -> Self {
        self.neg()
    }
    fn rscale_q(&self, c: &Q) -> Self {
        self.map(|a| a.rscale_q(c))
    }
}

/// Rank of a matrix over an integral domain by fraction-free elimination.
pub fn rank<T: Ring>(m: &Mat<T>) -> usize {
    let mut rows: Vec<Vec<T>> = (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c).clone()).collect()).collect();
    let mut rank = 0;
    for col in 0..m.cols() {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero_elem()) else { continue };
        rows.swap(rank, piv);
        let p = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            let f = rows[r][col].clone();
            if f.is_zero_elem() {
                continue;
            }
            for c in 0..m.cols() {
                rows[r][c] = p.rmul(&rows[r][c]).rsub(&f.rmul(&rows[rank][c]));
            }
        }
        rank += 1;
    }
    rank
}

impl<T: Ring + fmt::Display> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}
