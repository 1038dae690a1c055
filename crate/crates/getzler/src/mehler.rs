//! Mehler kernel of the zero-fiber harmonic oscillator, with an exact check of
//! the heat equation in the Gaussian–Laurent ring.
//!
//! A kernel is `(4πτ)^{−n/2} e^{−|ξ|²/4τ} · B(τ, ξ)`; only the body `B` is
//! stored. Its coefficients live in the shape `(ξ_1..ξ_n, τ | X)` with signed
//! `τ` exponents. Differentiating through the implicit factors gives
//! `∂_i ↦ ∂_i − ξ_i/2τ` and `∂_τ ↦ ∂_τ + |ξ|²/4τ² − n/2τ`.

use thiserror::Error;

use crate::eqforms::{self, EqForm, FormError};
use crate::gradealg::{berezin_constant, Algebra, Multivector};
use crate::matrix::{Mat, Ring};
use crate::poly::{PolyFn, Shape};
use crate::scalar::{q, Scalar, Q};
use crate::series::Series;
use crate::symbols::CurvatureModel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MehlerError {
    #[error("R_g entry ({0}, {1}) has a degree-zero part")]
    NotNilpotent(usize, usize),
    #[error("supertrace needs even dimension, got {0}")]
    OddDimension(usize),
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianElement {
    pub n: usize,
    pub shape: Shape,
    pub body: Mat<Multivector>,
}

/// `(η | X)` to `(ξ, τ | X)`.
pub fn kernel_shape(k: &CurvatureModel) -> Shape {
    Shape { nx: k.n + 1, nl: k.shape.nl, j: k.shape.j }
}

fn lift(n: usize, to: Shape, p: &PolyFn) -> PolyFn {
    p.remap(to, |m| {
        let mut out = m[..n].to_vec();
        out.push(0);
        out.extend_from_slice(&m[n..]);
        Some(out)
    })
}

fn lift_mv(n: usize, to: Shape, a: &Multivector) -> Multivector {
    a.map_into(to, |p| lift(n, to, p))
}

fn series_len(k: &CurvatureModel) -> usize {
    k.n / 2 + k.shape.j.unwrap_or(0) as usize + 2
}

fn tau_pow(shape: Shape, n: usize, e: i32) -> PolyFn {
    PolyFn::one(shape).shift(n, e)
}

/// Laplace expansion for commuting entries.
pub fn det(m: &Mat<Multivector>) -> Multivector {
    let n = m.rows();
    let proto = m.get(0, 0);
    if n == 1 {
        return proto.clone();
    }
    let mut acc = proto.zero_like();
    for c in 0..n {
        let e = m.get(0, c);
        if e.is_zero() {
            continue;
        }
        let minor = Mat::from_fn(n - 1, n - 1, |i, j| m.get(i + 1, if j < c { j } else { j + 1 }).clone());
        let t = e * &det(&minor);
        acc = if c % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

/// `det^{1/2}(1 + N)` for nilpotent `N`, through the binomial series.
pub fn det_half(m: &Mat<Multivector>, len: usize) -> Multivector {
    let d = det(m);
    let u = &d - &d.one_like();
    Series::sqrt1p_series(len).eval_nilpotent(&u)
}

fn check(k: &CurvatureModel) -> Result<(), MehlerError> {
    let rg = k.r_g();
    for i in 0..k.n {
        for j in 0..k.n {
            if let Some(d) = rg.get(i, j).min_eq_degree() {
                if d < 1 {
                    return Err(MehlerError::NotNilpotent(i, j));
                }
            }
        }
    }
    Ok(())
}

/// `B = det^{1/2}(h(τR_g)) · exp(−(1/4τ) ξᵀ Q(τR_g) ξ) · exp(−τ𝖥_g)` with
/// `h(z) = (z/2)/sinh(z/2)` and `Q(z) = (z/2)coth(z/2) − 1`.
pub fn mehler_kernel(k: &CurvatureModel) -> Result<GaussianElement, MehlerError> {
    check(k)?;
    let n = k.n;
    let s = kernel_shape(k);
    let len = series_len(k) * 2;
    let tau = tau_pow(s, n, 1);
    let trg = k.r_g().map(|e| lift_mv(n, s, e).scale_poly(&tau));
    let h = Series::ahat_series(len).eval_nilpotent(&trg);
    let dh = det_half(&h, len);
    let mut qs = Series::half_coth_series(len);
    qs.c[0] = Q::from_integer(0.into());
    let qm = qs.eval_nilpotent(&trg);
    let mut quad = Multivector::zero(n, Algebra::Exterior, s);
    for i in 0..n {
        for j in 0..n {
            let xi = &PolyFn::x(s, i) * &PolyFn::x(s, j);
            quad = &quad + &qm.get(i, j).scale_poly(&xi);
        }
    }
    let quad = quad.scale_poly(&tau_pow(s, n, -1).scale(&Scalar::ratio(-1, 4)));
    let eq = Series::exp_series(len).eval_nilpotent(&quad);
    let ftau = k.f_g().map(|e| lift_mv(n, s, e).scale_poly(&tau).scale(&Scalar::int(-1)));
    let ef = Series::exp_series(len).eval_nilpotent(&ftau);
    let scal = &dh * &eq;
    Ok(GaussianElement { n, shape: s, body: ef.map(|e| &scal * e) })
}

fn xi(s: Shape, i: usize) -> PolyFn {
    PolyFn::x(s, i)
}

/// `(∂_τ + |ξ|²/4τ² − n/2τ) B + Ĥ B` where
/// `Ĥ = −Σ_i (D_i + a_i)² + 𝖥_g` and `D_i = ∂_i − ξ_i/2τ`.
pub fn heat_residual(k: &CurvatureModel, g: &GaussianElement) -> Mat<Multivector> {
    let n = k.n;
    let s = g.shape;
    let b = &g.body;
    let mut r2 = PolyFn::zero(s);
    for i in 0..n {
        r2 = &r2 + &(&xi(s, i) * &xi(s, i));
    }
    let gauss_t = &(&r2 * &tau_pow(s, n, -2)).scale(&Scalar::ratio(1, 4)) - &tau_pow(s, n, -1).scale(&Scalar::ratio(n as i64, 2));
    let mut out = b.map(|e| e.deriv(n)).add(&b.map(|e| e.scale_poly(&gauss_t)));
    let fg = k.f_g().map(|e| lift_mv(n, s, e));
    out = out.add(&fg.mul(b));
    for i in 0..n {
        let a = lift_mv(n, s, &k.a(i));
        let shift = (&xi(s, i) * &tau_pow(s, n, -1)).scale(&Scalar::ratio(-1, 2));
        let v = |m: &Mat<Multivector>| m.map(|e| &(&e.deriv(i) + &e.scale_poly(&shift)) + &(&a * e));
        out = out.sub(&v(&v(b)));
    }
    out
}

pub fn verify_heat_equation(k: &CurvatureModel) -> Result<Mat<Multivector>, MehlerError> {
    let g = mehler_kernel(k)?;
    Ok(heat_residual(k, &g))
}

/// `(4π)^{−n/2} (−2i)^{n/2} tr [B(1, 0)]_top` as a top form in the curvature shape.
pub fn kernel_supertrace_at_one(k: &CurvatureModel) -> Result<EqForm, MehlerError> {
    let n = k.n;
    if n % 2 == 1 {
        return Err(MehlerError::OddDimension(n));
    }
    let g = mehler_kernel(k)?;
    let mut subs: Vec<(usize, Scalar)> = (0..n).map(|i| (i, Scalar::zero())).collect();
    subs.push((n, Scalar::one()));
    let c = &berezin_constant(n).map_err(|_| MehlerError::OddDimension(n))? * &four_pi_pow(n);
    let mut tr = PolyFn::zero(k.shape);
    for a in 0..k.r {
        let top = g.body.get(a, a).top().subs(&subs);
        tr = &tr + &top.remap(k.shape, |m| Some([&m[..n], &m[n + 1..]].concat()));
    }
    let mask = (1u32 << n) - 1;
    Ok(Multivector::blade(n, Algebra::Exterior, mask, tr.scale(&c)))
}

/// `(4π)^{−n/2}` for even `n`.
fn four_pi_pow(n: usize) -> Scalar {
    let h = (n / 2) as i32;
    Scalar::term(q(1, 1 << h), 0, -h)
}

/// `(2πi)^{−n/2} [Â_g · Ch_g]_top` from the characteristic-form pipeline.
pub fn kirillov_integrand(k: &CurvatureModel) -> Result<EqForm, MehlerError> {
    let n = k.n;
    if n % 2 == 1 {
        return Err(MehlerError::OddDimension(n));
    }
    let a = eqforms::ahat(&k.r_g())?;
    let ch = eqforms::ch_rel(&k.f_g(), None)?;
    let h = (n / 2) as i64;
    let c = Scalar::term(Q::from_integer(1.into()), -h, -(h as i32));
    let mask = (1u32 << n) - 1;
    Ok((&a * &ch).filter(|m| m == mask).scale(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::gen::curvature_model;
    use rand::SeedableRng;

    #[test]
    fn free_kernel() {
        for n in [1, 2] {
            let k = CurvatureModel::flat(n, 1, 1, 1);
            let g = mehler_kernel(&k).unwrap();
            assert_eq!(g.body, Mat::identity(1, &Multivector::zero(n, Algebra::Exterior, g.shape)));
            assert!(heat_residual(&k, &g).is_zero());
        }
    }

    #[test]
    fn perturbed_body_fails() {
        let k = CurvatureModel::flat(2, 1, 1, 1);
        let mut g = mehler_kernel(&k).unwrap();
        let t = tau_pow(g.shape, 2, 1);
        g.body = g.body.map(|e| e + &Multivector::scalar(2, Algebra::Exterior, t.clone()));
        assert!(!heat_residual(&k, &g).is_zero());
    }

    #[test]
    fn constant_term_of_body() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let k = curvature_model(&mut rng, 2, 1, 1, 1);
        let g = mehler_kernel(&k).unwrap();
        let e = g.body.get(0, 0);
        let s = g.shape;
        // The τ¹ ξ⁰ part is −𝖥_g.
        let lin: Multivector = e.map_coeffs(|p| PolyFn::from_terms(s, p.terms().iter().filter(|(m, _)| m[..2] == [0, 0] && m[2] == 1).map(|(m, c)| (m.clone(), c.clone()))));
        let want = lift_mv(2, s, k.f_g().get(0, 0)).scale_poly(&tau_pow(s, 2, 1)).scale(&Scalar::int(-1));
        assert_eq!(lin, want);
        assert_eq!(e.scalar_part().coeff(&[0, 0, 0, 0]), Scalar::one());
    }

    #[test]
    fn det_route_matches_ahat() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4] {
            let k = curvature_model(&mut rng, n, 1, 1, 1);
            let len = series_len(&k) * 2;
            let h = Series::ahat_series(len).eval_nilpotent(&k.r_g());
            assert_eq!(det_half(&h, len), eqforms::ahat(&k.r_g()).unwrap());
        }
    }

    #[test]
    fn odd_dimension_supertrace() {
        let k = CurvatureModel::flat(3, 1, 1, 1);
        assert_eq!(kernel_supertrace_at_one(&k), Err(MehlerError::OddDimension(3)));
    }

    #[test]
    fn heat_equation_and_supertrace_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (n, j, r) in [(2, 1, 1), (2, 2, 2), (4, 1, 2)] {
            let k = curvature_model(&mut rng, n, r, 1, j);
            assert!(verify_heat_equation(&k).unwrap().is_zero(), "n={n} J={j}");
            if n == 2 {
                assert_eq!(kernel_supertrace_at_one(&k).unwrap(), kirillov_integrand(&k).unwrap());
            }
        }
    }
}
