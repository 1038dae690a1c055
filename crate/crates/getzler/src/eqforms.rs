//! Cartan model on a polynomial chart `ℝⁿ` with Lie parameters `X_1..X_d`.
//!
//! An equivariant form is an exterior [`Multivector`] whose coefficients are
//! [`PolyFn`]s in `(x | X)`, truncated at `X`-degree `J`. Matrix-valued forms
//! are `Mat<Multivector>`. The equivariant degree of `P(X)·dx^I` is
//! `|I| + 2·deg P`.

use rand::Rng as _;
use thiserror::Error;

use crate::gradealg::{Algebra, Multivector};
use crate::matrix::{Mat, Ring};
use crate::poly::{Mono, PolyFn, Shape};
use crate::scalar::{q, Scalar};
use crate::series::Series;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("chart mismatch: expected dimension {expected}, got {got}")]
    ChartMismatch { expected: usize, got: usize },
    #[error("action field is not linear in the Lie parameters")]
    NonlinearAction,
    #[error("matrix is not antisymmetric at entry ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("entry ({0}, {1}) has a term of equivariant degree 0, so the series does not terminate")]
    NotNilpotent(usize, usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("form must vanish at the base point")]
    NonzeroAtBase,
}

pub type EqForm = Multivector;
pub type MatForm = Mat<Multivector>;

/// Polynomial vector field `Σ v^i ∂_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub comps: Vec<PolyFn>,
}

impl VectorField {
    pub fn new(comps: Vec<PolyFn>) -> Self {
        VectorField { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn shape(&self) -> Shape {
        self.comps[0].shape
    }

    /// Every monomial has `X`-degree exactly one.
    pub fn is_linear_in_lie(&self) -> bool {
        let s = self.shape();
        self.comps.iter().all(|p| p.terms().keys().all(|m| s.lie_degree(m) == 1))
    }

    /// Radial field `Σ x^i ∂_i` over the first `n` chart variables.
    pub fn radial(shape: Shape, n: usize) -> Self {
        VectorField { comps: (0..n).map(|i| PolyFn::x(shape, i)).collect() }
    }

    /// Linear action `X ↦ Σ_a X_a B_a x`, given the generator matrices `B_a`.
    pub fn linear_action(shape: Shape, gens: &[Vec<Vec<Scalar>>]) -> Self {
        let n = gens[0].len();
        let mut comps = vec![PolyFn::zero(shape); n];
        for (a, b) in gens.iter().enumerate() {
            let xa = PolyFn::lie(shape, a);
            for i in 0..n {
                for j in 0..n {
                    if !b[i][j].is_zero() {
                        comps[i] = &comps[i] + &(&xa * &PolyFn::x(shape, j)).scale(&b[i][j]);
                    }
                }
            }
        }
        VectorField { comps }
    }

    /// Rotation `X(x₁∂₂ − x₂∂₁)` in the plane `(p, p+1)`, Lie parameter `a`.
    pub fn rotation(shape: Shape, n: usize, planes: &[(usize, usize)]) -> Self {
        let mut gens = Vec::new();
        for &(i, j) in planes {
            let mut b = vec![vec![Scalar::zero(); n]; n];
            b[j][i] = Scalar::one();
            b[i][j] = Scalar::int(-1);
            gens.push(b);
        }
        Self::linear_action(shape, &gens)
    }

    /// Fiber action on `TM` induced by the flow: `Φ_ij = −∂_j v^i`.
    pub fn tangent_action(&self) -> Mat<PolyFn> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| -&self.comps[i].deriv(j))
    }
}

pub fn form_shape(n: usize, d: usize, j: u32) -> Shape {
    Shape::new(n, d, j)
}

/// Power at which every positive-degree element dies: `n + 2J + 1`.
pub fn nilpotency_order(n: usize, shape: Shape) -> usize {
    let j = if shape.nl == 0 { 0 } else { shape.j.expect("unbounded Lie degree") as usize };
    n + 2 * j + 1
}

pub fn zero_form(n: usize, shape: Shape) -> EqForm {
    Multivector::zero(n, Algebra::Exterior, shape)
}

pub fn function(n: usize, p: PolyFn) -> EqForm {
    Multivector::scalar(n, Algebra::Exterior, p)
}

/// `dx^{i+1}`.
pub fn dx(n: usize, shape: Shape, i: usize) -> EqForm {
    Multivector::gen(n, Algebra::Exterior, shape, i)
}

/// `Σ_i c_i dx^i`.
pub fn one_form(n: usize, c: &[PolyFn]) -> EqForm {
    Multivector::vector(n, Algebra::Exterior, c)
}

fn check_dim(a: &EqForm, n: usize) -> Result<(), FormError> {
    if a.dim != n {
        return Err(FormError::ChartMismatch { expected: n, got: a.dim });
    }
    if a.shape.nx < n {
        return Err(FormError::ChartMismatch { expected: n, got: a.shape.nx });
    }
    Ok(())
}

/// `dx^i ∧ α`.
pub fn dx_wedge(i: usize, a: &EqForm) -> EqForm {
    let mut out = a.zero_like();
    for (mask, p) in a.terms() {
        if mask & (1 << i) != 0 {
            continue;
        }
        let before = (mask & ((1u32 << i) - 1)).count_ones();
        let c = if before % 2 == 1 { -p } else { p.clone() };
        out.add_blade(mask | (1 << i), &c);
    }
    out
}

/// Exterior derivative in the chart variables.
pub fn d(a: &EqForm) -> EqForm {
    let mut out = a.zero_like();
    for i in 0..a.dim {
        out = &out + &dx_wedge(i, &a.deriv(i));
    }
    out
}

pub fn iota(v: &VectorField, a: &EqForm) -> Result<EqForm, FormError> {
    check_dim(a, v.dim())?;
    Ok(a.contract(&v.comps))
}

/// Lie derivative by Cartan's formula `dι + ιd`.
pub fn lie(v: &VectorField, a: &EqForm) -> Result<EqForm, FormError> {
    Ok(&d(&iota(v, a)?) + &iota(v, &d(a))?)
}

/// Equivariant differential `d − ι(X^M)`.
pub fn d_g(a: &EqForm, action: &VectorField) -> Result<EqForm, FormError> {
    if !action.is_linear_in_lie() {
        return Err(FormError::NonlinearAction);
    }
    Ok(&d(a) - &iota(action, a)?)
}

pub fn d_mat(a: &MatForm) -> MatForm {
    a.map(d)
}

pub fn iota_mat(v: &VectorField, a: &MatForm) -> Result<MatForm, FormError> {
    for e in a.entries() {
        check_dim(e, v.dim())?;
    }
    Ok(a.map(|e| e.contract(&v.comps)))
}

/// Equivariant degree of a homogeneous form, `None` if mixed or zero.
pub fn homogeneous_degree(a: &EqForm) -> Option<i32> {
    let mut deg = None;
    for (mask, p) in a.terms() {
        for m in p.terms().keys() {
            let e = mask.count_ones() as i32 + 2 * a.shape.lie_degree(m);
            match deg {
                None => deg = Some(e),
                Some(d0) if d0 != e => return None,
                _ => {}
            }
        }
    }
    deg
}

/// `θ_X = Σ v^i dx^i` for the flat metric.
pub fn theta(action: &VectorField) -> EqForm {
    one_form(action.dim(), &action.comps)
}

/// Lifts a matrix of functions to grade-0 forms.
pub fn lift_functions(n: usize, m: &Mat<PolyFn>) -> MatForm {
    m.map(|p| function(n, p.clone()))
}

/// `μ(X) = Φ(X) − ι(X^M)A` where `Φ` is the fiber part of the Lie derivative
/// `𝓛^E(X) = X^M·∂ + Φ(X)` and `∇ = d + A`.
pub fn moment(a: &MatForm, action: &VectorField, fiber: &Mat<PolyFn>) -> Result<MatForm, FormError> {
    if (a.rows(), a.cols()) != (fiber.rows(), fiber.cols()) {
        return Err(FormError::Shape(format!("connection {}x{} vs fiber action {}x{}", a.rows(), a.cols(), fiber.rows(), fiber.cols())));
    }
    if !action.is_linear_in_lie() {
        return Err(FormError::NonlinearAction);
    }
    let s = action.shape();
    if !fiber.entries().iter().all(|p| p.terms().keys().all(|m| s.lie_degree(m) == 1)) {
        return Err(FormError::NonlinearAction);
    }
    let n = action.dim();
    Ok(lift_functions(n, fiber).sub(&iota_mat(action, a)?))
}

/// Curvature `dA + A∧A`.
pub fn curvature(a: &MatForm) -> MatForm {
    d_mat(a).add(&a.mul(a))
}

/// Equivariant curvature `F + μ`.
pub fn equivariant_curvature(a: &MatForm, action: &VectorField, fiber: &Mat<PolyFn>) -> Result<MatForm, FormError> {
    Ok(curvature(a).add(&moment(a, action, fiber)?))
}

/// Spin lift `τ(Φ) = −¼ Σ_{k≠l} Φ_kl e_k e_l` of an antisymmetric endomorphism.
pub fn spin_lift(phi: &Mat<PolyFn>) -> Multivector {
    let n = phi.rows();
    let shape = phi.get(0, 0).shape;
    let mut out = Multivector::zero(n, Algebra::Clifford, shape);
    for k in 0..n {
        for l in 0..n {
            if k == l || phi.get(k, l).is_zero() {
                continue;
            }
            let ek = Multivector::gen(n, Algebra::Clifford, shape, k);
            let el = Multivector::gen(n, Algebra::Clifford, shape, l);
            out = &out + &(&ek * &el).scale_poly(phi.get(k, l));
        }
    }
    out.scale(&Scalar::ratio(-1, 4))
}

/// `μ^S` for the trivial spinor bundle on a flat chart: `∇ = d` and the fiber
/// action is the spin lift of the tangent action.
pub fn spinor_moment(action: &VectorField) -> Multivector {
    spin_lift(&action.tangent_action())
}

/// `−¼ c(dθ_X)`.
pub fn kosmann_moment(action: &VectorField) -> Multivector {
    d(&theta(action)).retag(Algebra::Clifford).scale(&Scalar::ratio(-1, 4))
}

fn check_nilpotent(m: &MatForm) -> Result<(), FormError> {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if let Some(d) = m.get(r, c).min_eq_degree() {
                if d < 1 {
                    return Err(FormError::NotNilpotent(r, c));
                }
            }
        }
    }
    Ok(())
}

fn check_square(m: &MatForm) -> Result<(), FormError> {
    if m.rows() != m.cols() || m.rows() == 0 {
        return Err(FormError::Shape(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    Ok(())
}

/// `det^{1/2}((R/2)/sinh(R/2)) = exp(½ Σ_k g_k tr R^k)` with `g = log((z/2)/sinh(z/2))`.
pub fn ahat(r: &MatForm) -> Result<EqForm, FormError> {
    check_square(r)?;
    for i in 0..r.rows() {
        for j in 0..r.cols() {
            if r.get(i, j) != &-r.get(j, i) {
                return Err(FormError::NotAntisymmetric(i, j));
            }
        }
    }
    check_nilpotent(r)?;
    let e0 = r.get(0, 0);
    let len = nilpotency_order(e0.dim, e0.shape);
    let g = Series::log_ahat_series(len);
    let mut acc = e0.zero_like();
    let mut pw = Mat::identity(r.rows(), e0);
    for gk in g.c.iter() {
        if pw.is_zero() {
            break;
        }
        if !num_traits::Zero::is_zero(gk) {
            acc = &acc + &pw.trace().rscale_q(gk);
        }
        pw = pw.mul(r);
    }
    let half = acc.scale(&Scalar::ratio(1, 2));
    Ok(Series::exp_series(len).eval_nilpotent(&half))
}

/// `Str exp(−F)`, with an optional `±1` grading on the rows.
pub fn ch_rel(f: &MatForm, grading: Option<&[i8]>) -> Result<EqForm, FormError> {
    check_square(f)?;
    check_nilpotent(f)?;
    let e0 = f.get(0, 0);
    let len = nilpotency_order(e0.dim, e0.shape);
    let ex = Series::exp_series(len).eval_nilpotent(&f.neg());
    let mut acc = e0.zero_like();
    for i in 0..f.rows() {
        let sign = grading.map_or(1, |g| g[i]);
        acc = if sign < 0 { &acc - ex.get(i, i) } else { &acc + ex.get(i, i) };
    }
    Ok(acc)
}

/// `exp` of a single positive-degree form.
pub fn form_exp(a: &EqForm) -> EqForm {
    Series::exp_series(nilpotency_order(a.dim, a.shape)).eval_nilpotent(a)
}

/// Antisymmetric 2×2 block `[[0, r], [−r, 0]]`.
pub fn rotation_block(r: &EqForm) -> MatForm {
    let z = r.zero_like();
    let mut m = Mat::zeros(2, 2, &z);
    m.set(0, 1, r.clone());
    m.set(1, 0, -r);
    m
}

/// Block-diagonal sum.
pub fn block_diag(a: &MatForm, b: &MatForm) -> MatForm {
    let z = a.get(0, 0).zero_like();
    let (ra, rb) = (a.rows(), b.rows());
    Mat::from_fn(ra + rb, ra + rb, |i, j| {
        if i < ra && j < ra {
            a.get(i, j).clone()
        } else if i >= ra && j >= ra {
            b.get(i - ra, j - ra).clone()
        } else {
            z.clone()
        }
    })
}

/// Random helpers shared by tests and the harness.
pub mod gen {
    use super::*;
    use rand::Rng;

    pub fn small_scalar<R: Rng>(rng: &mut R) -> Scalar {
        let n = rng.gen_range(-3i64..=3);
        let d = rng.gen_range(1i64..=2);
        Scalar::from_q(q(n, d))
    }

    /// Random polynomial with chart degree ≤ `deg` and `X`-degree ≤ `J`.
    pub fn poly<R: Rng>(rng: &mut R, shape: Shape, deg: i32, terms: usize) -> PolyFn {
        let mut p = PolyFn::zero(shape);
        let jmax = shape.j.unwrap_or(1) as i32;
        for _ in 0..terms {
            let mut m: Mono = vec![0; shape.nvars()];
            let total = rng.gen_range(0..=deg);
            for _ in 0..total {
                m[rng.gen_range(0..shape.nx)] += 1;
            }
            if shape.nl > 0 {
                let lt = rng.gen_range(0..=jmax);
                for _ in 0..lt {
                    m[shape.nx + rng.gen_range(0..shape.nl)] += 1;
                }
            }
            p.add_term(m, small_scalar(rng));
        }
        p
    }

    pub fn form<R: Rng>(rng: &mut R, n: usize, shape: Shape, deg: i32, terms: usize) -> EqForm {
        let mut a = zero_form(n, shape);
        for _ in 0..terms {
            let mask = rng.gen_range(0..(1u32 << n));
            a.add_blade(mask, &poly(rng, shape, deg, 1));
        }
        a
    }

    /// Random antisymmetric generator with small integer entries.
    pub fn antisymmetric<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<Scalar>> {
        let mut b = vec![vec![Scalar::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(-2i64..=2);
                b[i][j] = Scalar::int(v);
                b[j][i] = Scalar::int(-v);
            }
        }
        b
    }
}

/// Rotation-invariant `SO(2)` connection `A = p(r²)(x₁dx₂ − x₂dx₁)·J` on a
/// rank-two bundle over `ℝ²`, with fiber action `c·X·J`. Its equivariant
/// curvature is equivariantly closed, which makes it a test bed for the
/// characteristic forms.
pub fn invariant_plane_connection(shape: Shape, radial: &[Scalar], c: Scalar) -> (MatForm, VectorField, Mat<PolyFn>) {
    let n = 2;
    let (x1, x2) = (PolyFn::x(shape, 0), PolyFn::x(shape, 1));
    let r2 = &(&x1 * &x1) + &(&x2 * &x2);
    let mut p = PolyFn::zero(shape);
    let mut pw = PolyFn::one(shape);
    for a in radial {
        p = &p + &pw.scale(a);
        pw = &pw * &r2;
    }
    let ang = one_form(n, &[-&(&p * &x2), &p * &x1]);
    let a = rotation_block(&ang);
    let action = VectorField::rotation(shape, n, &[(0, 1)]);
    let x = PolyFn::lie(shape, 0).scale(&c);
    let mut fiber = Mat::zeros(2, 2, &PolyFn::zero(shape));
    fiber.set(0, 1, x.clone());
    fiber.set(1, 0, -&x);
    (a, action, fiber)
}

/// Random `α` for the `d_g² = −𝓛` check.
pub fn random_form(seed: u64, n: usize, shape: Shape) -> EqForm {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let t = rng.gen_range(1..6);
    gen::form(&mut rng, n, shape, 3, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sh() -> Shape {
        form_shape(2, 1, 2)
    }

    #[test]
    fn d_and_iota_examples() {
        let s = sh();
        let a = dx_wedge(1, &function(2, PolyFn::x(s, 0)));
        assert_eq!(d(&a), Multivector::const_blade(2, Algebra::Exterior, s, 0b11, Scalar::one()));
        let e12 = Multivector::const_blade(2, Algebra::Exterior, s, 0b11, Scalar::one());
        let d1 = VectorField::new(vec![PolyFn::one(s), PolyFn::zero(s)]);
        assert_eq!(iota(&d1, &e12).unwrap(), dx(2, s, 1));
    }

    #[test]
    fn lie_of_rotation() {
        let s = Shape::chart(2);
        let rot = VectorField::new(vec![-&PolyFn::x(s, 1), PolyFn::x(s, 0)]);
        // 𝓛_v dx¹ = d(v¹) = −dx².
        assert_eq!(lie(&rot, &dx(2, s, 0)).unwrap(), -&dx(2, s, 1));
        assert_eq!(lie(&rot, &dx(2, s, 1)).unwrap(), dx(2, s, 0));
    }

    #[test]
    fn d_g_of_theta() {
        let s = sh();
        let act = VectorField::rotation(s, 2, &[(0, 1)]);
        let th = theta(&act);
        let got = d_g(&th, &act).unwrap();
        let xx = PolyFn::lie(s, 0);
        let r2 = &(&PolyFn::x(s, 0) * &PolyFn::x(s, 0)) + &(&PolyFn::x(s, 1) * &PolyFn::x(s, 1));
        let mut want = Multivector::blade(2, Algebra::Exterior, 0b11, xx.scale(&Scalar::int(2)));
        want.add_blade(0, &-&(&(&xx * &xx) * &r2));
        assert_eq!(got, want);
        assert_eq!(homogeneous_degree(&got), Some(4));
        assert!(d_g(&function(2, PolyFn::one(s)), &act).unwrap().is_zero());
    }

    #[test]
    fn nonlinear_action_rejected() {
        let s = sh();
        let x = PolyFn::lie(s, 0);
        let act = VectorField::new(vec![&x * &x, PolyFn::zero(s)]);
        assert_eq!(d_g(&function(2, PolyFn::one(s)), &act), Err(FormError::NonlinearAction));
    }

    #[test]
    fn tangent_moment_of_rotation() {
        let s = sh();
        let act = VectorField::rotation(s, 2, &[(0, 1)]);
        let z = zero_form(2, s);
        let a = Mat::zeros(2, 2, &z);
        let mu = moment(&a, &act, &act.tangent_action()).unwrap();
        let x = function(2, PolyFn::lie(s, 0));
        assert_eq!(mu, rotation_block(&x));
    }

    #[test]
    fn kosmann_formula() {
        let s = form_shape(4, 2, 1);
        let act = VectorField::rotation(s, 4, &[(0, 1), (2, 3)]);
        assert_eq!(spinor_moment(&act), kosmann_moment(&act));
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let gens = vec![gen::antisymmetric(&mut rng, 4), gen::antisymmetric(&mut rng, 4)];
        let act = VectorField::linear_action(s, &gens);
        assert_eq!(spinor_moment(&act), kosmann_moment(&act));
    }

    #[test]
    fn spin_lift_intertwines_clifford_action() {
        let s = form_shape(3, 1, 1);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
        let act = VectorField::linear_action(s, &[gen::antisymmetric(&mut rng, 3)]);
        let phi = act.tangent_action();
        let tau = spin_lift(&phi);
        for k in 0..3 {
            let ek = Multivector::gen(3, Algebra::Clifford, s, k);
            let lhs = &(&tau * &ek) - &(&ek * &tau);
            let col: Vec<PolyFn> = (0..3).map(|i| phi.get(i, k).clone()).collect();
            assert_eq!(lhs, Multivector::vector(3, Algebra::Clifford, &col));
        }
    }

    #[test]
    fn ahat_trivial_and_block() {
        let s = form_shape(2, 1, 2);
        let z = zero_form(2, s);
        assert_eq!(ahat(&Mat::zeros(2, 2, &z)).unwrap(), Multivector::one(2, Algebra::Exterior, s));
        // r = X + dx₁∧dx₂ has degree 2; compare against (r/2)/sin(r/2).
        let mut r = function(2, PolyFn::lie(s, 0));
        r.add_blade(0b11, &PolyFn::one(s));
        let got = ahat(&rotation_block(&r)).unwrap();
        let len = nilpotency_order(2, s);
        let oracle = Series::ahat_series(len);
        // (r/2)/sin(r/2) = (ir/2)/sinh(ir/2): even series, so substitute r² ↦ −r².
        let mut want = z.zero_like();
        let r2 = &r * &r;
        let mut pw = Multivector::one(2, Algebra::Exterior, s);
        for k in (0..len).step_by(2) {
            let c = &oracle.c[k];
            let sign = if (k / 2) % 2 == 1 { -1 } else { 1 };
            want = &want + &pw.rscale_q(&(c * num_rational::BigRational::from_integer(sign.into())));
            pw = &pw * &r2;
        }
        assert_eq!(got, want);
    }

    #[test]
    fn ahat_multiplicative() {
        let s = form_shape(2, 2, 1);
        let mut r = function(2, PolyFn::lie(s, 0));
        r.add_blade(0b11, &PolyFn::int(s, 2));
        let t = function(2, PolyFn::lie(s, 1).scale(&Scalar::int(3)));
        let (br, bt) = (rotation_block(&r), rotation_block(&t));
        let lhs = ahat(&block_diag(&br, &bt)).unwrap();
        assert_eq!(lhs, &ahat(&br).unwrap() * &ahat(&bt).unwrap());
    }

    #[test]
    fn ahat_rejects_bad_input() {
        let s = sh();
        let one = Multivector::one(2, Algebra::Exterior, s);
        let bad = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { one.clone() } else { one.zero_like() });
        assert_eq!(ahat(&bad), Err(FormError::NotAntisymmetric(0, 1)));
        assert_eq!(ahat(&rotation_block(&one)), Err(FormError::NotNilpotent(0, 1)));
    }

    #[test]
    fn ch_rank_one_and_additive() {
        let s = sh();
        let z = zero_form(2, s);
        assert_eq!(ch_rel(&Mat::zeros(1, 1, &z), None).unwrap(), Multivector::one(2, Algebra::Exterior, s));
        let w = Multivector::const_blade(2, Algebra::Exterior, s, 0b11, Scalar::one());
        let mut want = Multivector::one(2, Algebra::Exterior, s);
        want = &want - &w;
        assert_eq!(ch_rel(&Mat::diag_const(1, &w), None).unwrap(), want);
        let f1 = Mat::diag_const(1, &w);
        let f2 = Mat::diag_const(1, &function(2, PolyFn::lie(s, 0)));
        let sum = &ch_rel(&f1, None).unwrap() + &ch_rel(&f2, None).unwrap();
        assert_eq!(ch_rel(&block_diag(&f1, &f2), None).unwrap(), sum);
    }

    #[test]
    fn characteristic_forms_are_closed() {
        let s = form_shape(2, 1, 2);
        let (a, act, fiber) = invariant_plane_connection(s, &[Scalar::int(1), Scalar::ratio(1, 2)], Scalar::int(2));
        assert!(lie(&act, a.get(0, 1)).unwrap().is_zero());
        let rg = equivariant_curvature(&a, &act, &fiber).unwrap();
        let ah = ahat(&rg).unwrap();
        assert!(d_g(&ah, &act).unwrap().is_zero());
        let ch = ch_rel(&rg, None).unwrap();
        assert!(d_g(&ch, &act).unwrap().is_zero());
        assert!(ah.terms().keys().all(|m| m.count_ones() % 2 == 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn d_g_squared_is_minus_lie(seed in any::<u64>()) {
            let s = form_shape(3, 1, 2);
            let a = random_form(seed, 3, s);
            let act = VectorField::rotation(s, 3, &[(0, 2)]);
            let lhs = d_g(&d_g(&a, &act).unwrap(), &act).unwrap();
            prop_assert!((&lhs + &lie(&act, &a).unwrap()).is_zero());
            prop_assert!(d(&d(&a)).is_zero());
            prop_assert!(iota(&act, &iota(&act, &a).unwrap()).unwrap().is_zero());
        }

        #[test]
        fn d_g_raises_degree_by_one(seed in any::<u64>(), deg in 0i32..5) {
            let s = form_shape(2, 1, 3);
            let a = random_form(seed, 2, s);
            // Homogeneous part of equivariant degree `deg`.
            let mut h = zero_form(2, s);
            for (mask, p) in a.terms() {
                let keep = PolyFn::from_terms(s, p.terms().iter().filter(|(m, _)| mask.count_ones() as i32 + 2 * s.lie_degree(m) == deg).map(|(m, c)| (m.clone(), c.clone())));
                h.add_blade(*mask, &keep);
            }
            let act = VectorField::rotation(s, 2, &[(0, 1)]);
            let out = d_g(&h, &act).unwrap();
            if let Some(k) = homogeneous_degree(&out) {
                prop_assert_eq!(k, deg + 1);
            }
        }
    }
}
