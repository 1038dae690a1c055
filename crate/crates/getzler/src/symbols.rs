//! Symbol calculus on the zero fiber, and Dirac operator identities on a flat
//! chart.
//!
//! Symbol sections are `r × r` matrices of exterior forms whose coefficients
//! are polynomials in `η ∈ T_mM` (chart variables) and the Lie parameters.
//! Curvature conventions: `R_g = R + μ^M` is read entrywise as a matrix, the
//! harmonic oscillator is `−Σ_i (∂_i + a_i)² + F + μ^{E/S}` with
//! `a_i = ¼ Σ_j (R_g)_ij η^j`, and `𝖪_ab = −½ R_ab`. With these choices the
//! symbol of the conjugate connection carries `+¼ (μ η, ξ)`.

use rand::Rng;
use thiserror::Error;

use crate::eqforms::{self, EqForm, VectorField};
use crate::gradealg::{Algebra, Multivector};
use crate::matrix::Mat;
use crate::poly::{PolyFn, Shape};
use crate::rescale::{CliffordModel, FilteredBundle, LaurentSection, Normal, RescaleError, Rescaled, Section};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("θ does not vanish at the base point")]
    NonzeroAtBase,
    #[error("curvature data is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("moment is not linear in the Lie parameters")]
    NotLinear,
    #[error(transparent)]
    Rescale(#[from] RescaleError),
}

pub type SymbolSection = Mat<Multivector>;

#[derive(Clone, Debug)]
pub struct CurvatureModel {
    pub n: usize,
    pub r: usize,
    pub shape: Shape,
    /// Riemannian part, constant two-forms.
    pub rm: Vec<Vec<EqForm>>,
    /// `μ^M(X)`, linear in `X`.
    pub mu: Vec<Vec<PolyFn>>,
    /// Twisting curvature `𝖥^{E/S}`, an `r × r` matrix of constant two-forms.
    pub f: Mat<Multivector>,
    /// `μ^{E/S}(X)`.
    pub mu_e: Mat<PolyFn>,
}

impl CurvatureModel {
    pub fn flat(n: usize, r: usize, lie_dim: usize, j: u32) -> Self {
        let shape = Shape::new(n, lie_dim, j);
        let z = Multivector::zero(n, Algebra::Exterior, shape);
        CurvatureModel {
            n,
            r,
            shape,
            rm: vec![vec![z.clone(); n]; n],
            mu: vec![vec![PolyFn::zero(shape); n]; n],
            f: Mat::zeros(r, r, &z),
            mu_e: Mat::zeros(r, r, &PolyFn::zero(shape)),
        }
    }

    pub fn validate(&self) -> Result<(), SymbolError> {
        for i in 0..self.n {
            for j in 0..self.n {
                if self.rm[i][j] != -&self.rm[j][i] || self.mu[i][j] != -&self.mu[j][i] {
                    return Err(SymbolError::NotAntisymmetric(i, j));
                }
            }
        }
        let lin = |p: &PolyFn| p.terms().keys().all(|m| self.shape.lie_degree(m) == 1);
        if !self.mu.iter().flatten().all(lin) || !self.mu_e.entries().iter().all(lin) {
            return Err(SymbolError::NotLinear);
        }
        Ok(())
    }

    fn form(&self, p: PolyFn) -> Multivector {
        Multivector::scalar(self.n, Algebra::Exterior, p)
    }

    /// `𝖪_ab` (the Riemannian part; the twisting part has symbol order zero).
    pub fn kappa(&self, a: usize, b: usize) -> EqForm {
        self.rm[a][b].scale(&Scalar::ratio(-1, 2))
    }

    /// `R_g = R + μ^M` as a matrix of even forms.
    pub fn r_g(&self) -> Mat<Multivector> {
        Mat::from_fn(self.n, self.n, |i, j| &self.rm[i][j] + &self.form(self.mu[i][j].clone()))
    }

    /// `𝖥_g = 𝖥 + μ^{E/S}`.
    pub fn f_g(&self) -> Mat<Multivector> {
        self.f.add(&self.mu_e.map(|p| self.form(p.clone())))
    }

    pub fn eta(&self, j: usize) -> PolyFn {
        PolyFn::x(self.shape, j)
    }

    pub fn zero_section(&self) -> SymbolSection {
        Mat::zeros(self.r, self.r, &Multivector::zero(self.n, Algebra::Exterior, self.shape))
    }

    pub fn one_section(&self) -> SymbolSection {
        Mat::identity(self.r, &Multivector::zero(self.n, Algebra::Exterior, self.shape))
    }

    /// `a_i = ¼ Σ_j (R_g)_ij η^j`.
    pub fn a(&self, i: usize) -> Multivector {
        let rg = self.r_g();
        let mut acc = Multivector::zero(self.n, Algebra::Exterior, self.shape);
        for j in 0..self.n {
            acc = &acc + &rg.get(i, j).scale_poly(&self.eta(j));
        }
        acc.scale(&Scalar::ratio(1, 4))
    }
}

fn lmul(a: &Multivector, s: &SymbolSection) -> SymbolSection {
    s.map(|e| a * e)
}

fn deriv(s: &SymbolSection, i: usize) -> SymbolSection {
    s.map(|e| e.deriv(i))
}

fn d_xi(s: &SymbolSection, xi: &[Scalar]) -> SymbolSection {
    let mut out = s.map(|e| Multivector::zero(e.dim, e.tag, e.shape));
    for (i, c) in xi.iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&deriv(s, i).map(|e| e.scale(c)));
        }
    }
    out
}

/// `∂_ξ s + ½ 𝖪(η, ξ) ∧ s`.
pub fn sym_nabla(xi: &[Scalar], k: &CurvatureModel, s: &SymbolSection) -> SymbolSection {
    let mut kk = Multivector::zero(k.n, Algebra::Exterior, k.shape);
    for a in 0..k.n {
        for (b, c) in xi.iter().enumerate() {
            if !c.is_zero() {
                kk = &kk + &k.kappa(a, b).scale_poly(&k.eta(a).scale(c));
            }
        }
    }
    d_xi(s, xi).add(&lmul(&kk.scale(&Scalar::ratio(1, 2)), s))
}

/// `ξ ∧ s`.
pub fn sym_clifford(xi: &[Scalar], k: &CurvatureModel, s: &SymbolSection) -> SymbolSection {
    let v: Vec<PolyFn> = xi.iter().map(|c| PolyFn::constant(k.shape, c.clone())).collect();
    lmul(&Multivector::vector(k.n, Algebra::Exterior, &v), s)
}

/// `p(X) · s`.
pub fn sym_poly(p: &PolyFn, s: &SymbolSection) -> SymbolSection {
    s.map(|e| e.scale_poly(p))
}

/// Symbol of the conjugate connection: `sym_nabla + ¼ (μ(X)η, ξ)`.
pub fn sym_conj_nabla(xi: &[Scalar], k: &CurvatureModel, s: &SymbolSection) -> SymbolSection {
    let mut c = PolyFn::zero(k.shape);
    for (i, x) in xi.iter().enumerate() {
        for j in 0..k.n {
            c = &c + &(&k.mu[i][j] * &k.eta(j)).scale(x);
        }
    }
    sym_nabla(xi, k, s).add(&sym_poly(&c.scale(&Scalar::ratio(1, 4)), s))
}

fn unit(n: usize, i: usize) -> Vec<Scalar> {
    (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()
}

/// `−Σ_i (∂_i + a_i)² s + 𝖥 s + μ^{E/S} s`, expanded termwise.
pub fn harmonic_oscillator(k: &CurvatureModel, s: &SymbolSection) -> SymbolSection {
    let mut out = k.f_g().mul(s);
    for i in 0..k.n {
        let a = k.a(i);
        let di = deriv(s, i);
        let lap = deriv(&di, i);
        let cross = lmul(&a, &di).map(|e| e.scale(&Scalar::int(2)));
        let quad = lmul(&(&a * &a), s);
        out = out.sub(&lap.add(&cross).add(&quad));
    }
    out
}

/// The same operator assembled from `sym_conj_nabla`.
pub fn harmonic_oscillator_composed(k: &CurvatureModel, s: &SymbolSection) -> SymbolSection {
    let mut out = k.f_g().mul(s);
    for i in 0..k.n {
        let e = unit(k.n, i);
        out = out.sub(&sym_conj_nabla(&e, k, &sym_conj_nabla(&e, k, s)));
    }
    out
}

/// `ω_X = −dα_X − ¼θ_X` with `α_X = −¼ ∫₀¹ (ι(𝓡)θ_X)(tξ) t^{−1} dt`.
pub fn conjugate_form_omega(theta: &EqForm) -> Result<EqForm, SymbolError> {
    let n = theta.dim;
    let shape = theta.shape;
    let xs = 0..n;
    if theta.terms().values().any(|p| p.min_degree_in(xs.clone()) == Some(0)) {
        return Err(SymbolError::NonzeroAtBase);
    }
    let f = theta.contract(&VectorField::radial(shape, n).comps).scalar_part();
    let mut alpha = PolyFn::zero(shape);
    for (m, c) in f.terms() {
        let k: i32 = m[..n].iter().sum();
        alpha.add_term(m.clone(), c * &Scalar::ratio(-1, 4 * k as i64));
    }
    let dalpha = eqforms::d(&eqforms::function(n, alpha));
    Ok(&(-&dalpha) - &theta.scale(&Scalar::ratio(1, 4)))
}

/// Flat chart `ℝⁿ` with spinors `Cl(n) ⊗ ℂ^r`, twisting connection `d + A`, a
/// linear isometric action and a twisting moment.
#[derive(Clone, Debug)]
pub struct ChartDiracData {
    pub n: usize,
    pub r: usize,
    pub shape: Shape,
    pub a: Vec<Mat<PolyFn>>,
    pub action: VectorField,
    pub mu_w: Mat<PolyFn>,
}

pub type Spinor = Vec<Multivector>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub ok: bool,
    pub witness: Option<String>,
}

impl ChartDiracData {
    pub fn nabla(&self, i: usize, s: &Spinor) -> Spinor {
        let d: Spinor = s.iter().map(|e| e.deriv(i)).collect();
        let a = self.a[i].map(|p| Multivector::scalar(self.n, Algebra::Clifford, p.clone())).apply(s);
        d.iter().zip(&a).map(|(x, y)| x + y).collect()
    }

    fn lcl(&self, c: &Multivector, s: &Spinor) -> Spinor {
        s.iter().map(|e| c * e).collect()
    }

    fn add(a: &Spinor, b: &Spinor) -> Spinor {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn sub(a: &Spinor, b: &Spinor) -> Spinor {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    fn scale(a: &Spinor, c: &Scalar) -> Spinor {
        a.iter().map(|x| x.scale(c)).collect()
    }

    fn poly(a: &Spinor, p: &PolyFn) -> Spinor {
        a.iter().map(|x| x.scale_poly(p)).collect()
    }

    fn gen(&self, i: usize) -> Multivector {
        Multivector::gen(self.n, Algebra::Clifford, self.shape, i)
    }

    pub fn theta(&self) -> EqForm {
        eqforms::theta(&self.action)
    }

    pub fn c_theta(&self) -> Multivector {
        self.theta().retag(Algebra::Clifford)
    }

    pub fn c_dtheta(&self) -> Multivector {
        eqforms::d(&self.theta()).retag(Algebra::Clifford)
    }

    /// `d*θ = −Σ ∂_i θ_i`.
    pub fn dstar_theta(&self) -> PolyFn {
        let mut acc = PolyFn::zero(self.shape);
        for (i, v) in self.action.comps.iter().enumerate() {
            acc = &acc - &v.deriv(i);
        }
        acc
    }

    pub fn dirac(&self, s: &Spinor) -> Spinor {
        let mut out: Spinor = s.iter().map(|e| Multivector::zero(e.dim, e.tag, e.shape)).collect();
        for i in 0..self.n {
            out = Self::add(&out, &self.lcl(&self.gen(i), &self.nabla(i, s)));
        }
        out
    }

    /// `D_u = D + u c(θ)`.
    pub fn dirac_u(&self, u: &Scalar, s: &Spinor) -> Spinor {
        Self::add(&self.dirac(s), &Self::scale(&self.lcl(&self.c_theta(), s), u))
    }

    pub fn nabla_x(&self, s: &Spinor) -> Spinor {
        let mut out: Spinor = s.iter().map(|e| Multivector::zero(e.dim, e.tag, e.shape)).collect();
        for (i, v) in self.action.comps.iter().enumerate() {
            out = Self::add(&out, &Self::poly(&self.nabla(i, s), v));
        }
        out
    }

    /// `c(F) = Σ_{i<j} F_ij e_i e_j` for the twisting curvature.
    pub fn c_f(&self, s: &Spinor) -> Spinor {
        let mut out: Spinor = s.iter().map(|e| Multivector::zero(e.dim, e.tag, e.shape)).collect();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let fij = self.a[j].map(|p| p.deriv(i)).sub(&self.a[i].map(|p| p.deriv(j))).add(&self.a[i].commutator(&self.a[j]));
                let fs = fij.map(|p| Multivector::scalar(self.n, Algebra::Clifford, p.clone())).apply(s);
                out = Self::add(&out, &self.lcl(&(&self.gen(i) * &self.gen(j)), &fs));
            }
        }
        out
    }

    fn mu_w_apply(&self, s: &Spinor) -> Spinor {
        self.mu_w.map(|p| Multivector::scalar(self.n, Algebra::Clifford, p.clone())).apply(s)
    }

    /// `μ^E = −¼ c(dθ) + μ^W`.
    pub fn mu_e(&self, s: &Spinor) -> Spinor {
        Self::add(&self.lcl(&eqforms::kosmann_moment(&self.action), s), &self.mu_w_apply(s))
    }

    /// `𝓛^E(X) = ∇_X + μ^E(X)`.
    pub fn lie_e(&self, s: &Spinor) -> Spinor {
        Self::add(&self.nabla_x(s), &self.mu_e(s))
    }

    /// `−Σ_i (∇_i − u θ_i)²`.
    pub fn bochner_u(&self, u: &Scalar, s: &Spinor) -> Spinor {
        let mut out: Spinor = s.iter().map(|e| Multivector::zero(e.dim, e.tag, e.shape)).collect();
        for (i, th) in self.action.comps.iter().enumerate() {
            let uth = th.scale(u);
            let step = |v: &Spinor| Self::sub(&self.nabla(i, v), &Self::poly(v, &uth));
            out = Self::sub(&out, &step(&step(s)));
        }
        out
    }

    /// `H_u(X) = D_u² + 𝓛^E(X)`.
    pub fn h_u(&self, u: &Scalar, s: &Spinor) -> Spinor {
        Self::add(&self.dirac_u(u, &self.dirac_u(u, s)), &self.lie_e(s))
    }

    /// Sections `e_I ⊗ f_a x^α` with `|α| ≤ deg`.
    pub fn spanning_set(&self, deg: i32) -> Vec<Spinor> {
        let mut monos: Vec<Vec<i32>> = vec![vec![0; self.n]];
        for _ in 0..deg {
            let mut next = monos.clone();
            for m in &monos {
                for i in 0..self.n {
                    let mut m2 = m.clone();
                    m2[i] += 1;
                    if !next.contains(&m2) {
                        next.push(m2);
                    }
                }
            }
            monos = next;
        }
        let mut out = Vec::new();
        for m in &monos {
            let mut full = m.clone();
            full.extend(std::iter::repeat(0).take(self.shape.nl));
            let p = PolyFn::monomial(self.shape, full, Scalar::one());
            for mask in 0..(1u32 << self.n) {
                for a in 0..self.r {
                    let mut s: Spinor = vec![Multivector::zero(self.n, Algebra::Clifford, self.shape); self.r];
                    s[a] = Multivector::blade(self.n, Algebra::Clifford, mask, p.clone());
                    out.push(s);
                }
            }
        }
        out
    }

    /// Residual checks on the spanning set up to degree `deg`, for each `u`.
    pub fn identities(&self, us: &[Scalar], deg: i32) -> Vec<IdentityCheck> {
        let basis = self.spanning_set(deg);
        let mut checks = Vec::new();
        let mut run = |name: String, f: &dyn Fn(&Spinor) -> Spinor| {
            let witness = basis.iter().enumerate().find_map(|(k, s)| {
                let r = f(s);
                if r.iter().all(|e| e.is_zero()) {
                    None
                } else {
                    Some(format!("basis section {k}: residual {}", r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")))
                }
            });
            checks.push(IdentityCheck { name, ok: witness.is_none(), witness });
        };
        let ct = self.c_theta();
        let cdt = self.c_dtheta();
        let ds = self.dstar_theta();
        run("anticommutator_dirac_theta".into(), &|s| {
            let lhs = Self::add(&self.dirac(&self.lcl(&ct, s)), &self.lcl(&ct, &self.dirac(s)));
            let rhs = Self::add(&Self::add(&Self::scale(&self.nabla_x(s), &Scalar::int(-2)), &self.lcl(&cdt, s)), &Self::poly(s, &ds));
            Self::sub(&lhs, &rhs)
        });
        for u in us {
            run(format!("lichnerowicz_u={u}"), &|s| {
                let four_u = &Scalar::one() - &u.scale_q(&crate::scalar::q(4, 1));
                let rhs = Self::add(
                    &Self::add(&self.bochner_u(u, s), &self.c_f(s)),
                    &Self::add(&Self::add(&self.mu_e(s), &Self::scale(&self.lcl(&cdt, s), u)), &Self::scale(&self.nabla_x(s), &four_u)),
                );
                Self::sub(&self.h_u(u, s), &rhs)
            });
        }
        let quarter = Scalar::ratio(1, 4);
        run("bismut_laplacian_quarter".into(), &|s| {
            let rhs = Self::add(&Self::add(&self.bochner_u(&quarter, s), &self.c_f(s)), &self.mu_w_apply(s));
            Self::sub(&self.h_u(&quarter, s), &rhs)
        });
        let dth = eqforms::d(&self.theta());
        let mu = self.action.tangent_action();
        let mut wit = None;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let lhs = dth.coeff((1 << i) | (1 << j));
                let rhs = mu.get(j, i).scale(&Scalar::int(-2));
                if lhs != rhs {
                    wit = Some(format!("dθ({i},{j}) = {lhs}, −2(μξ_{i},ξ_{j}) = {rhs}"));
                }
            }
        }
        checks.push(IdentityCheck { name: "dtheta_equals_minus_two_mu".into(), ok: wit.is_none(), witness: wit });
        let tr = mu.trace();
        let ok = ds.is_zero() && tr.is_zero();
        checks.push(IdentityCheck { name: "dstar_theta_is_trace_mu".into(), ok, witness: (!ok).then(|| format!("d*θ = {ds}, tr μ = {tr}")) });
        checks
    }
}

/// Generator operators whose zero-fiber symbols are known in closed form.
#[derive(Clone, Debug)]
pub enum GeneratorOp {
    Nabla(usize),
    Clifford(usize),
    /// Multiplication by a homogeneous polynomial in `X`.
    Poly(PolyFn),
}

/// Clifford-model rescaled bundle whose connection has symbol curvature `𝖪`.
pub struct SymbolBridge {
    pub model: CliffordModel,
    pub ctx: Rescaled,
    sym_shape: Shape,
}

impl SymbolBridge {
    pub fn new(k: &CurvatureModel, trunc: i32) -> Result<Self, SymbolError> {
        let model = CliffordModel { n: k.n, r: k.r };
        let bundle: FilteredBundle = model.bundle(k.shape.nl, k.shape.j.unwrap_or(0));
        let bs = bundle.shape();
        let lift = |p: &PolyFn| Self::lift_poly(k.n, bs, p);
        let omega: Vec<Vec<Multivector>> = (0..k.n).map(|a| (0..k.n).map(|b| k.kappa(a, b).map_into(bs, lift)).collect()).collect();
        let twist: Vec<Vec<Mat<PolyFn>>> = (0..k.n)
            .map(|i| {
                (0..k.n)
                    .map(|j| {
                        let (lo, hi, sgn) = if i < j { (i, j, 1) } else { (j, i, -1) };
                        k.f.map(|e| if i == j { PolyFn::zero(bs) } else { lift(&e.coeff((1 << lo) | (1 << hi))).scale(&Scalar::int(sgn)) })
                    })
                    .collect()
            })
            .collect();
        let a = model.fock_schwinger(&bundle, &omega, &twist);
        let ctx = Rescaled::new(bundle, a, trunc)?;
        Ok(SymbolBridge { model, ctx, sym_shape: k.shape })
    }

    /// `(η | X)` to `(y, η | X)`.
    fn lift_poly(n: usize, bs: Shape, p: &PolyFn) -> PolyFn {
        p.remap(bs, |m| {
            let mut out = vec![0; n];
            out.extend_from_slice(m);
            Some(out)
        })
    }

    pub fn lift(&self, p: &PolyFn) -> PolyFn {
        Self::lift_poly(self.model.n, self.ctx.shape(), p)
    }

    fn lower(&self, p: &PolyFn) -> PolyFn {
        let n = self.model.n;
        p.remap(self.sym_shape, |m| if m[..n].iter().all(|&e| e == 0) { Some(m[n..].to_vec()) } else { None })
    }

    /// Zero-fiber value as a symbol section.
    pub fn zero_fiber(&self, s: &LaurentSection) -> Result<SymbolSection, SymbolError> {
        let v = self.ctx.eval_section_zero(s, &[], &Normal::Symbolic)?;
        let low: Section = v.iter().map(|p| self.lower(p)).collect();
        Ok(self.model.from_section(&low, Algebra::Exterior))
    }

    /// `t^{o^g(D)} D s`.
    pub fn apply_rescaled(&self, op: &GeneratorOp, s: &LaurentSection) -> LaurentSection {
        let mut out = LaurentSection::new();
        let bs = self.ctx.shape();
        for (p, sp) in &s.terms {
            match op {
                GeneratorOp::Nabla(i) => out.add(p - 1, self.ctx.nabla(*i, sp)),
                GeneratorOp::Clifford(i) => out.add(p - 1, self.model.left(&self.model.clifford_gen(bs, *i)).apply(sp)),
                GeneratorOp::Poly(q) => {
                    let deg = q.terms().keys().map(|m| self.sym_shape.lie_degree(m)).max().unwrap_or(0);
                    let lq = self.lift(q);
                    out.add(p - 2 * deg, sp.iter().map(|c| c * &lq).collect());
                }
            }
        }
        out
    }

    /// Closed-form symbol of the generator.
    pub fn symbol(&self, op: &GeneratorOp, k: &CurvatureModel, s: &SymbolSection) -> SymbolSection {
        match op {
            GeneratorOp::Nabla(i) => sym_nabla(&unit(k.n, *i), k, s),
            GeneratorOp::Clifford(i) => sym_clifford(&unit(k.n, *i), k, s),
            GeneratorOp::Poly(q) => sym_poly(q, s),
        }
    }

    /// Compares both sides; returns the two symbol sections.
    pub fn consistency(&self, op: &GeneratorOp, k: &CurvatureModel, s: &LaurentSection) -> Result<(SymbolSection, SymbolSection), SymbolError> {
        let lhs = self.zero_fiber(&self.apply_rescaled(op, s))?;
        let rhs = self.symbol(op, k, &self.zero_fiber(s)?);
        Ok((lhs, rhs))
    }

    /// `y^α X^β ẽ_{I,a,b} t^{|I|+2|β|−|α|}`, a generator of the rescaled module.
    pub fn generator(&self, alpha: &[i32], beta: &[i32], mask: u32, a: usize, b: usize) -> LaurentSection {
        let bs = self.ctx.shape();
        let n = self.model.n;
        let mut m = alpha.to_vec();
        m.extend(std::iter::repeat(0).take(n));
        m.extend_from_slice(beta);
        let mono = PolyFn::monomial(bs, m, Scalar::one());
        let frame = self.ctx.synchronous_extension(&self.ctx.bundle.frame(self.model.index(mask, a, b)), self.ctx.trunc);
        let sigma: Section = frame.iter().map(|c| c * &mono).collect();
        let p = alpha.iter().sum::<i32>() - mask.count_ones() as i32 - 2 * beta.iter().sum::<i32>();
        let mut s = LaurentSection::new();
        s.add(p, sigma);
        s
    }
}

pub mod gen {
    use super::*;

    fn small<R: Rng>(rng: &mut R) -> Scalar {
        Scalar::int(rng.gen_range(-2..=2))
    }

    /// Random curvature data with `d` Lie parameters.
    pub fn curvature_model<R: Rng>(rng: &mut R, n: usize, r: usize, lie_dim: usize, j: u32) -> CurvatureModel {
        let mut k = CurvatureModel::flat(n, r, lie_dim, j);
        let s = k.shape;
        let two_form = |rng: &mut R| {
            let mut w = Multivector::zero(n, Algebra::Exterior, s);
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.6) {
                        w.add_blade((1 << a) | (1 << b), &PolyFn::constant(s, small(rng)));
                    }
                }
            }
            w
        };
        let lin = |rng: &mut R| {
            let mut p = PolyFn::zero(s);
            for a in 0..lie_dim {
                p = &p + &PolyFn::lie(s, a).scale(&small(rng));
            }
            p
        };
        for i in 0..n {
            for jj in i + 1..n {
                let w = two_form(rng);
                k.rm[jj][i] = -&w;
                k.rm[i][jj] = w;
                let m = lin(rng);
                k.mu[jj][i] = -&m;
                k.mu[i][jj] = m;
            }
        }
        k.f = Mat::from_fn(r, r, |_, _| two_form(rng));
        k.mu_e = Mat::from_fn(r, r, |_, _| lin(rng));
        k
    }

    pub fn chart_data<R: Rng>(rng: &mut R, n: usize, r: usize) -> ChartDiracData {
        let shape = Shape::new(n, 1, 2);
        let b = eqforms::gen::antisymmetric(rng, n);
        let action = VectorField::linear_action(shape, &[b]);
        let a = (0..n)
            .map(|_| {
                Mat::from_fn(r, r, |_, _| {
                    let mut p = PolyFn::constant(shape, small(rng));
                    for i in 0..n {
                        p = &p + &PolyFn::x(shape, i).scale(&small(rng));
                    }
                    p
                })
            })
            .collect();
        let mu_w = Mat::from_fn(r, r, |_, _| PolyFn::lie(shape, 0).scale(&small(rng)));
        ChartDiracData { n, r, shape, a, action, mu_w }
    }

    /// Random symbol section with `η`-degree ≤ 2.
    pub fn section<R: Rng>(rng: &mut R, k: &CurvatureModel) -> SymbolSection {
        let s = k.shape;
        Mat::from_fn(k.r, k.r, |_, _| {
            let mut m = Multivector::zero(k.n, Algebra::Exterior, s);
            for _ in 0..rng.gen_range(0..=3) {
                let mut mono = vec![0; s.nvars()];
                for _ in 0..rng.gen_range(0..=2) {
                    mono[rng.gen_range(0..k.n)] += 1;
                }
                m.add_blade(rng.gen_range(0..1u32 << k.n), &PolyFn::monomial(s, mono, small(rng)));
            }
            m
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn section_of(k: &CurvatureModel, m: Multivector) -> SymbolSection {
        let mut s = k.zero_section();
        s.set(0, 0, m);
        s
    }

    #[test]
    fn nabla_examples() {
        let k = CurvatureModel::flat(2, 1, 1, 1);
        let s = section_of(&k, Multivector::scalar(2, Algebra::Exterior, k.eta(0)));
        let e1 = unit(2, 0);
        assert_eq!(sym_nabla(&e1, &k, &s), k.one_section());
        let mut k2 = k.clone();
        let e12 = Multivector::const_blade(2, Algebra::Exterior, k.shape, 0b11, Scalar::one());
        // 𝖪_21 = 1·e₁∧e₂ means R_21 = −2 e₁∧e₂.
        k2.rm[1][0] = e12.scale(&Scalar::int(-2));
        k2.rm[0][1] = e12.scale(&Scalar::int(2));
        let got = sym_nabla(&e1, &k2, &k2.one_section());
        let want = section_of(&k2, e12.scale_poly(&k2.eta(1).scale(&Scalar::ratio(1, 2))));
        assert_eq!(got, want);
    }

    #[test]
    fn clifford_and_poly_examples() {
        let k = CurvatureModel::flat(2, 1, 1, 1);
        let e1 = unit(2, 0);
        let g1 = Multivector::gen(2, Algebra::Exterior, k.shape, 0);
        assert_eq!(sym_clifford(&e1, &k, &k.one_section()), section_of(&k, g1.clone()));
        assert!(sym_clifford(&e1, &k, &section_of(&k, g1)).is_zero());
        let x2 = PolyFn::lie(k.shape, 0).pow(2);
        assert!(sym_poly(&x2, &k.one_section()).is_zero());
    }

    #[test]
    fn conj_nabla_rotation() {
        let mut k = CurvatureModel::flat(2, 1, 1, 1);
        let x = PolyFn::lie(k.shape, 0);
        k.mu[0][1] = x.clone();
        k.mu[1][0] = -&x;
        let got = sym_conj_nabla(&unit(2, 0), &k, &k.one_section());
        let want = section_of(&k, Multivector::scalar(2, Algebra::Exterior, (&x * &k.eta(1)).scale(&Scalar::ratio(1, 4))));
        assert_eq!(got, want);
    }

    #[test]
    fn oscillator_examples() {
        let k = CurvatureModel::flat(2, 1, 1, 1);
        let eta = k.eta(0);
        let s = section_of(&k, Multivector::scalar(2, Algebra::Exterior, &eta * &eta));
        assert_eq!(harmonic_oscillator(&k, &s), section_of(&k, Multivector::scalar(2, Algebra::Exterior, PolyFn::int(k.shape, -2))));
        let mut k2 = k.clone();
        k2.mu_e.set(0, 0, PolyFn::lie(k.shape, 0).scale(&Scalar::int(3)));
        let out = harmonic_oscillator(&k2, &k2.one_section());
        assert_eq!(out, k2.mu_e.map(|p| Multivector::scalar(2, Algebra::Exterior, p.clone())));
    }

    #[test]
    fn dirac_identities_trivial_and_rotation() {
        let shape = Shape::new(2, 1, 2);
        let z = Mat::zeros(1, 1, &PolyFn::zero(shape));
        let triv = ChartDiracData { n: 2, r: 1, shape, a: vec![z.clone(), z.clone()], action: VectorField::new(vec![PolyFn::zero(shape); 2]), mu_w: z.clone() };
        assert!(triv.identities(&[Scalar::one()], 3).iter().all(|c| c.ok));
        let rot = ChartDiracData { action: VectorField::rotation(shape, 2, &[(0, 1)]), ..triv };
        assert!(rot.dstar_theta().is_zero());
        let checks = rot.identities(&[Scalar::ratio(1, 4), Scalar::int(2)], 3);
        assert!(checks.iter().all(|c| c.ok), "{checks:?}");
    }

    #[test]
    fn dirac_identity_catches_wrong_sign() {
        let mut r = rng(4);
        let data = gen::chart_data(&mut r, 2, 1);
        let ct = data.c_theta();
        let s = &data.spanning_set(1)[1];
        let ds = data.dstar_theta();
        let lhs = ChartDiracData::add(&data.dirac(&data.lcl(&ct, s)), &data.lcl(&ct, &data.dirac(s)));
        let wrong = ChartDiracData::add(&ChartDiracData::scale(&data.nabla_x(s), &Scalar::int(2)), &data.lcl(&data.c_dtheta(), s));
        let wrong = ChartDiracData::add(&wrong, &ChartDiracData::poly(s, &ds));
        if !data.action.comps.iter().all(|c| c.is_zero()) {
            assert_ne!(lhs, wrong);
        }
    }

    #[test]
    fn omega_examples() {
        let shape = Shape::new(2, 1, 1);
        let act = VectorField::rotation(shape, 2, &[(0, 1)]);
        let th = eqforms::theta(&act);
        let w = conjugate_form_omega(&th).unwrap();
        let rad = VectorField::radial(shape, 2);
        assert!(w.contract(&rad.comps).is_zero());
        let mu = act.tangent_action();
        let mx = mu.apply(&rad.comps);
        let want = eqforms::one_form(2, &mx).scale(&Scalar::ratio(1, 4));
        assert_eq!(w, want);
        let at_base = w.map_coeffs(|p| p.subs(&[(0, Scalar::zero()), (1, Scalar::zero())]));
        assert!(at_base.is_zero());
        let bad = eqforms::one_form(2, &[PolyFn::one(shape), PolyFn::zero(shape)]);
        assert_eq!(conjugate_form_omega(&bad), Err(SymbolError::NonzeroAtBase));
    }

    #[test]
    fn omega_radial_vanishing_for_general_theta() {
        let shape = Shape::new(3, 1, 1);
        let mut r = rng(9);
        for _ in 0..10 {
            let comps: Vec<PolyFn> = (0..3)
                .map(|_| eqforms::gen::poly(&mut r, shape, 3, 3).remap(shape, |m| if m[..3].iter().sum::<i32>() == 0 { None } else { Some(m.to_vec()) }))
                .collect();
            let th = eqforms::one_form(3, &comps);
            let w = conjugate_form_omega(&th).unwrap();
            assert!(w.contract(&VectorField::radial(shape, 3).comps).is_zero());
        }
    }

    #[test]
    fn bridge_examples() {
        let mut r = rng(11);
        let k = gen::curvature_model(&mut r, 2, 1, 1, 1);
        let br = SymbolBridge::new(&k, 6).unwrap();
        let s = br.generator(&[1, 0], &[0], 0b01, 0, 0);
        for op in [GeneratorOp::Nabla(0), GeneratorOp::Nabla(1), GeneratorOp::Clifford(1), GeneratorOp::Poly(PolyFn::lie(k.shape, 0))] {
            let (lhs, rhs) = br.consistency(&op, &k, &s).unwrap();
            assert_eq!(lhs, rhs, "{op:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn oscillator_matches_composition(seed in any::<u64>()) {
            let mut r = rng(seed);
            let n = if seed % 2 == 0 { 2 } else { 3 };
            let k = gen::curvature_model(&mut r, n, 2, 1, 1);
            let s = gen::section(&mut r, &k);
            prop_assert_eq!(harmonic_oscillator(&k, &s), harmonic_oscillator_composed(&k, &s));
        }

        #[test]
        fn nabla_is_linear(seed in any::<u64>()) {
            let mut r = rng(seed);
            let k = gen::curvature_model(&mut r, 2, 1, 1, 1);
            let (a, b) = (gen::section(&mut r, &k), gen::section(&mut r, &k));
            let e = unit(2, (seed % 2) as usize);
            prop_assert_eq!(sym_nabla(&e, &k, &a.add(&b)), sym_nabla(&e, &k, &a).add(&sym_nabla(&e, &k, &b)));
        }

        #[test]
        fn random_chart_identities(seed in any::<u64>()) {
            let mut r = rng(seed);
            let data = gen::chart_data(&mut r, 2, 1 + (seed % 2) as usize);
            let checks = data.identities(&[Scalar::ratio(1, 4), Scalar::ratio(-2, 3)], 2);
            prop_assert!(checks.iter().all(|c| c.ok), "{:?}", checks);
        }
    }
}
