//! The verification checks behind each suite.
//!
//! Property checks are plain functions taking their own sizes so the
//! acceptance tests can call them with larger parameters than the CLI default.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{RunConfig, Suite, SweepConfig};
use crate::dnc::{self, LaurentFn, Model, NormalVector};
use crate::eqforms::{self, form_shape, VectorField};
use crate::gradealg::{berezin_constant, berezin_str, quantize, symbol_map, wedge, Algebra, Multivector};
use crate::kirillov::{self, Chart, GeometryModel, KirillovError, KirillovReport, QuadratureConfig};
use crate::matrix::Mat;
use crate::mehler;
use crate::poly::{PolyFn, Shape};
use crate::rescale::{self, Deformation, DncPoint, FilteredBundle, LaurentSection, Normal, Order, Rescaled};
use crate::scalar::{Scalar, Q};
use crate::symbols::{self, ChartDiracData, GeneratorOp, SymbolBridge};

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Inconclusive(String),
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        *self == Outcome::Pass
    }
}

type Runner = Box<dyn Fn(&RunConfig, &mut ChaCha8Rng) -> Outcome + Send + Sync>;

pub struct Check {
    pub id: String,
    pub suite: Suite,
    pub anchor: String,
    run: Runner,
}

impl Check {
    fn new(suite: Suite, id: &str, anchor: &str, run: impl Fn(&RunConfig, &mut ChaCha8Rng) -> Outcome + Send + Sync + 'static) -> Self {
        Check { id: format!("{}.{id}", suite.name()), suite, anchor: anchor.to_string(), run: Box::new(run) }
    }

    pub fn run(&self, cfg: &RunConfig) -> Outcome {
        let mut rng = rng_for(cfg.seed, &self.id);
        (self.run)(cfg, &mut rng)
    }
}

/// Per-check stream, so a check's inputs don't depend on which others ran.
pub fn rng_for(seed: u64, id: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn registry(cfg: &RunConfig) -> Vec<Check> {
    use Suite::*;
    let mut v = vec![
        Check::new(Algebra, "clifford_relation", "Clifford relation e_i e_j + e_j e_i = -2 delta_ij", |_, _| clifford_relation(4)),
        Check::new(Algebra, "associativity", "associativity of wedge and Clifford products", |c, r| associativity(r, c.samples, c.j)),
        Check::new(Algebra, "filtration", "Clifford filtration with associated graded the exterior algebra", |c, r| filtration(r, c.samples)),
        Check::new(Algebra, "quantization", "quantization and symbol map are inverse", |c, r| quantization(r, c.samples)),
        Check::new(Algebra, "berezin", "Berezin supertrace normalization", |_, _| berezin()),
        Check::new(Forms, "dg_squared", "d_X squared equals minus the Lie derivative", |c, r| dg_squared(r, c.samples, c.j)),
        Check::new(Forms, "kosmann", "spinor moment equals the Kosmann formula", |c, r| kosmann(r, c.samples.min(10))),
        Check::new(Forms, "characteristic_closed", "equivariant A-hat and Chern character are closed", |c, r| characteristic_closed(r, c.samples.min(5))),
        Check::new(Forms, "ahat_multiplicative", "A-hat is multiplicative on block sums", |c, r| ahat_multiplicative(r, c.samples.min(10))),
        Check::new(Forms, "sphere_theta_moment", "d theta equals minus twice the moment (sphere model)", |_, r| sphere_theta_moment(r, 100, 1e-10)),
        Check::new(Forms, "sphere_chern", "Chern numbers of O(k) on the sphere model", |c, _| sphere_chern(&c.kirillov.quadrature, 3)),
        Check::new(Dnc, "homomorphism", "characters are algebra homomorphisms", |c, r| dnc_homomorphism(r, c.samples)),
        Check::new(Dnc, "exp_factorization", "zero-fiber character factors through the flow", |_, _| dnc_exp_factorization(5)),
        Check::new(Dnc, "euler_like", "Euler-like vector fields", |c, r| dnc_euler_like(r, c.samples)),
        Check::new(Dnc, "spectral_continuity", "generic characters tend to zero-fiber characters", |_, _| dnc_spectral_continuity(5)),
        Check::new(Rescale, "scaling_equals_taylor", "scaling order equals Taylor order", |c, r| scaling_equals_taylor(r, c.samples, c.y_degree, c.op_bound)),
        Check::new(Rescale, "action_monotonicity", "o_sc(D s) >= o_sc(s) - o_g(D)", |c, r| action_monotonicity(r, c.samples, c.y_degree.min(3), c.op_bound)),
        Check::new(Rescale, "composition_subadditive", "Getzler order of a composition", |c, r| composition_subadditive(r, c.samples)),
        Check::new(Rescale, "frame_rank", "rescaled module is locally free of constant rank", |c, r| frame_rank(r, c.samples.min(10))),
        Check::new(Rescale, "str_reduction", "t^-n str extends smoothly with Berezin zero-fiber value", |c, r| str_reduction(r, c.samples, c.j)),
        Check::new(Rescale, "witten_quadratic", "Witten deformation by a Morse-Bott function stays in the rescaled module", |_, _| {
            witten_case(WittenCase::Quadratic)
        }),
        Check::new(Rescale, "witten_closed_form", "Novikov deformation by a closed one-form vanishing on M", |_, _| witten_case(WittenCase::ClosedForm)),
        Check::new(Rescale, "witten_counterexample", "deformation by a function with nonvanishing differential leaves the module", |_, _| {
            witten_case(WittenCase::Counterexample)
        }),
        Check::new(Symbols, "generator_symbols", "zero-fiber values of scaled generator operators", |c, r| generator_symbols(r, c.samples)),
        Check::new(Symbols, "oscillator", "harmonic oscillator symbol of the conjugated Bismut Laplacian", |c, r| oscillator(r, c.samples)),
        Check::new(Symbols, "dirac_identities", "flat-chart Dirac identities", |c, r| dirac_identities(r, c.samples.min(10))),
        Check::new(Symbols, "omega_radial", "conjugating form is radial-free and vanishes on M", |c, r| omega_radial(r, c.samples.min(10))),
        Check::new(Mehler, "heat_equation", "Mehler kernel solves the heat equation", |c, r| heat_equation(r, c.samples, &[2, 4], c.j)),
        Check::new(Mehler, "kernel_supertrace", "kernel supertrace at time one equals the A-hat Chern integrand", |c, r| kernel_supertrace(r, c.samples.min(10), c.j)),
    ];
    for &k in &cfg.kirillov.k {
        for &s in &cfg.kirillov.s {
            v.push(Check::new(Kirillov, &format!("k{k}.s{s}"), "Kirillov formula on the two-sphere", move |c, _| {
                kirillov_point(k, s, c.kirillov.tolerance, &c.kirillov.quadrature)
            }));
        }
    }
    if cfg.kirillov.sweep.is_some() {
        v.push(Check::new(Kirillov, "sweep", "Kirillov formula along an s-sweep", |c, _| {
            let sw = c.kirillov.sweep.as_ref().expect("sweep configured");
            kirillov_sweep(sw, c.kirillov.tolerance, &c.kirillov.quadrature)
        }));
    }
    v.retain(|c| cfg.runs(c.suite));
    v
}

fn form_gen<R: Rng>(rng: &mut R, n: usize, shape: Shape) -> Multivector {
    eqforms::gen::form(rng, n, shape, 1, 3)
}

pub fn clifford_relation(n: usize) -> Outcome {
    let s = Shape::constants();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (Multivector::gen(n, Algebra::Clifford, s, i), Multivector::gen(n, Algebra::Clifford, s, j));
            let lhs = &(&a * &b) + &(&b * &a);
            let want = Multivector::const_blade(n, Algebra::Clifford, s, 0, Scalar::int(if i == j { -2 } else { 0 }));
            if lhs != want {
                return Outcome::Fail(format!("e{i} e{j} + e{j} e{i} = {lhs}"));
            }
        }
    }
    Outcome::Pass
}

pub fn associativity<R: Rng>(rng: &mut R, cases: usize, j: u32) -> Outcome {
    let s = form_shape(3, 1, j);
    for case in 0..cases {
        for tag in [Algebra::Exterior, Algebra::Clifford] {
            let [a, b, c] = [0, 1, 2].map(|_| form_gen(rng, 3, s).retag(tag));
            if &(&a * &b) * &c != &a * &(&b * &c) {
                return Outcome::Fail(format!("case {case} ({tag:?}): a = {a}, b = {b}, c = {c}"));
            }
        }
    }
    Outcome::Pass
}

pub fn filtration<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let n = 4;
    let s = form_shape(n, 1, 1);
    for case in 0..cases {
        let (p, q) = (rng.gen_range(0..=2u32), rng.gen_range(0..=2u32));
        let a = form_gen(rng, n, s).filter(|m| m.count_ones() == p);
        let b = form_gen(rng, n, s).filter(|m| m.count_ones() == q);
        let (ca, cb) = (quantize(&a).expect("exterior"), quantize(&b).expect("exterior"));
        let prod = &ca * &cb;
        if prod.max_grade().is_some_and(|g| g > p + q) {
            return Outcome::Fail(format!("case {case}: grade of {prod} exceeds {}", p + q));
        }
        let top = symbol_map(&prod.grade(p + q)).expect("clifford");
        if top != wedge(&a, &b).expect("exterior") {
            return Outcome::Fail(format!("case {case}: top part {top} differs from wedge of {a} and {b}"));
        }
    }
    Outcome::Pass
}

pub fn quantization<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let s = form_shape(3, 1, 1);
    for case in 0..cases {
        let a = form_gen(rng, 3, s);
        let back = symbol_map(&quantize(&a).expect("exterior")).expect("clifford");
        if back != a {
            return Outcome::Fail(format!("case {case}: {a} came back as {back}"));
        }
    }
    Outcome::Pass
}

pub fn berezin() -> Outcome {
    let s = Shape::constants();
    for n in [2usize, 4, 6] {
        let c = berezin_constant(n).expect("even");
        let top = Mat::diag_const(2, &Multivector::const_blade(n, Algebra::Clifford, s, (1 << n) - 1, Scalar::one()));
        let got = berezin_str(&top, n).expect("even").constant_term();
        if got != &c + &c {
            return Outcome::Fail(format!("n = {n}: str of top blade (rank 2) = {got}, want 2({c})"));
        }
        let low = Mat::diag_const(1, &Multivector::const_blade(n, Algebra::Clifford, s, (1 << (n - 1)) - 1, Scalar::one()));
        if !berezin_str(&low, n).expect("even").is_zero() {
            return Outcome::Fail(format!("n = {n}: lower blade has nonzero supertrace"));
        }
    }
    if berezin_str(&Mat::diag_const(1, &Multivector::one(3, Algebra::Clifford, s)), 3).is_ok() {
        return Outcome::Fail("odd dimension accepted".into());
    }
    Outcome::Pass
}

pub fn dg_squared<R: Rng>(rng: &mut R, cases: usize, j: u32) -> Outcome {
    let s = form_shape(3, 1, j.max(2));
    let act = VectorField::rotation(s, 3, &[(0, 2)]);
    for case in 0..cases {
        let a = eqforms::gen::form(rng, 3, s, 2, 4);
        let dd = eqforms::d_g(&eqforms::d_g(&a, &act).expect("linear"), &act).expect("linear");
        let res = &dd + &eqforms::lie(&act, &a).expect("linear");
        if !res.is_zero() {
            return Outcome::Fail(format!("case {case}: form {a}, residual {res}"));
        }
    }
    Outcome::Pass
}

pub fn kosmann<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let s = form_shape(4, 2, 1);
    for case in 0..cases {
        let gens = vec![eqforms::gen::antisymmetric(rng, 4), eqforms::gen::antisymmetric(rng, 4)];
        let act = VectorField::linear_action(s, &gens);
        let (a, b) = (eqforms::spinor_moment(&act), eqforms::kosmann_moment(&act));
        if a != b {
            return Outcome::Fail(format!("case {case}: spin lift {a}, Kosmann {b}"));
        }
    }
    Outcome::Pass
}

pub fn characteristic_closed<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let s = form_shape(2, 1, 2);
    for case in 0..cases {
        let radial: Vec<Scalar> = (0..rng.gen_range(1..=3)).map(|_| eqforms::gen::small_scalar(rng)).collect();
        let c = Scalar::int(rng.gen_range(-2..=2));
        let (a, act, fiber) = eqforms::invariant_plane_connection(s, &radial, c);
        let rg = eqforms::equivariant_curvature(&a, &act, &fiber).expect("linear");
        for (name, f) in [("A-hat", eqforms::ahat(&rg)), ("Ch", eqforms::ch_rel(&rg, None))] {
            let f = match f {
                Ok(f) => f,
                Err(e) => return Outcome::Fail(format!("case {case}: {name}: {e}")),
            };
            let dg = eqforms::d_g(&f, &act).expect("linear");
            if !dg.is_zero() {
                return Outcome::Fail(format!("case {case}: d_X {name} = {dg}"));
            }
        }
    }
    Outcome::Pass
}

pub fn ahat_multiplicative<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let s = form_shape(2, 2, 1);
    for case in 0..cases {
        let mut r = eqforms::function(2, &PolyFn::lie(s, 0).scale(&eqforms::gen::small_scalar(rng)) + &PolyFn::lie(s, 1).scale(&eqforms::gen::small_scalar(rng)));
        r.add_blade(0b11, &PolyFn::constant(s, eqforms::gen::small_scalar(rng)));
        let t = eqforms::function(2, PolyFn::lie(s, 1).scale(&eqforms::gen::small_scalar(rng)));
        let (br, bt) = (eqforms::rotation_block(&r), eqforms::rotation_block(&t));
        let lhs = eqforms::ahat(&eqforms::block_diag(&br, &bt)).expect("nilpotent");
        let rhs = &eqforms::ahat(&br).expect("nilpotent") * &eqforms::ahat(&bt).expect("nilpotent");
        if lhs != rhs {
            return Outcome::Fail(format!("case {case}: blocks {r} and {t}"));
        }
    }
    Outcome::Pass
}

pub fn sphere_theta_moment<R: Rng>(rng: &mut R, points: usize, tol: f64) -> Outcome {
    let geo = GeometryModel;
    for i in 0..points {
        let c = if i % 2 == 0 { Chart::North } else { Chart::South };
        let (u, v) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        match geo.theta_moment_residual(c, u, v) {
            Ok(r) if r.abs() < tol => {}
            Ok(r) => return Outcome::Fail(format!("{c:?} chart at ({u}, {v}): residual {r:e}")),
            Err(e) => return Outcome::Fail(e.to_string()),
        }
    }
    Outcome::Pass
}

pub fn sphere_chern(q: &QuadratureConfig, kmax: i64) -> Outcome {
    for k in 0..=kmax {
        match kirillov::chern_number(k, q) {
            Ok(c) if (c - k as f64).abs() < 1e-10 => {}
            Ok(c) => return Outcome::Fail(format!("k = {k}: Chern number {c}")),
            Err(e) => return Outcome::Inconclusive(e.to_string()),
        }
    }
    Outcome::Pass
}

pub fn dnc_homomorphism<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let m = Model::new(1, 2);
    for case in 0..cases {
        let f = dnc::gen::member(rng, m, 4);
        let g = dnc::gen::member(rng, m, 4);
        let xm = dnc::gen::normal_vector(rng, m);
        let fg = f.product(&g);
        if !fg.is_member() {
            return Outcome::Fail(format!("case {case}: product left the ring"));
        }
        let z = dnc::eval_zero(&fg, &xm).expect("member");
        let z2 = &dnc::eval_zero(&f, &xm).expect("member") * &dnc::eval_zero(&g, &xm).expect("member");
        if z != z2 {
            return Outcome::Fail(format!("case {case}: zero fiber {z} vs {z2}"));
        }
        let v: Vec<Scalar> = (0..3).map(|_| dnc::gen::scalar(rng)).collect();
        let lam = Q::new(rng.gen_range(1..5).into(), rng.gen_range(1..5).into());
        let g1 = dnc::eval_generic(&fg, &v, &lam).expect("lambda nonzero");
        let g2 = &dnc::eval_generic(&f, &v, &lam).expect("lambda nonzero") * &dnc::eval_generic(&g, &v, &lam).expect("lambda nonzero");
        if g1 != g2 {
            return Outcome::Fail(format!("case {case}: generic fiber {g1} vs {g2}"));
        }
    }
    Outcome::Pass
}

fn monomial_basis(m: Model, deg: i32) -> Vec<LaurentFn> {
    let mut out = Vec::new();
    for a1 in 0..=deg {
        for a2 in 0..=deg - a1 {
            for b in 0..=2 {
                for p in -1..=(a1 + a2) {
                    out.push(LaurentFn::single(m, p, PolyFn::monomial(m.shape(), vec![b, a1, a2], Scalar::one())));
                }
            }
        }
    }
    out
}

pub fn dnc_exp_factorization(deg: i32) -> Outcome {
    let m = Model::new(1, 2);
    let xm = NormalVector { base: vec![Scalar::ratio(2, 3)], normal: vec![Scalar::ratio(-1, 2), Scalar::int(3)] };
    let field = dnc::normal_field(m, &xm.normal);
    for f in monomial_basis(m, deg) {
        let a = dnc::eval_zero(&f, &xm).expect("member");
        let b = dnc::eval_exp_flow(&f, &xm.base, &field).expect("member");
        if a != b {
            return Outcome::Fail(format!("{:?}: eval {a}, flow {b}", f.terms()));
        }
    }
    Outcome::Pass
}

pub fn dnc_euler_like<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let m = Model::new(0, 2);
    let e = dnc::euler_field(m);
    for case in 0..cases {
        let mut bent = e.clone();
        for c in bent.comps.iter_mut() {
            let (i, j) = (rng.gen_range(0..2), rng.gen_range(0..2));
            *c = &*c + &(&m.y(i) * &m.y(j)).scale(&dnc::gen::scalar(rng));
        }
        let a = rng.gen_range(0..=3);
        let f = &m.y(0).pow(a) * &m.y(1).pow(3 - a);
        if !dnc::euler_like_check(m, &bent, &f, 3) {
            return Outcome::Fail(format!("case {case}: perturbed Euler field rejected"));
        }
    }
    let d1 = dnc::normal_field(m, &[Scalar::one(), Scalar::zero()]);
    if dnc::euler_like_check(m, &d1, &m.y(0), 1) {
        return Outcome::Fail("constant field accepted as Euler-like".into());
    }
    Outcome::Pass
}

pub fn dnc_spectral_continuity(deg: i32) -> Outcome {
    let m = Model::new(1, 2);
    let xm = NormalVector { base: vec![Scalar::ratio(-1, 3)], normal: vec![Scalar::int(2), Scalar::ratio(5, 2)] };
    for f in monomial_basis(m, deg) {
        let path = match dnc::generic_along_path(&f, &xm) {
            Ok(p) => p,
            Err(e) => return Outcome::Fail(e.to_string()),
        };
        if path.min_degree_in(0..1).is_some_and(|d| d < 0) {
            return Outcome::Fail(format!("{:?}: path {path} has a pole at lambda = 0", f.terms()));
        }
        if path.constant_term() != dnc::eval_zero(&f, &xm).expect("member") {
            return Outcome::Fail(format!("{:?}: lambda -> 0 limit {}", f.terms(), path.constant_term()));
        }
    }
    Outcome::Pass
}

fn random_rescaled<R: Rng>(rng: &mut R) -> Rescaled {
    let b = rescale::gen::bundle(rng);
    let a = rescale::gen::connection(rng, &b);
    Rescaled::new(b, a, 8).expect("generated connection is admissible")
}

pub fn scaling_equals_taylor<R: Rng>(rng: &mut R, cases: usize, ydeg: i32, op_bound: i32) -> Outcome {
    let mut inconclusive = 0;
    for case in 0..cases {
        let c = random_rescaled(rng);
        let s = rescale::gen::section(rng, &c.bundle, ydeg);
        let t = match c.taylor_order(&s) {
            Ok(t) => t,
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        };
        let bf = c.scaling_order_bruteforce(&s, op_bound);
        if !(t.conclusive && bf.conclusive) {
            inconclusive += 1;
            continue;
        }
        if t.order != bf.order {
            return Outcome::Fail(format!("case {case}: q = {:?}, section {:?}: o_t = {}, o_sc = {}", c.bundle.q, show(&s), t.order, bf.order));
        }
    }
    if inconclusive > 0 {
        return Outcome::Inconclusive(format!("{inconclusive} of {cases} cases exceed op_bound = {op_bound}"));
    }
    Outcome::Pass
}

fn show(s: &[PolyFn]) -> Vec<String> {
    s.iter().map(|p| p.to_string()).collect()
}

pub fn action_monotonicity<R: Rng>(rng: &mut R, cases: usize, ydeg: i32, op_bound: i32) -> Outcome {
    let mut inconclusive = 0;
    for case in 0..cases {
        let c = random_rescaled(rng);
        let d = rescale::gen::diffop(rng, &c.bundle);
        let s = rescale::gen::section(rng, &c.bundle, ydeg);
        let ds = c.apply(&d, &s);
        let og = match c.getzler_order(&d) {
            Ok(o) => o,
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        };
        let (a, b) = (c.scaling_order_bruteforce(&s, op_bound), c.scaling_order_bruteforce(&ds, op_bound));
        if !(a.conclusive && b.conclusive) {
            inconclusive += 1;
            continue;
        }
        let bound = match (a.order, og) {
            (Order::PosInf, _) | (_, Order::NegInf) => continue,
            (o, Order::Fin(g)) => o.plus(-g),
            (_, Order::PosInf) => Order::NegInf,
        };
        if b.order < bound {
            return Outcome::Fail(format!("case {case}: o_sc(Ds) = {} < o_sc(s) - o_g(D) = {bound}", b.order));
        }
    }
    if inconclusive > 0 {
        return Outcome::Inconclusive(format!("{inconclusive} of {cases} cases exceed op_bound = {op_bound}"));
    }
    Outcome::Pass
}

pub fn composition_subadditive<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    for case in 0..cases {
        let c = random_rescaled(rng);
        let (d1, d2) = (rescale::gen::diffop(rng, &c.bundle), rescale::gen::diffop(rng, &c.bundle));
        let o12 = c.getzler_order(&c.compose(&d1, &d2));
        let (o1, o2) = (c.getzler_order(&d1), c.getzler_order(&d2));
        match (o12, o1, o2) {
            (Ok(o12), Ok(Order::Fin(x)), Ok(Order::Fin(y))) if o12 > Order::Fin(x + y) => {
                return Outcome::Fail(format!("case {case}: o_g(D1 D2) = {o12} > {x} + {y}"));
            }
            (Err(e), ..) | (_, Err(e), _) | (.., Err(e)) => return Outcome::Fail(format!("case {case}: {e}")),
            _ => {}
        }
        let s = rescale::gen::section(rng, &c.bundle, 3);
        if c.apply(&c.compose(&d1, &d2), &s) != c.apply(&d1, &c.apply(&d2, &s)) {
            return Outcome::Fail(format!("case {case}: composition does not act as D1(D2 s)"));
        }
    }
    Outcome::Pass
}

pub fn frame_rank<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    for case in 0..cases {
        let c = random_rescaled(rng);
        let (l, k) = (c.bundle.l, c.bundle.k);
        let sc = |rng: &mut R| Scalar::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3));
        let pts: Vec<DncPoint> = (0..8)
            .map(|i| {
                if i % 2 == 0 {
                    DncPoint::Generic { v: (0..l + k).map(|_| sc(rng)).collect(), lambda: Q::new(rng.gen_range(1..6).into(), rng.gen_range(1..6).into()) }
                } else {
                    DncPoint::Zero { m: (0..l).map(|_| sc(rng)).collect(), normal: (0..k).map(|_| sc(rng)).collect() }
                }
            })
            .collect();
        match c.frame_rank_test(&c.standard_frame(), &pts) {
            Ok(true) => {}
            Ok(false) => return Outcome::Fail(format!("case {case}: q = {:?}: standard frame degenerates", c.bundle.q)),
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        }
    }
    Outcome::Pass
}

/// Random member of the Clifford-model rescaled module: a sum of generators,
/// some pushed to higher powers of `t`.
fn clifford_module_section<R: Rng>(rng: &mut R, br: &SymbolBridge) -> LaurentSection {
    let (n, r, d) = (br.model.n, br.model.r, br.ctx.bundle.lie_dim);
    let mut s = LaurentSection::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut alpha = vec![0; n];
        for _ in 0..rng.gen_range(0..=2) {
            alpha[rng.gen_range(0..n)] += 1;
        }
        let mut beta = vec![0; d];
        if d > 0 && rng.gen_bool(0.4) {
            beta[rng.gen_range(0..d)] += 1;
        }
        let g = br.generator(&alpha, &beta, rng.gen_range(0..1u32 << n), rng.gen_range(0..r), rng.gen_range(0..r));
        let shift = if rng.gen_bool(0.3) { 1 } else { 0 };
        let c = Scalar::int(rng.gen_range(1..=3));
        for (p, sp) in g.terms {
            s.add(p - shift, rescale::sec_scale(&sp, &c));
        }
    }
    s
}

pub fn str_reduction<R: Rng>(rng: &mut R, cases: usize, j: u32) -> Outcome {
    for case in 0..cases {
        let n = 2;
        let r = rng.gen_range(1..=2);
        let k = symbols::gen::curvature_model(rng, n, r, 1, j.min(2));
        let br = match SymbolBridge::new(&k, 6) {
            Ok(b) => b,
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        };
        let mut s = clifford_module_section(rng, &br);
        // Always include a top-degree generator so the t = 0 value is not trivially zero.
        let a = rng.gen_range(0..r);
        s = s.sum(&br.generator(&[0, 0], &[0], 0b11, a, a));
        let st = match br.model.str_t(&br.ctx, &s) {
            Ok(v) => v,
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        };
        if let Some((m, _)) = st.terms().iter().find(|(m, _)| m[0] < 0) {
            return Outcome::Fail(format!("case {case}: t^-n str has the negative power t^{}", m[0]));
        }
        let bs = br.ctx.shape();
        let at_zero = st.remap(bs, |m| {
            (m[0] == 0).then(|| {
                let mut out = vec![0; bs.nx];
                out.extend_from_slice(&m[1..]);
                out
            })
        });
        let zf = match br.ctx.eval_section_zero(&s, &[], &Normal::Fixed(vec![Scalar::zero(); n])) {
            Ok(v) => v,
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        };
        let ber = berezin_str(&br.model.from_section(&zf, Algebra::Clifford), n).expect("even dimension");
        if ber != at_zero {
            return Outcome::Fail(format!("case {case}: t = 0 value {at_zero}, Berezin of zero fiber {ber}"));
        }
    }
    Outcome::Pass
}

#[derive(Clone, Copy, Debug)]
pub enum WittenCase {
    Quadratic,
    ClosedForm,
    Counterexample,
}

/// Trivially filtered `Λℝ²` over `ℝ × {y}` with deformations in `y₁`.
pub fn witten_case(case: WittenCase) -> Outcome {
    let b = FilteredBundle::elementary(1, 1, vec![0; 4]);
    let c = Rescaled::flat(b.clone(), 8).expect("flat connection");
    let y = b.y(0);
    let def = match case {
        WittenCase::Quadratic => Deformation::Function(&y * &y),
        WittenCase::ClosedForm => Deformation::OneForm(vec![PolyFn::zero(b.shape()), y.scale(&Scalar::int(2))]),
        WittenCase::Counterexample => Deformation::Function(y.clone()),
    };
    let mut sections: Vec<LaurentSection> = (0..4).map(|i| LaurentSection::monomial(b.frame(i), 0)).collect();
    for i in 0..4 {
        let sigma = rescale::sec_mul_poly(&b.frame(i), &(&y * &b.x(0)));
        sections.push(LaurentSection::monomial(sigma, -1));
    }
    for (idx, s) in sections.iter().enumerate() {
        let rep = match rescale::witten_membership(&c, &def, s) {
            Ok(r) => r,
            Err(e) => return Outcome::Fail(e.to_string()),
        };
        match case {
            WittenCase::Counterexample => {
                if rep.member {
                    return Outcome::Fail(format!("section {idx} stayed in the module"));
                }
                if rep.witness.is_none() {
                    return Outcome::Fail(format!("section {idx}: non-member without witness"));
                }
            }
            _ => {
                if !rep.member {
                    return Outcome::Fail(format!("section {idx} left the module: {:?}", rep.witness));
                }
            }
        }
    }
    Outcome::Pass
}

pub fn generator_symbols<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    for case in 0..cases {
        let n = 2;
        let r = rng.gen_range(1..=2);
        let k = symbols::gen::curvature_model(rng, n, r, 1, 1);
        let br = match SymbolBridge::new(&k, 6) {
            Ok(b) => b,
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        };
        let s = clifford_module_section(rng, &br);
        let i = rng.gen_range(0..n);
        let ops = [GeneratorOp::Nabla(i), GeneratorOp::Clifford(rng.gen_range(0..n)), GeneratorOp::Poly(PolyFn::lie(k.shape, 0))];
        for op in ops {
            match br.consistency(&op, &k, &s) {
                Ok((lhs, rhs)) if lhs == rhs => {}
                Ok((lhs, rhs)) => return Outcome::Fail(format!("case {case}, {op:?}: evaluated {lhs}, closed form {rhs}")),
                Err(e) => return Outcome::Fail(format!("case {case}, {op:?}: {e}")),
            }
        }
    }
    Outcome::Pass
}

pub fn oscillator<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    for case in 0..cases {
        let n = if case % 2 == 0 { 2 } else { 3 };
        let k = symbols::gen::curvature_model(rng, n, 2, 1, 1);
        let s = symbols::gen::section(rng, &k);
        if symbols::harmonic_oscillator(&k, &s) != symbols::harmonic_oscillator_composed(&k, &s) {
            return Outcome::Fail(format!("case {case}: n = {n}"));
        }
    }
    Outcome::Pass
}

/// All flat-chart identities for the rotation model and `cases` random
/// charts, at `u = 1/4` and one other `u`.
pub fn dirac_identities<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let shape = Shape::new(2, 1, 2);
    let z = Mat::zeros(1, 1, &PolyFn::zero(shape));
    let rot = ChartDiracData { n: 2, r: 1, shape, a: vec![z.clone(), z.clone()], action: VectorField::rotation(shape, 2, &[(0, 1)]), mu_w: z };
    let mut charts = vec![rot];
    for _ in 0..cases {
        let r = rng.gen_range(1..=2);
        charts.push(symbols::gen::chart_data(rng, 2, r));
    }
    for (idx, data) in charts.iter().enumerate() {
        let u = Scalar::ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        for c in data.identities(&[Scalar::ratio(1, 4), u], 2) {
            if !c.ok {
                return Outcome::Fail(format!("chart {idx}: {}: {}", c.name, c.witness.unwrap_or_default()));
            }
        }
    }
    Outcome::Pass
}

pub fn omega_radial<R: Rng>(rng: &mut R, cases: usize) -> Outcome {
    let shape = Shape::new(3, 1, 1);
    let rad = VectorField::radial(shape, 3);
    for case in 0..cases {
        let comps: Vec<PolyFn> = (0..3)
            .map(|_| eqforms::gen::poly(rng, shape, 3, 3).remap(shape, |m| if m[..3].iter().sum::<i32>() == 0 { None } else { Some(m.to_vec()) }))
            .collect();
        let th = eqforms::one_form(3, &comps);
        let w = match symbols::conjugate_form_omega(&th) {
            Ok(w) => w,
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        };
        let rc = w.contract(&rad.comps);
        if !rc.is_zero() {
            return Outcome::Fail(format!("case {case}: iota_R omega = {rc}"));
        }
        let base = w.map_coeffs(|p| p.subs(&[(0, Scalar::zero()), (1, Scalar::zero()), (2, Scalar::zero())]));
        if !base.is_zero() {
            return Outcome::Fail(format!("case {case}: omega at the base point = {base}"));
        }
    }
    Outcome::Pass
}

pub fn heat_equation<R: Rng>(rng: &mut R, cases: usize, dims: &[usize], jmax: u32) -> Outcome {
    for case in 0..cases {
        let n = dims[case % dims.len()];
        let j = 1 + (case as u32 / dims.len() as u32) % jmax;
        let r = if n == 2 { rng.gen_range(1..=2) } else { 1 };
        let k = symbols::gen::curvature_model(rng, n, r, 1, j);
        match mehler::verify_heat_equation(&k) {
            Ok(res) if res.is_zero() => {}
            Ok(res) => return Outcome::Fail(format!("case {case} (n = {n}, J = {j}): residual {res}")),
            Err(e) => return Outcome::Fail(format!("case {case} (n = {n}, J = {j}): {e}")),
        }
    }
    Outcome::Pass
}

pub fn kernel_supertrace<R: Rng>(rng: &mut R, cases: usize, jmax: u32) -> Outcome {
    for case in 0..cases {
        let j = 1 + case as u32 % jmax;
        let r = rng.gen_range(1..=2);
        let k = symbols::gen::curvature_model(rng, 2, r, 1, j);
        match (mehler::kernel_supertrace_at_one(&k), mehler::kirillov_integrand(&k)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(a), Ok(b)) => return Outcome::Fail(format!("case {case}: kernel {a}, integrand {b}")),
            (Err(e), _) | (_, Err(e)) => return Outcome::Fail(format!("case {case}: {e}")),
        }
    }
    Outcome::Pass
}

fn kirillov_outcome(r: Result<KirillovReport, KirillovError>) -> Outcome {
    match r {
        Ok(r) if r.pass => Outcome::Pass,
        Ok(r) => Outcome::Fail(format!("k = {}, s = {}: integral {}, character {}, |diff| = {:e}", r.k, r.s, r.lhs, r.rhs, r.diff)),
        Err(e @ KirillovError::NotConverged { .. }) => Outcome::Inconclusive(e.to_string()),
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

pub fn kirillov_point(k: i64, s: f64, tol: f64, q: &QuadratureConfig) -> Outcome {
    let q = QuadratureConfig { tolerance: q.tolerance.min(tol), ..q.clone() };
    kirillov_outcome(kirillov::kirillov_check(k, s, &q).map(|mut r| {
        r.pass = r.diff < tol;
        r
    }))
}

#[derive(Serialize)]
struct SweepRow {
    s: f64,
    integral_re: f64,
    integral_im: f64,
    character_re: f64,
    character_im: f64,
    diff: f64,
    quadrature_error: f64,
}

pub fn write_sweep_csv(path: &Path, rows: &[KirillovReport]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    for r in rows {
        w.serialize(SweepRow {
            s: r.s,
            integral_re: r.lhs.re,
            integral_im: r.lhs.im,
            character_re: r.rhs.re,
            character_im: r.rhs.im,
            diff: r.diff,
            quadrature_error: r.error_estimate,
        })
        .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// Runs the sweep; fails at the first `s` where agreement degrades.
pub fn kirillov_sweep(sw: &SweepConfig, tol: f64, q: &QuadratureConfig) -> Outcome {
    let rows = match kirillov::sweep(sw.k, sw.lo, sw.hi, sw.steps, q) {
        Ok(r) => r,
        Err(e) => return kirillov_outcome(Err(e)),
    };
    if let Some(path) = &sw.csv {
        if let Err(e) = write_sweep_csv(path, &rows) {
            return Outcome::Fail(format!("cannot write {}: {e}", path.display()));
        }
    }
    match rows.iter().find(|r| r.diff >= tol) {
        None => Outcome::Pass,
        Some(r) => Outcome::Fail(format!("agreement degrades at s = {}: |diff| = {:e}", r.s, r.diff)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn str_detects_non_member() {
        let mut rng = rng_for(1, "t");
        let k = symbols::gen::curvature_model(&mut rng, 2, 1, 1, 1);
        let br = SymbolBridge::new(&k, 6).unwrap();
        // The top generator sits at p = -2; moving it to p = -1 breaks membership.
        let g = br.generator(&[0, 0], &[0], 0b11, 0, 0);
        let mut s = LaurentSection::new();
        for (p, sp) in g.terms {
            s.add(p + 1, sp);
        }
        assert_eq!(br.ctx.membership(&s), Ok(false));
        let st = br.model.str_t(&br.ctx, &s).unwrap();
        assert!(st.terms().keys().any(|m| m[0] < 0));
    }

    #[test]
    fn symbols_distinguish_operators() {
        let mut rng = rng_for(2, "t");
        let k = symbols::gen::curvature_model(&mut rng, 2, 1, 1, 1);
        let br = SymbolBridge::new(&k, 6).unwrap();
        let s = br.generator(&[1, 0], &[0], 0, 0, 0);
        let (lhs, _) = br.consistency(&GeneratorOp::Nabla(0), &k, &s).unwrap();
        let (_, rhs) = br.consistency(&GeneratorOp::Nabla(1), &k, &s).unwrap();
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn kirillov_failure_has_witness() {
        let q = QuadratureConfig::default();
        match kirillov_point(1, 0.3, 1e-30, &q) {
            Outcome::Fail(w) | Outcome::Inconclusive(w) => assert!(w.contains("k = 1") || w.contains("estimate"), "{w}"),
            Outcome::Pass => panic!("impossible tolerance passed"),
        }
    }
}
