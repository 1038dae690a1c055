//! Filtered bundles on the linear model `ℝ^l × ℝ^k`, their scaling and Taylor
//! orders, and the rescaled module with its evaluation maps.
//!
//! Polynomials live in the shape `(x_1..x_l, y_1..y_k, η_1..η_k | X_1..X_d)`.
//! The `η` block is the symbolic normal vector used by the zero-fiber
//! evaluation; every other computation ignores it. A frame element `e_i`
//! times `X^β` has filtration degree `q_i + w·|β|` where `w` is the Lie weight
//! (0 for plain bundles, 2 for the equivariant Clifford model).

use std::collections::BTreeMap;
use std::ops::Range;

use thiserror::Error;

use crate::gradealg::{berezin_constant, Algebra, Multivector};
use crate::matrix::{rank, Mat};
use crate::poly::{Mono, PolyFn, Shape};
use crate::scalar::{Scalar, Q};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RescaleError {
    #[error("connection violates condition {which}: {detail}")]
    Condition { which: u8, detail: String },
    #[error("End filtration is inconsistent: {0}")]
    Filtration(String),
    #[error("endomorphism is outside the filtered algebra")]
    NotInAlgebra,
    #[error("requested order {requested} exceeds the truncation {max}")]
    Truncation { requested: i32, max: i32 },
    #[error("not in the rescaled module: {0}")]
    NotMember(String),
    #[error("order computation did not stabilise below the truncation")]
    Inconclusive,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("supertrace needs an even-dimensional Clifford model")]
    NotClifford,
}

/// Order value with saturating sentinels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    NegInf,
    Fin(i32),
    PosInf,
}

impl Order {
    pub fn plus(self, d: i32) -> Order {
        match self {
            Order::Fin(a) => Order::Fin(a + d),
            s => s,
        }
    }

    pub fn neg(self) -> Order {
        match self {
            Order::NegInf => Order::PosInf,
            Order::PosInf => Order::NegInf,
            Order::Fin(a) => Order::Fin(-a),
        }
    }

    pub fn finite(self) -> Option<i32> {
        match self {
            Order::Fin(a) => Some(a),
            _ => None,
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::NegInf => write!(f, "-inf"),
            Order::PosInf => write!(f, "+inf"),
            Order::Fin(a) => write!(f, "{a}"),
        }
    }
}

/// An order together with whether the truncation was large enough to trust it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderResult {
    pub order: Order,
    pub conclusive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EndFilt {
    /// `E_ab` has order `g(a, b)`; `None` means `max(0, q_a − q_b)`.
    Elementary(Option<Vec<Vec<i32>>>),
    /// `E = Cl(n) ⊗ Mat_r` with frame `e_I ⊗ E_ab`; the filtered algebra is the
    /// commutant of right Clifford multiplication, graded by the left
    /// Clifford degree.
    CliffordLeft { n: usize, r: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredBundle {
    pub l: usize,
    pub k: usize,
    pub q: Vec<i32>,
    pub end: EndFilt,
    pub lie_dim: usize,
    pub j: u32,
    pub lie_weight: i32,
}

pub type Section = Vec<PolyFn>;

pub fn sec_zero(shape: Shape, r: usize) -> Section {
    vec![PolyFn::zero(shape); r]
}

pub fn sec_add(a: &Section, b: &Section) -> Section {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sec_sub(a: &Section, b: &Section) -> Section {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn sec_scale(a: &Section, c: &Scalar) -> Section {
    a.iter().map(|x| x.scale(c)).collect()
}

pub fn sec_mul_poly(a: &Section, p: &PolyFn) -> Section {
    a.iter().map(|x| x * p).collect()
}

pub fn sec_is_zero(a: &Section) -> bool {
    a.iter().all(|x| x.is_zero())
}

impl FilteredBundle {
    pub fn elementary(l: usize, k: usize, q: Vec<i32>) -> Self {
        FilteredBundle { l, k, q, end: EndFilt::Elementary(None), lie_dim: 0, j: 0, lie_weight: 0 }
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.l + 2 * self.k, self.lie_dim, self.j)
    }

    pub fn xs(&self) -> Range<usize> {
        0..self.l
    }

    pub fn ys(&self) -> Range<usize> {
        self.l..self.l + self.k
    }

    pub fn etas(&self) -> Range<usize> {
        self.l + self.k..self.l + 2 * self.k
    }

    pub fn y(&self, j: usize) -> PolyFn {
        PolyFn::x(self.shape(), self.l + j)
    }

    pub fn x(&self, i: usize) -> PolyFn {
        PolyFn::x(self.shape(), i)
    }

    pub fn eta(&self, j: usize) -> PolyFn {
        PolyFn::x(self.shape(), self.l + self.k + j)
    }

    pub fn max_q(&self) -> i32 {
        self.q.iter().copied().max().unwrap_or(0)
    }

    /// Largest filtration degree present in `F`.
    pub fn max_grade(&self) -> i32 {
        self.max_q() + self.lie_weight * if self.lie_dim > 0 { self.j as i32 } else { 0 }
    }

    /// Frame element `e_i` as a constant section.
    pub fn frame(&self, i: usize) -> Section {
        let mut s = sec_zero(self.shape(), self.rank());
        s[i] = PolyFn::one(self.shape());
        s
    }

    fn lie_deg(&self, m: &[i32]) -> i32 {
        self.shape().lie_degree(m)
    }

    pub fn g(&self, a: usize, b: usize) -> i32 {
        match &self.end {
            EndFilt::Elementary(Some(g)) => g[a][b],
            _ => (self.q[a] - self.q[b]).max(0),
        }
    }

    /// Restriction to `M` (`y = 0`); the `η` block is kept.
    pub fn restrict(&self, p: &PolyFn) -> PolyFn {
        p.restrict_zero(self.ys())
    }

    pub fn restrict_section(&self, s: &Section) -> Section {
        s.iter().map(|p| self.restrict(p)).collect()
    }

    /// `o^f(σ)`: largest filtration degree surviving restriction to `M`.
    pub fn filtration_order(&self, s: &Section) -> Order {
        let mut best = Order::NegInf;
        for (i, p) in s.iter().enumerate() {
            for m in self.restrict(p).terms().keys() {
                best = best.max(Order::Fin(self.q[i] + self.lie_weight * self.lie_deg(m)));
            }
        }
        best
    }

    /// Filtration order of `φ|_M` in the filtration induced by `F`.
    pub fn end_filtration_order(&self, phi: &Mat<PolyFn>) -> Order {
        let mut best = Order::NegInf;
        for a in 0..phi.rows() {
            for b in 0..phi.cols() {
                for m in self.restrict(phi.get(a, b)).terms().keys() {
                    best = best.max(Order::Fin(self.q[a] + self.lie_weight * self.lie_deg(m) - self.q[b]));
                }
            }
        }
        best
    }

    /// `o^g(φ)` in the algebra filtration of `End(E)`.
    pub fn end_order(&self, phi: &Mat<PolyFn>) -> Result<Order, RescaleError> {
        let r = self.rank();
        if phi.rows() != r || phi.cols() != r {
            return Err(RescaleError::Shape(format!("{}x{} endomorphism on rank {r}", phi.rows(), phi.cols())));
        }
        let mut best = Order::NegInf;
        match &self.end {
            EndFilt::Elementary(_) => {
                for a in 0..r {
                    for b in 0..r {
                        for m in phi.get(a, b).terms().keys() {
                            best = best.max(Order::Fin(self.g(a, b) + self.lie_weight * self.lie_deg(m)));
                        }
                    }
                }
            }
            EndFilt::CliffordLeft { n, r: tw } => {
                let cm = CliffordModel { n: *n, r: *tw };
                for i in 0..*n {
                    let rc = cm.right_clifford(self.shape(), i);
                    if !phi.commutator(&rc).is_zero() {
                        return Err(RescaleError::NotInAlgebra);
                    }
                }
                let tw2 = tw * tw;
                for col in 0..tw2 {
                    for row in 0..r {
                        let grade = (row / tw2).count_ones() as i32;
                        for m in phi.get(row, col).terms().keys() {
                            best = best.max(Order::Fin(grade + self.lie_weight * self.lie_deg(m)));
                        }
                    }
                }
            }
        }
        Ok(best)
    }

    /// Generators of the filtered algebra with their declared orders.
    pub fn end_generators(&self) -> Vec<(Mat<PolyFn>, i32)> {
        let s = self.shape();
        let r = self.rank();
        let z = PolyFn::zero(s);
        match &self.end {
            EndFilt::Elementary(_) => {
                let mut out = Vec::new();
                for a in 0..r {
                    for b in 0..r {
                        let mut m = Mat::zeros(r, r, &z);
                        m.set(a, b, PolyFn::one(s));
                        out.push((m, self.g(a, b)));
                    }
                }
                out
            }
            EndFilt::CliffordLeft { n, r: tw } => {
                let cm = CliffordModel { n: *n, r: *tw };
                let mut out = Vec::new();
                for i in 0..*n {
                    out.push((cm.left(&cm.clifford_gen(s, i)), 1));
                }
                for a in 0..*tw {
                    for b in 0..*tw {
                        let mut e = Mat::zeros(*tw, *tw, &z);
                        e.set(a, b, PolyFn::one(s));
                        out.push((cm.left(&cm.twist(&e)), 0));
                        out.push((cm.right_matrix(&e), 0));
                    }
                }
                out
            }
        }
    }

    /// Compatibility `End^j F^p ⊂ F^{p+j}` and the algebra-filtration axioms.
    pub fn validate(&self) -> Result<(), RescaleError> {
        let r = self.rank();
        match &self.end {
            EndFilt::Elementary(g) => {
                if let Some(g) = g {
                    if g.len() != r || g.iter().any(|row| row.len() != r) {
                        return Err(RescaleError::Filtration("g has the wrong size".into()));
                    }
                }
                for a in 0..r {
                    if self.g(a, a) != 0 {
                        return Err(RescaleError::Filtration(format!("g({a},{a}) must be 0")));
                    }
                    for b in 0..r {
                        if self.g(a, b) < self.q[a] - self.q[b] || self.g(a, b) < 0 {
                            return Err(RescaleError::Filtration(format!("E_{a}{b} is not compatible")));
                        }
                        for c in 0..r {
                            if self.g(a, c) > self.g(a, b) + self.g(b, c) {
                                return Err(RescaleError::Filtration(format!("g is not subadditive at ({a},{b},{c})")));
                            }
                        }
                    }
                }
            }
            EndFilt::CliffordLeft { n, r: tw } => {
                if r != (1 << n) * tw * tw {
                    return Err(RescaleError::Filtration("rank must be 2^n r^2".into()));
                }
                for (i, q) in self.q.iter().enumerate() {
                    if *q != (i / (tw * tw)).count_ones() as i32 {
                        return Err(RescaleError::Filtration("frame degrees must be Clifford degrees".into()));
                    }
                }
                for (phi, j) in self.end_generators() {
                    if self.end_order(&phi)? > Order::Fin(j) {
                        return Err(RescaleError::Filtration("generator order".into()));
                    }
                    if self.end_filtration_order(&phi) > Order::Fin(j) {
                        return Err(RescaleError::Filtration("generator is not compatible".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Covariant derivative `∇ = d + Σ A_i dz^i` on a filtered bundle.
#[derive(Clone, Debug)]
pub struct Rescaled {
    pub bundle: FilteredBundle,
    a: Vec<Mat<PolyFn>>,
    pub trunc: i32,
}

/// `φ ∇_{w_1} ⋯ ∇_{w_m}` summed; indices are chart coordinates `0..l+k`.
#[derive(Clone, Debug)]
pub struct DiffOp {
    pub terms: Vec<(Mat<PolyFn>, Vec<usize>)>,
}

impl DiffOp {
    pub fn endo(phi: Mat<PolyFn>) -> Self {
        DiffOp { terms: vec![(phi, Vec::new())] }
    }

    pub fn nabla(bundle: &FilteredBundle, i: usize) -> Self {
        let id = Mat::identity(bundle.rank(), &PolyFn::zero(bundle.shape()));
        DiffOp { terms: vec![(id, vec![i])] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSection {
    /// `p ↦ s_p` for `Σ_p s_p t^{−p}`.
    pub terms: BTreeMap<i32, Section>,
}

impl LaurentSection {
    pub fn new() -> Self {
        LaurentSection { terms: BTreeMap::new() }
    }

    /// `σ · t^{e}`.
    pub fn monomial(sigma: Section, e: i32) -> Self {
        let mut s = Self::new();
        s.add(-e, sigma);
        s
    }

    pub fn add(&mut self, p: i32, sigma: Section) {
        if sec_is_zero(&sigma) {
            return;
        }
        match self.terms.get_mut(&p) {
            Some(v) => {
                *v = sec_add(v, &sigma);
                if sec_is_zero(v) {
                    self.terms.remove(&p);
                }
            }
            None => {
                self.terms.insert(p, sigma);
            }
        }
    }

    pub fn sum(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (p, v) in &o.terms {
            s.add(*p, v.clone());
        }
        s
    }
}

impl Default for LaurentSection {
    fn default() -> Self {
        Self::new()
    }
}

/// Where the zero-fiber evaluation takes its normal vector.
#[derive(Clone, Debug)]
pub enum Normal {
    /// `X_m = Σ η_j ∂_{y_j}` with the `η` block left symbolic.
    Symbolic,
    Fixed(Vec<Scalar>),
}

/// A point of the deformation space for the frame test.
#[derive(Clone, Debug)]
pub enum DncPoint {
    Generic { v: Vec<Scalar>, lambda: Q },
    Zero { m: Vec<Scalar>, normal: Vec<Scalar> },
}

fn factorial(n: i32) -> Q {
    (1..=n).fold(Q::from_integer(1.into()), |a, k| a * Q::from_integer(k.into()))
}

impl Rescaled {
    /// Checks the compatibility conditions on the connection.
    pub fn new(bundle: FilteredBundle, a: Vec<Mat<PolyFn>>, trunc: i32) -> Result<Self, RescaleError> {
        bundle.validate()?;
        if a.len() != bundle.l + bundle.k {
            return Err(RescaleError::Shape(format!("{} connection components for {} coordinates", a.len(), bundle.l + bundle.k)));
        }
        let s = Rescaled { bundle, a, trunc };
        s.check_conditions()?;
        Ok(s)
    }

    pub fn flat(bundle: FilteredBundle, trunc: i32) -> Result<Self, RescaleError> {
        let z = Mat::zeros(bundle.rank(), bundle.rank(), &PolyFn::zero(bundle.shape()));
        let a = vec![z; bundle.l + bundle.k];
        Self::new(bundle, a, trunc)
    }

    pub fn shape(&self) -> Shape {
        self.bundle.shape()
    }

    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    pub fn connection(&self) -> &[Mat<PolyFn>] {
        &self.a
    }

    fn check_conditions(&self) -> Result<(), RescaleError> {
        let b = &self.bundle;
        let r = b.rank();
        // (1) the restricted connection preserves F.
        for i in b.xs() {
            let ai = &self.a[i];
            for x in 0..r {
                for y in 0..r {
                    for m in b.restrict(ai.get(x, y)).terms().keys() {
                        if b.q[x] + b.lie_weight * b.lie_deg(m) > b.q[y] {
                            return Err(RescaleError::Condition { which: 1, detail: format!("A_{i} maps e_{y} out of its filtration step") });
                        }
                    }
                }
            }
        }
        // (2) curvature of order at most 2.
        let n = b.l + b.k;
        for i in 0..n {
            for j in i + 1..n {
                let k = self.curvature(i, j);
                if b.end_order(&k)? > Order::Fin(2) {
                    return Err(RescaleError::Condition { which: 2, detail: format!("K_{i}{j} has order above 2") });
                }
            }
        }
        // (3) the End connection has order 0, checked on algebra generators.
        for i in 0..n {
            for (phi, j) in b.end_generators() {
                let d = self.end_nabla(i, &phi);
                if b.end_order(&d)? > Order::Fin(j) {
                    return Err(RescaleError::Condition { which: 3, detail: format!("∇_{i} raises the order of a generator of order {j}") });
                }
            }
        }
        Ok(())
    }

    pub fn nabla(&self, i: usize, s: &Section) -> Section {
        let d: Section = s.iter().map(|p| p.deriv(i)).collect();
        sec_add(&d, &self.a[i].apply(s))
    }

    /// `∇_v σ` for `v = Σ v^i ∂_i` over the chart coordinates.
    pub fn nabla_along(&self, v: &[PolyFn], s: &Section) -> Section {
        let mut out = sec_zero(self.shape(), self.rank());
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                out = sec_add(&out, &sec_mul_poly(&self.nabla(i, s), c));
            }
        }
        out
    }

    pub fn end_nabla(&self, i: usize, phi: &Mat<PolyFn>) -> Mat<PolyFn> {
        phi.map(|p| p.deriv(i)).add(&self.a[i].commutator(phi))
    }

    pub fn curvature(&self, i: usize, j: usize) -> Mat<PolyFn> {
        let d = self.a[j].map(|p| p.deriv(i)).sub(&self.a[i].map(|p| p.deriv(j)));
        d.add(&self.a[i].commutator(&self.a[j]))
    }

    fn trunc_sec(&self, s: &Section, n: i32) -> Section {
        s.iter().map(|p| p.truncate_degree(self.bundle.ys(), n)).collect()
    }

    /// `A(𝓡)` split into `y`-homogeneous pieces of degree `1..n`.
    fn radial_parts(&self, n: i32) -> Vec<Mat<PolyFn>> {
        let b = &self.bundle;
        let z = Mat::zeros(b.rank(), b.rank(), &PolyFn::zero(self.shape()));
        let mut ar = z.clone();
        for j in 0..b.k {
            let y = b.y(j);
            ar = ar.add(&self.a[b.l + j].map(|p| p * &y));
        }
        (0..=n).map(|d| ar.map(|p| p.homogeneous_part(b.ys(), d))).collect()
    }

    /// The `𝓡`-synchronous section restricting to `s0` on `M`, to `y`-degree `< n`.
    pub fn synchronous_extension(&self, s0: &Section, n: i32) -> Section {
        let b = &self.bundle;
        let s0 = b.restrict_section(s0);
        let parts = self.radial_parts(n);
        let mut layers: Vec<Section> = vec![s0];
        for m in 1..n {
            let mut acc = sec_zero(self.shape(), b.rank());
            for d in 1..=m {
                let prev = &layers[(m - d) as usize];
                if parts[d as usize].is_zero() || sec_is_zero(prev) {
                    continue;
                }
                acc = sec_add(&acc, &parts[d as usize].apply(prev));
            }
            layers.push(sec_scale(&acc, &Scalar::ratio(-1, m as i64)));
        }
        layers.iter().fold(sec_zero(self.shape(), b.rank()), |a, l| sec_add(&a, l))
    }

    /// Taylor coefficients `σ_I` (synchronous) for `|I| < n`.
    pub fn taylor_expand(&self, s: &Section, n: i32) -> Result<Vec<(Mono, Section)>, RescaleError> {
        if n > self.trunc {
            return Err(RescaleError::Truncation { requested: n, max: self.trunc });
        }
        let b = &self.bundle;
        let ys = b.ys();
        let mut rho = self.trunc_sec(s, n);
        let mut out = Vec::new();
        for d in 0..n {
            let mut by_mono: BTreeMap<Mono, Section> = BTreeMap::new();
            for (i, p) in rho.iter().enumerate() {
                for (m, c) in p.homogeneous_part(ys.clone(), d).terms() {
                    let ym: Mono = m[ys.clone()].to_vec();
                    let mut rest = m.clone();
                    for e in &mut rest[ys.clone()] {
                        *e = 0;
                    }
                    let entry = by_mono.entry(ym).or_insert_with(|| sec_zero(self.shape(), b.rank()));
                    entry[i].add_term(rest, c.clone());
                }
            }
            for (ym, c) in by_mono {
                let ext = self.synchronous_extension(&c, n - d);
                let mut yi = PolyFn::one(self.shape());
                for (j, e) in ym.iter().enumerate() {
                    yi = yi.shift(b.l + j, *e);
                }
                rho = sec_sub(&rho, &self.trunc_sec(&sec_mul_poly(&ext, &yi), n));
                out.push((ym, ext));
            }
        }
        debug_assert!(rho.iter().all(|p| p.min_degree_in(b.ys()).map_or(true, |o| o >= n)));
        Ok(out)
    }

    /// `o^t(σ) = min_I (|I| − o^f(σ_I))`.
    pub fn taylor_order(&self, s: &Section) -> Result<OrderResult, RescaleError> {
        self.taylor_order_at(s, self.trunc)
    }

    pub fn taylor_order_at(&self, s: &Section, n: i32) -> Result<OrderResult, RescaleError> {
        if sec_is_zero(s) {
            return Ok(OrderResult { order: Order::PosInf, conclusive: true });
        }
        let coeffs = self.taylor_expand(s, n)?;
        let mut best = Order::PosInf;
        for (ym, c) in &coeffs {
            let of = self.bundle.filtration_order(c);
            if let Order::Fin(f) = of {
                best = best.min(Order::Fin(ym.iter().sum::<i32>() - f));
            }
        }
        let tail = n - self.bundle.max_grade();
        let conclusive = matches!(best, Order::Fin(v) if v <= tail);
        Ok(OrderResult { order: best, conclusive })
    }

    /// Brute-force `min_D (o^g(D) − o^f(Dσ))` over `D = E_ab ∇^α_y`, `|α| ≤ op_bound`.
    pub fn scaling_order_bruteforce(&self, s: &Section, op_bound: i32) -> OrderResult {
        if sec_is_zero(s) {
            return OrderResult { order: Order::PosInf, conclusive: true };
        }
        let b = &self.bundle;
        let r = b.rank();
        let mut best = Order::PosInf;
        let mut stack: Vec<(usize, i32, Section)> = vec![(b.k, 0, s.clone())];
        // Words ∇_{y_1}^{α_1}⋯∇_{y_k}^{α_k}: the rightmost factor acts first.
        while let Some((level, used, tau)) = stack.pop() {
            if level == 0 {
                let rest = self.trunc_sec(&tau, 1);
                for bb in 0..r {
                    let rb = b.restrict(&rest[bb]);
                    if rb.is_zero() {
                        continue;
                    }
                    let xdeg = rb.terms().keys().map(|m| b.lie_deg(m)).max().unwrap_or(0);
                    for a in 0..r {
                        let of = b.q[a] + b.lie_weight * xdeg;
                        best = best.min(Order::Fin(b.g(a, bb) + used - of));
                    }
                }
                continue;
            }
            let dir = b.l + level - 1;
            let mut cur = tau;
            let mut u = used;
            loop {
                stack.push((level - 1, u, cur.clone()));
                if u == op_bound {
                    break;
                }
                let remaining = op_bound - u;
                cur = self.trunc_sec(&self.nabla(dir, &cur), remaining);
                u += 1;
                if sec_is_zero(&cur) {
                    break;
                }
            }
        }
        let bound = op_bound + 1 - b.max_grade();
        let conclusive = matches!(best, Order::Fin(v) if v <= bound);
        OrderResult { order: best, conclusive }
    }

    pub fn apply(&self, d: &DiffOp, s: &Section) -> Section {
        let mut out = sec_zero(self.shape(), self.rank());
        for (phi, w) in &d.terms {
            let mut tau = s.clone();
            for &i in w.iter().rev() {
                tau = self.nabla(i, &tau);
            }
            out = sec_add(&out, &phi.apply(&tau));
        }
        out
    }

    /// `∇_{w} ψ` rewritten as `Σ ψ' ∇_{w'}`.
    fn push_through(&self, w: &[usize], psi: &Mat<PolyFn>) -> Vec<(Mat<PolyFn>, Vec<usize>)> {
        if psi.is_zero() {
            return Vec::new();
        }
        let Some((&last, rest)) = w.split_last() else {
            return vec![(psi.clone(), Vec::new())];
        };
        let mut out = self.push_through(rest, &self.end_nabla(last, psi));
        for (p, mut word) in self.push_through(rest, psi) {
            word.push(last);
            out.push((p, word));
        }
        out
    }

    /// Normal form of `D₁ ∘ D₂`.
    pub fn compose(&self, d1: &DiffOp, d2: &DiffOp) -> DiffOp {
        let mut terms = Vec::new();
        for (phi, w) in &d1.terms {
            for (psi, v) in &d2.terms {
                for (p, mut word) in self.push_through(w, psi) {
                    let coef = phi.mul(&p);
                    if coef.is_zero() {
                        continue;
                    }
                    word.extend_from_slice(v);
                    terms.push((coef, word));
                }
            }
        }
        DiffOp { terms }
    }

    pub fn getzler_order(&self, d: &DiffOp) -> Result<Order, RescaleError> {
        let mut best = Order::NegInf;
        for (phi, w) in &d.terms {
            best = best.max(self.bundle.end_order(phi)?.plus(w.len() as i32));
        }
        Ok(best)
    }

    /// `o^sc(s_p) ≥ p` for every `p`.
    pub fn membership(&self, s: &LaurentSection) -> Result<bool, RescaleError> {
        for (p, sp) in &s.terms {
            let o = self.taylor_order(sp)?;
            if !o.conclusive && o.order != Order::PosInf {
                if o.order < Order::Fin(*p) {
                    return Ok(false);
                }
                return Err(RescaleError::Inconclusive);
            }
            if o.order < Order::Fin(*p) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn point_subs(&self, v: &[Scalar]) -> Vec<(usize, Scalar)> {
        v.iter().cloned().enumerate().collect()
    }

    /// `Σ_p s_p(v) λ^{−p}` on a fiber `t = λ ≠ 0`.
    pub fn eval_generic(&self, s: &LaurentSection, v: &[Scalar], lambda: &Q) -> Result<Section, RescaleError> {
        use num_traits::Zero;
        let b = &self.bundle;
        if lambda.is_zero() {
            return Err(RescaleError::Shape("λ = 0 belongs to the zero fiber".into()));
        }
        if v.len() != b.l + b.k {
            return Err(RescaleError::Shape(format!("point with {} coordinates", v.len())));
        }
        let subs = self.point_subs(v);
        let lam = Scalar::from_q(lambda.clone());
        let mut out = sec_zero(self.shape(), b.rank());
        for (p, sp) in &s.terms {
            let w = lam.pow(-p).expect("unit");
            out = sec_add(&out, &sp.iter().map(|c| c.subs(&subs).scale(&w)).collect::<Vec<_>>());
        }
        Ok(out)
    }

    /// Value at `(m, y = 0)` of a section.
    fn at_base(&self, s: &Section, m: &[Scalar]) -> Section {
        let subs: Vec<(usize, Scalar)> = m.iter().cloned().enumerate().collect();
        s.iter().map(|p| self.bundle.restrict(p).subs(&subs)).collect()
    }

    /// Zero-fiber evaluation `ε_{X_m}(s) = ε_m(exp(t∇_X) s)`:
    /// `Σ_{p,j} (1/j!) ⟨(∇_X^j s_p)(m)⟩_{j−p}`.
    pub fn eval_section_zero(&self, s: &LaurentSection, m: &[Scalar], normal: &Normal) -> Result<Section, RescaleError> {
        let b = &self.bundle;
        if m.len() != b.l {
            return Err(RescaleError::Shape(format!("base point with {} coordinates", m.len())));
        }
        let mut field = vec![PolyFn::zero(self.shape()); b.l + b.k];
        for j in 0..b.k {
            field[b.l + j] = match normal {
                Normal::Symbolic => b.eta(j),
                Normal::Fixed(v) => PolyFn::constant(self.shape(), v[j].clone()),
            };
        }
        let top = b.max_grade();
        let mut out = sec_zero(self.shape(), b.rank());
        for (p, sp) in &s.terms {
            let jmax = top + p;
            if jmax < 0 {
                continue;
            }
            let mut tau = self.trunc_sec(sp, jmax + 1);
            for j in 0..=jmax {
                let grade = j - p;
                let val = self.at_base(&tau, m);
                let scale = Scalar::from_q(factorial(j).recip());
                for (i, c) in val.iter().enumerate() {
                    for (mono, coef) in c.terms() {
                        let deg = b.q[i] + b.lie_weight * b.lie_deg(mono);
                        if deg > grade {
                            return Err(RescaleError::NotMember(format!("∇_X^{j} s_{p} has degree {deg} above {grade} in component {i}")));
                        }
                        if deg == grade {
                            out[i].add_term(mono.clone(), coef * &scale);
                        }
                    }
                }
                if j < jmax {
                    tau = self.trunc_sec(&self.nabla_along(&field, &tau), jmax - j);
                }
            }
        }
        Ok(out)
    }

    fn flatten(&self, vals: &[Section]) -> Mat<Scalar> {
        let mut keys: BTreeMap<(usize, Mono), usize> = BTreeMap::new();
        for v in vals {
            for (i, p) in v.iter().enumerate() {
                for m in p.terms().keys() {
                    let n = keys.len();
                    keys.entry((i, m.clone())).or_insert(n);
                }
            }
        }
        let cols = keys.len().max(1);
        let mut mat = Mat::zeros(vals.len(), cols, &Scalar::zero());
        for (row, v) in vals.iter().enumerate() {
            for (i, p) in v.iter().enumerate() {
                for (m, c) in p.terms() {
                    mat.set(row, keys[&(i, m.clone())], c.clone());
                }
            }
        }
        mat
    }

    /// Evaluated frame vectors are independent at every sample point.
    pub fn frame_rank_test(&self, frame: &[LaurentSection], points: &[DncPoint]) -> Result<bool, RescaleError> {
        for pt in points {
            let vals: Vec<Section> = match pt {
                DncPoint::Generic { v, lambda } => frame.iter().map(|s| self.eval_generic(s, v, lambda)).collect::<Result<_, _>>()?,
                DncPoint::Zero { m, normal } => frame.iter().map(|s| self.eval_section_zero(s, m, &Normal::Fixed(normal.clone()))).collect::<Result<_, _>>()?,
            };
            if rank(&self.flatten(&vals)) < frame.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `{ẽ_i t^{q_i}}`: synchronous extensions of the frame.
    pub fn standard_frame(&self) -> Vec<LaurentSection> {
        (0..self.rank()).map(|i| LaurentSection::monomial(self.synchronous_extension(&self.bundle.frame(i), self.trunc), self.bundle.q[i])).collect()
    }
}

/// Frame bookkeeping for `Cl(n) ⊗ Mat_r`: index `(I, a, b) ↦ I·r² + a·r + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliffordModel {
    pub n: usize,
    pub r: usize,
}

impl CliffordModel {
    pub fn rank(&self) -> usize {
        (1 << self.n) * self.r * self.r
    }

    pub fn index(&self, mask: u32, a: usize, b: usize) -> usize {
        mask as usize * self.r * self.r + a * self.r + b
    }

    pub fn degrees(&self) -> Vec<i32> {
        (0..self.rank()).map(|i| (i / (self.r * self.r)).count_ones() as i32).collect()
    }

    /// Bundle over `V = T_mM ≅ ℝⁿ` (`l = 0`) with `d` Lie parameters.
    pub fn bundle(&self, lie_dim: usize, j: u32) -> FilteredBundle {
        FilteredBundle { l: 0, k: self.n, q: self.degrees(), end: EndFilt::CliffordLeft { n: self.n, r: self.r }, lie_dim, j, lie_weight: 2 }
    }

    pub fn to_section(&self, t: &Mat<Multivector>) -> Section {
        let shape = t.get(0, 0).shape;
        let mut s = sec_zero(shape, self.rank());
        for a in 0..self.r {
            for b in 0..self.r {
                for (mask, p) in t.get(a, b).terms() {
                    s[self.index(*mask, a, b)] = p.clone();
                }
            }
        }
        s
    }

    pub fn from_section(&self, s: &Section, tag: Algebra) -> Mat<Multivector> {
        let shape = s[0].shape;
        let z = Multivector::zero(self.n, tag, shape);
        let mut t = Mat::zeros(self.r, self.r, &z);
        for mask in 0..(1u32 << self.n) {
            for a in 0..self.r {
                for b in 0..self.r {
                    let p = &s[self.index(mask, a, b)];
                    if !p.is_zero() {
                        t.get_mut(a, b).add_blade(mask, p);
                    }
                }
            }
        }
        t
    }

    fn unit(&self, shape: Shape, mask: u32, a: usize, b: usize) -> Mat<Multivector> {
        let z = Multivector::zero(self.n, Algebra::Clifford, shape);
        let mut t = Mat::zeros(self.r, self.r, &z);
        t.set(a, b, Multivector::const_blade(self.n, Algebra::Clifford, shape, mask, Scalar::one()));
        t
    }

    fn matrix_of(&self, shape: Shape, f: impl Fn(&Mat<Multivector>) -> Mat<Multivector>) -> Mat<PolyFn> {
        let n = self.rank();
        let mut m = Mat::zeros(n, n, &PolyFn::zero(shape));
        for mask in 0..(1u32 << self.n) {
            for a in 0..self.r {
                for b in 0..self.r {
                    let col = self.to_section(&f(&self.unit(shape, mask, a, b)));
                    let c = self.index(mask, a, b);
                    for (row, p) in col.into_iter().enumerate() {
                        if !p.is_zero() {
                            m.set(row, c, p);
                        }
                    }
                }
            }
        }
        m
    }

    /// Left multiplication `L(φ)` by an element of `Cl(n) ⊗ Mat_r`.
    pub fn left(&self, phi: &Mat<Multivector>) -> Mat<PolyFn> {
        let shape = phi.get(0, 0).shape;
        self.matrix_of(shape, |u| phi.mul(u))
    }

    /// Right multiplication by a twisting matrix.
    pub fn right_matrix(&self, m: &Mat<PolyFn>) -> Mat<PolyFn> {
        let shape = m.get(0, 0).shape;
        let mm = self.twist(m);
        self.matrix_of(shape, |u| u.mul(&mm))
    }

    /// Right Clifford multiplication by `e_i`.
    pub fn right_clifford(&self, shape: Shape, i: usize) -> Mat<PolyFn> {
        let e = self.clifford_gen(shape, i);
        self.matrix_of(shape, |u| u.mul(&e))
    }

    /// `e_i ⊗ 1`.
    pub fn clifford_gen(&self, shape: Shape, i: usize) -> Mat<Multivector> {
        Mat::diag_const(self.r, &Multivector::gen(self.n, Algebra::Clifford, shape, i))
    }

    /// `1 ⊗ M`.
    pub fn twist(&self, m: &Mat<PolyFn>) -> Mat<Multivector> {
        m.map(|p| Multivector::scalar(self.n, Algebra::Clifford, p.clone()))
    }

    /// Constant Clifford element `a ⊗ 1`.
    pub fn clifford_scalar(&self, a: &Multivector) -> Mat<Multivector> {
        Mat::diag_const(self.r, a)
    }

    /// Radial-gauge connection `A_j = ½ Σ_i y^i K_ij` with
    /// `K_ij = L(q(Ω_ij)) + L(1 ⊗ F_ij)`.
    pub fn fock_schwinger(&self, bundle: &FilteredBundle, omega: &[Vec<Multivector>], twist: &[Vec<Mat<PolyFn>>]) -> Vec<Mat<PolyFn>> {
        let shape = bundle.shape();
        let n = self.n;
        let mut out = vec![Mat::zeros(self.rank(), self.rank(), &PolyFn::zero(shape)); n];
        for j in 0..n {
            for i in 0..n {
                let mut kij = self.clifford_scalar(&omega[i][j].retag(Algebra::Clifford));
                kij = kij.add(&self.twist(&twist[i][j]));
                let lk = self.left(&kij);
                let yi = bundle.y(i).scale(&Scalar::ratio(1, 2));
                out[j] = out[j].add(&lk.map(|p| p * &yi));
            }
        }
        out
    }

    /// `Σ_p Σ_β t^{−n−p−w|β|} str(s_p(m))_β X^β` as a Laurent polynomial in
    /// `t` (chart variable 0) and the Lie parameters.
    pub fn str_t(&self, ctx: &Rescaled, s: &LaurentSection) -> Result<PolyFn, RescaleError> {
        let b = &ctx.bundle;
        if self.n % 2 == 1 || b.k != self.n || b.l != 0 {
            return Err(RescaleError::NotClifford);
        }
        let c = berezin_constant(self.n).map_err(|_| RescaleError::NotClifford)?;
        let ts = Shape::new(1, b.lie_dim, b.j);
        let mut out = PolyFn::zero(ts);
        for (p, sp) in &s.terms {
            let val = ctx.at_base(sp, &[]);
            let tw = self.from_section(&val, Algebra::Clifford);
            for a in 0..self.r {
                let top = tw.get(a, a).top();
                for (m, coef) in top.terms() {
                    if m[..b.l + 2 * b.k].iter().any(|&e| e != 0) {
                        return Err(RescaleError::Shape("value at the base point depends on η".into()));
                    }
                    let beta = &m[b.l + 2 * b.k..];
                    let w = beta.iter().sum::<i32>() * b.lie_weight;
                    let mut mono = vec![-(self.n as i32) - p - w];
                    mono.extend_from_slice(beta);
                    out.add_term(mono, coef * &c);
                }
            }
        }
        Ok(out)
    }
}

/// `c(v) = v∧ − ι_v` on `Λℝⁿ` in the mask basis.
pub fn clifford_on_forms(shape: Shape, n: usize, v: &[PolyFn]) -> Mat<PolyFn> {
    let dim = 1usize << n;
    let mut m = Mat::zeros(dim, dim, &PolyFn::zero(shape));
    for col in 0..dim as u32 {
        let basis = Multivector::const_blade(n, Algebra::Exterior, shape, col, Scalar::one());
        let vv = Multivector::vector(n, Algebra::Exterior, v);
        let w = &(&vv * &basis) - &basis.contract(v);
        for (mask, p) in w.terms() {
            m.set(*mask as usize, col as usize, p.clone());
        }
    }
    m
}

/// Deformation term of the Witten/Novikov operator.
#[derive(Clone, Debug)]
pub enum Deformation {
    /// `c(df)`.
    Function(PolyFn),
    /// `c(ω)` for a one-form given by its components.
    OneForm(Vec<PolyFn>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittenReport {
    pub member: bool,
    /// `(p, component, offending coefficient)` when membership fails.
    pub witness: Option<(i32, usize, String)>,
}

/// Applies `t(d + d* + t^{−2}c(ω))` on the trivially filtered bundle `Λℝ^{l+k}`
/// and tests whether the image stays in the rescaled module.
pub fn witten_membership(ctx: &Rescaled, def: &Deformation, s: &LaurentSection) -> Result<WittenReport, RescaleError> {
    let b = &ctx.bundle;
    let n = b.l + b.k;
    if b.rank() != 1 << n || b.q.iter().any(|&q| q != 0) {
        return Err(RescaleError::Shape("needs the trivially filtered exterior bundle".into()));
    }
    let shape = b.shape();
    let omega: Vec<PolyFn> = match def {
        Deformation::Function(f) => (0..n).map(|i| f.deriv(i)).collect(),
        Deformation::OneForm(w) => w.clone(),
    };
    let cw = clifford_on_forms(shape, n, &omega);
    let cdz: Vec<Mat<PolyFn>> = (0..n)
        .map(|i| {
            let mut v = vec![PolyFn::zero(shape); n];
            v[i] = PolyFn::one(shape);
            clifford_on_forms(shape, n, &v)
        })
        .collect();
    let mut image = LaurentSection::new();
    for (p, sp) in &s.terms {
        let mut dirac = sec_zero(shape, b.rank());
        for (i, c) in cdz.iter().enumerate() {
            dirac = sec_add(&dirac, &c.apply(&ctx.nabla(i, sp)));
        }
        image.add(p - 1, dirac);
        image.add(p + 1, cw.apply(sp));
    }
    for (p, sp) in &image.terms {
        let o = ctx.taylor_order(sp)?;
        if o.order < Order::Fin(*p) {
            let (i, c) = sp.iter().enumerate().find(|(_, c)| b.restrict(c).min_degree_in(b.ys()).is_some() && c.min_degree_in(b.ys()).unwrap_or(i32::MAX) < *p).map(|(i, c)| (i, c.to_string())).unwrap_or((0, String::new()));
            return Ok(WittenReport { member: false, witness: Some((*p, i, c)) });
        }
        if !o.conclusive && o.order != Order::PosInf {
            return Err(RescaleError::Inconclusive);
        }
    }
    Ok(WittenReport { member: true, witness: None })
}

pub mod gen {
    use super::*;
    use rand::Rng;

    fn small<R: Rng>(rng: &mut R) -> Scalar {
        Scalar::ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2))
    }

    pub fn bundle<R: Rng>(rng: &mut R) -> FilteredBundle {
        let l = rng.gen_range(0..=2);
        let k = rng.gen_range(1..=2);
        let r = rng.gen_range(1..=3);
        let q = (0..r).map(|_| rng.gen_range(0..=2)).collect();
        FilteredBundle::elementary(l, k, q)
    }

    /// Polynomial in `x, y` with `y`-degree ≤ `ydeg` and `x`-degree ≤ `xdeg`.
    pub fn poly<R: Rng>(rng: &mut R, b: &FilteredBundle, ydeg: i32, xdeg: i32, terms: usize) -> PolyFn {
        let s = b.shape();
        let mut p = PolyFn::zero(s);
        for _ in 0..terms {
            let mut m = vec![0; s.nvars()];
            for _ in 0..rng.gen_range(0..=ydeg) {
                m[b.l + rng.gen_range(0..b.k)] += 1;
            }
            if b.l > 0 {
                for _ in 0..rng.gen_range(0..=xdeg) {
                    m[rng.gen_range(0..b.l)] += 1;
                }
            }
            p.add_term(m, small(rng));
        }
        p
    }

    /// Connection with `(A_i)_{ab} ≠ 0` only when `q_a ≤ q_b`.
    pub fn connection<R: Rng>(rng: &mut R, b: &FilteredBundle) -> Vec<Mat<PolyFn>> {
        let r = b.rank();
        let z = PolyFn::zero(b.shape());
        (0..b.l + b.k)
            .map(|_| {
                Mat::from_fn(r, r, |x, y| if b.q[x] <= b.q[y] && rng.gen_bool(0.4) { poly(rng, b, 1, 1, 2) } else { z.clone() })
            })
            .collect()
    }

    pub fn section<R: Rng>(rng: &mut R, b: &FilteredBundle, ydeg: i32) -> Section {
        (0..b.rank())
            .map(|_| {
                if rng.gen_bool(0.7) {
                    let n = rng.gen_range(1..=3);
                    poly(rng, b, ydeg, 1, n)
                } else {
                    PolyFn::zero(b.shape())
                }
            })
            .collect()
    }

    pub fn endo<R: Rng>(rng: &mut R, b: &FilteredBundle) -> Mat<PolyFn> {
        let r = b.rank();
        let z = PolyFn::zero(b.shape());
        Mat::from_fn(r, r, |_, _| if rng.gen_bool(0.5) { poly(rng, b, 1, 1, 1) } else { z.clone() })
    }

    pub fn diffop<R: Rng>(rng: &mut R, b: &FilteredBundle) -> DiffOp {
        let n = b.l + b.k;
        let terms = (0..rng.gen_range(1..=2))
            .map(|_| {
                let w: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..n)).collect();
                (endo(rng, b), w)
            })
            .collect();
        DiffOp { terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn flat(q: Vec<i32>, l: usize, k: usize) -> Rescaled {
        Rescaled::flat(FilteredBundle::elementary(l, k, q), 8).unwrap()
    }

    #[test]
    fn filtration_order_examples() {
        let c = flat(vec![1, 2], 1, 1);
        let b = &c.bundle;
        let s = b.shape();
        assert_eq!(b.filtration_order(&b.frame(0)), Order::Fin(1));
        assert_eq!(b.filtration_order(&vec![b.y(0), PolyFn::zero(s)]), Order::NegInf);
        assert_eq!(b.filtration_order(&vec![PolyFn::one(s), b.x(0)]), Order::Fin(2));
    }

    #[test]
    fn taylor_examples() {
        let c = flat(vec![0], 0, 2);
        let b = &c.bundle;
        let t = c.taylor_expand(&vec![b.y(0)], 4).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].0, vec![1, 0]);
        let s = &PolyFn::one(b.shape()) + &b.y(0);
        assert_eq!(c.taylor_expand(&vec![s], 4).unwrap().len(), 2);
        assert_eq!(c.taylor_order(&vec![b.y(0)]).unwrap().order, Order::Fin(1));
        let c2 = flat(vec![2], 0, 1);
        assert_eq!(c2.taylor_order(&c2.bundle.frame(0)).unwrap().order, Order::Fin(-2));
        assert_eq!(c2.taylor_order(&vec![PolyFn::zero(c2.shape())]).unwrap().order, Order::PosInf);
        assert!(matches!(c.taylor_expand(&vec![b.y(0)], 9), Err(RescaleError::Truncation { .. })));
    }

    #[test]
    fn taylor_with_curved_connection() {
        // A = y₁ dy₁ · E_12 on q = (0, 0), σ = e₁.
        let b = FilteredBundle::elementary(0, 2, vec![0, 0]);
        let s = b.shape();
        let z = PolyFn::zero(s);
        let mut a0 = Mat::zeros(2, 2, &z);
        a0.set(0, 1, b.y(0));
        let c = Rescaled::new(b.clone(), vec![a0, Mat::zeros(2, 2, &z)], 8).unwrap();
        let sigma = b.frame(1);
        let coeffs = c.taylor_expand(&sigma, 6).unwrap();
        let mut resum = sec_zero(s, 2);
        for (ym, si) in &coeffs {
            let mut yi = PolyFn::one(s);
            for (j, e) in ym.iter().enumerate() {
                yi = yi.shift(j, *e);
            }
            let rad = sec_add(&sec_mul_poly(&c.nabla(0, si), &b.y(0)), &sec_mul_poly(&c.nabla(1, si), &b.y(1)));
            assert!(c.trunc_sec(&rad, 6).iter().all(|p| p.is_zero()), "coefficient is not synchronous");
            resum = sec_add(&resum, &c.trunc_sec(&sec_mul_poly(si, &yi), 6));
        }
        let diff = sec_sub(&sigma, &resum);
        assert!(diff.iter().all(|p| p.min_degree_in(b.ys()).map_or(true, |o| o >= 6)));
    }

    #[test]
    fn bruteforce_examples() {
        let c = flat(vec![0], 0, 1);
        let r = c.scaling_order_bruteforce(&vec![c.bundle.y(0)], 3);
        assert_eq!(r, OrderResult { order: Order::Fin(1), conclusive: true });
        let c2 = flat(vec![2], 0, 1);
        assert_eq!(c2.scaling_order_bruteforce(&c2.bundle.frame(0), 3).order, Order::Fin(-2));
        let r0 = c.scaling_order_bruteforce(&vec![c.bundle.y(0)], 0);
        assert!(!r0.conclusive);
    }

    #[test]
    fn rejects_bad_connection() {
        let b = FilteredBundle::elementary(1, 1, vec![0, 1]);
        let z = PolyFn::zero(b.shape());
        let mut a0 = Mat::zeros(2, 2, &z);
        a0.set(1, 0, PolyFn::one(b.shape()));
        let err = Rescaled::new(b.clone(), vec![a0, Mat::zeros(2, 2, &z)], 8).unwrap_err();
        assert!(matches!(err, RescaleError::Condition { which: 1, .. }));
    }

    #[test]
    fn zero_fiber_examples() {
        let c = flat(vec![0], 0, 1);
        let b = &c.bundle;
        let s = LaurentSection::monomial(vec![b.y(0)], -1);
        let a = Scalar::ratio(3, 2);
        let v = c.eval_section_zero(&s, &[], &Normal::Fixed(vec![a.clone()])).unwrap();
        assert_eq!(v[0].as_constant(), Some(a));
        let c2 = flat(vec![1, 2], 1, 1);
        let frame = c2.standard_frame();
        let m = [Scalar::int(2)];
        let v0 = c2.eval_section_zero(&frame[0], &m, &Normal::Symbolic).unwrap();
        assert_eq!(v0, c2.bundle.frame(0));
        let lam = Q::from_integer(2.into());
        let g = c2.eval_generic(&frame[1], &[Scalar::int(1), Scalar::int(3)], &lam).unwrap();
        assert_eq!(g[1].as_constant(), Some(Scalar::int(4)));
    }

    #[test]
    fn frame_rank_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c = flat(vec![0, 1, 2], 1, 1);
        let mut pts = Vec::new();
        for i in 0..20 {
            let sc = |rng: &mut rand_chacha::ChaCha8Rng| Scalar::ratio(rand::Rng::gen_range(rng, -5..=5), 3);
            if i % 2 == 0 {
                pts.push(DncPoint::Generic { v: vec![sc(&mut rng), sc(&mut rng)], lambda: Q::new(((i % 5) + 1).into(), 7.into()) });
            } else {
                pts.push(DncPoint::Zero { m: vec![sc(&mut rng)], normal: vec![sc(&mut rng)] });
            }
        }
        let frame = c.standard_frame();
        assert!(c.frame_rank_test(&frame, &pts).unwrap());
        assert!(!c.frame_rank_test(&[frame[0].clone(), frame[0].clone()], &pts).unwrap());
        let e0 = c.synchronous_extension(&c.bundle.frame(0), 8);
        let wrong = LaurentSection::monomial(e0, 1);
        assert!(!c.frame_rank_test(&[wrong], &pts).unwrap());
    }

    #[test]
    fn witten_examples() {
        let b = FilteredBundle::elementary(1, 1, vec![0; 4]);
        let c = Rescaled::flat(b.clone(), 8).unwrap();
        let y = b.y(0);
        let gens: Vec<LaurentSection> = (0..4).map(|i| LaurentSection::monomial(b.frame(i), 0)).collect();
        for g in &gens {
            assert!(witten_membership(&c, &Deformation::Function(&y * &y), g).unwrap().member);
            let bad = witten_membership(&c, &Deformation::Function(y.clone()), g).unwrap();
            assert!(!bad.member && bad.witness.is_some());
            let w = vec![PolyFn::zero(b.shape()), y.scale(&Scalar::int(2))];
            assert!(witten_membership(&c, &Deformation::OneForm(w), g).unwrap().member);
        }
    }

    #[test]
    fn clifford_model_is_valid() {
        let cm = CliffordModel { n: 2, r: 2 };
        let b = cm.bundle(1, 1);
        b.validate().unwrap();
        let s = b.shape();
        let e12 = Multivector::const_blade(2, Algebra::Exterior, s, 0b11, Scalar::one());
        let z = Multivector::zero(2, Algebra::Exterior, s);
        let omega = vec![vec![z.clone(), e12.clone()], vec![-&e12, z.clone()]];
        let mut f = Mat::zeros(2, 2, &PolyFn::zero(s));
        f.set(0, 1, PolyFn::one(s));
        let zf = Mat::zeros(2, 2, &PolyFn::zero(s));
        let twist = vec![vec![zf.clone(), f.clone()], vec![f.neg(), zf.clone()]];
        let a = cm.fock_schwinger(&b, &omega, &twist);
        let c = Rescaled::new(b.clone(), a, 6).unwrap();
        assert_eq!(b.end_order(&cm.right_clifford(s, 0)), Err(RescaleError::NotInAlgebra));
        assert_eq!(b.end_order(&cm.left(&cm.clifford_gen(s, 1))).unwrap(), Order::Fin(1));
        let _ = c;
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn scaling_equals_taylor(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b = gen::bundle(&mut rng);
            let a = gen::connection(&mut rng, &b);
            let c = Rescaled::new(b.clone(), a, 8).unwrap();
            let s = gen::section(&mut rng, &b, 4);
            let t = c.taylor_order(&s).unwrap();
            let bf = c.scaling_order_bruteforce(&s, 6);
            prop_assert!(t.conclusive && bf.conclusive);
            prop_assert_eq!(t.order, bf.order);
        }

        #[test]
        fn order_lemmas(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b = gen::bundle(&mut rng);
            let a = gen::connection(&mut rng, &b);
            let c = Rescaled::new(b.clone(), a, 8).unwrap();
            let d1 = gen::diffop(&mut rng, &b);
            let d2 = gen::diffop(&mut rng, &b);
            let o12 = c.getzler_order(&c.compose(&d1, &d2)).unwrap();
            let (o1, o2) = (c.getzler_order(&d1).unwrap(), c.getzler_order(&d2).unwrap());
            if let (Order::Fin(x), Order::Fin(y)) = (o1, o2) {
                prop_assert!(o12 <= Order::Fin(x + y));
            }
            let s = gen::section(&mut rng, &b, 3);
            let lhs = c.apply(&c.compose(&d1, &d2), &s);
            let rhs = c.apply(&d1, &c.apply(&d2, &s));
            prop_assert_eq!(lhs, rhs);
            let phi = gen::endo(&mut rng, &b);
            prop_assert!(b.end_filtration_order(&phi) <= b.end_order(&phi).unwrap());
        }
    }
}
