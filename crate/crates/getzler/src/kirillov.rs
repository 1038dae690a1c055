//! Numeric Kirillov check on the round two-sphere with the rotation action
//! about the `z`-axis and the Dolbeault operator twisted by `O(k)`.
//!
//! Chart `North` is stereographic projection from the south pole,
//! `(u, v) = (x, y)/(1 + z)`; chart `South` is `(u, v) = (x, −y)/(1 − z)`, so
//! both are oriented. In either chart `vol = φ du∧dv` with `φ = 4/(1+r²)²`.
//! For `X = s·X₀` the equivariant curvatures are
//! `R_g = −(vol + s z)·J₀` on `TM` and `F_g = −i(k+1)/2·(vol + s z)` on
//! `E/S = K^{−1/2} ⊗ O(k)`.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KirillovError {
    #[error("invalid quadrature config: {0}")]
    Config(String),
    #[error("point ({0}, {1}) is outside the chart")]
    OutsideChart(f64, f64),
    #[error("twist degree {0} is negative")]
    NegativeDegree(i64),
    #[error("quadrature did not converge: estimate {estimate:e} above {tolerance:e}")]
    NotConverged { estimate: f64, tolerance: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    North,
    South,
}

/// Largest chart radius accepted by the pointwise evaluators.
pub const CHART_RADIUS: f64 = 10.0;

/// Shift of the weight ladder; fixed by [`calibrate_weight_shift`].
pub const WEIGHT_SHIFT: f64 = 0.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub order: usize,
    pub subdivisions: usize,
    /// Half-width `a` of the overlap band `|z| < a` of the partition of unity.
    pub overlap: f64,
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { order: 20, subdivisions: 6, overlap: 0.5, tolerance: 1e-8 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), KirillovError> {
        if self.order < 2 {
            return Err(KirillovError::Config("order must be at least 2".into()));
        }
        if self.subdivisions == 0 {
            return Err(KirillovError::Config("subdivisions must be positive".into()));
        }
        if !(self.overlap > 0.0 && self.overlap < 0.95) {
            return Err(KirillovError::Config("overlap must lie in (0, 0.95)".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(KirillovError::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Unit sphere with the rotation about the `z`-axis.
#[derive(Clone, Copy, Debug, Default)]
pub struct GeometryModel;

fn sign(c: Chart) -> f64 {
    match c {
        Chart::North => 1.0,
        Chart::South => -1.0,
    }
}

impl GeometryModel {
    fn check(&self, u: f64, v: f64) -> Result<f64, KirillovError> {
        let r2 = u * u + v * v;
        if !r2.is_finite() || r2 > CHART_RADIUS * CHART_RADIUS {
            return Err(KirillovError::OutsideChart(u, v));
        }
        Ok(r2)
    }

    pub fn to_sphere(&self, c: Chart, u: f64, v: f64) -> Result<[f64; 3], KirillovError> {
        let r2 = self.check(u, v)?;
        let d = 1.0 + r2;
        let e = sign(c);
        Ok([2.0 * u / d, e * 2.0 * v / d, e * (1.0 - r2) / d])
    }

    pub fn from_sphere(&self, c: Chart, p: [f64; 3]) -> Option<(f64, f64)> {
        let e = sign(c);
        let den = 1.0 + e * p[2];
        if den.abs() < 1e-12 {
            return None;
        }
        Some((p[0] / den, e * p[1] / den))
    }

    /// `φ = 4/(1+r²)²`, so `g = φ(du² + dv²)` and `vol = φ du∧dv`.
    pub fn conformal(&self, u: f64, v: f64) -> Result<f64, KirillovError> {
        let r2 = self.check(u, v)?;
        Ok(4.0 / ((1.0 + r2) * (1.0 + r2)))
    }

    pub fn height(&self, c: Chart, u: f64, v: f64) -> Result<f64, KirillovError> {
        Ok(self.to_sphere(c, u, v)?[2])
    }

    /// `X₀^M` in chart coordinates.
    pub fn action(&self, c: Chart, u: f64, v: f64) -> Result<[f64; 2], KirillovError> {
        self.check(u, v)?;
        let e = sign(c);
        Ok([-e * v, e * u])
    }

    /// `θ = g(X₀^M, ·)`.
    pub fn theta(&self, c: Chart, u: f64, v: f64) -> Result<[f64; 2], KirillovError> {
        let phi = self.conformal(u, v)?;
        let x = self.action(c, u, v)?;
        Ok([phi * x[0], phi * x[1]])
    }

    /// Coefficient of `du∧dv` in `dθ`, from the closed form of `θ`.
    pub fn dtheta(&self, c: Chart, u: f64, v: f64) -> Result<f64, KirillovError> {
        let r2 = self.check(u, v)?;
        let phi = 4.0 / ((1.0 + r2) * (1.0 + r2));
        let dphi = -8.0 / (1.0 + r2).powi(3);
        Ok(sign(c) * (2.0 * phi + 2.0 * r2 * dphi))
    }

    /// `μ^M = −∇X₀^M` as a matrix `μ^i_j`, from the Christoffel symbols of the
    /// conformal metric.
    pub fn moment_matrix(&self, c: Chart, u: f64, v: f64) -> Result<[[f64; 2]; 2], KirillovError> {
        let r2 = self.check(u, v)?;
        let lam = [-2.0 * u / (1.0 + r2), -2.0 * v / (1.0 + r2)];
        let xm = self.action(c, u, v)?;
        let e = sign(c);
        let dx = [[0.0, -e], [e, 0.0]];
        let gamma = |i: usize, j: usize, k: usize| {
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            d(i, j) * lam[k] + d(i, k) * lam[j] - d(j, k) * lam[i]
        };
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut cov = dx[i][j];
                for k in 0..2 {
                    cov += gamma(i, j, k) * xm[k];
                }
                m[i][j] = -cov;
            }
        }
        Ok(m)
    }

    /// Residual of `dθ(∂_u, ∂_v) = −2 g(μ^M ∂_u, ∂_v)`.
    pub fn theta_moment_residual(&self, c: Chart, u: f64, v: f64) -> Result<f64, KirillovError> {
        let m = self.moment_matrix(c, u, v)?;
        let phi = self.conformal(u, v)?;
        Ok(self.dtheta(c, u, v)? + 2.0 * phi * m[1][0])
    }

    /// Density of `(2πi)^{−1}[Â_g(sX₀) Ch_g(sX₀)]_top` against `du dv`.
    pub fn equivariant_integrand(&self, c: Chart, k: i64, s: f64, u: f64, v: f64) -> Result<Complex64, KirillovError> {
        let phi = self.conformal(u, v)?;
        let z = self.height(c, u, v)?;
        // R_g = ω J₀ with ω = −(s z + φ du∧dv); Â_g = f(ω), f(w) = (w/2)/sin(w/2).
        let (w0, w1) = (-s * z, -phi);
        let (a0, a1) = (ahat_f(w0), ahat_df(w0) * w1);
        // exp(−F_g) = e^{i c s z}(1 + i c φ du∧dv), c = (k+1)/2.
        let cc = (k + 1) as f64 / 2.0;
        let ph = Complex64::new(0.0, cc * s * z).exp();
        let (c0, c1) = (ph, ph * Complex64::new(0.0, cc * phi));
        let top = c1 * a0 + c0 * a1;
        Ok(top / Complex64::new(0.0, 2.0 * std::f64::consts::PI))
    }
}

/// `(w/2)/sin(w/2)`.
pub fn ahat_f(w: f64) -> f64 {
    if w.abs() < 1e-2 {
        let w2 = w * w;
        1.0 + w2 / 24.0 + 7.0 * w2 * w2 / 5760.0 + 31.0 * w2 * w2 * w2 / 967_680.0
    } else {
        (w / 2.0) / (w / 2.0).sin()
    }
}

pub fn ahat_df(w: f64) -> f64 {
    if w.abs() < 1e-2 {
        let w2 = w * w;
        w / 12.0 + 7.0 * w * w2 / 1440.0 + 31.0 * w * w2 * w2 / 161_280.0
    } else {
        let (s, c) = (w / 2.0).sin_cos();
        0.5 * (s - (w / 2.0) * c) / (s * s)
    }
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
pub fn smoothstep(t: f64) -> f64 {
    let (a, b) = (bump(t), bump(1.0 - t));
    a / (a + b)
}

/// Partition function of the chart: `χ_N(z) = S((z + a)/2a)`, `χ_S = 1 − χ_N`.
pub fn partition(c: Chart, z: f64, a: f64) -> f64 {
    let n = smoothstep((z + a) / (2.0 * a));
    match c {
        Chart::North => n,
        Chart::South => 1.0 - n,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: Complex64,
    /// `|I(order) − I(2·order)|`.
    pub error_estimate: f64,
    pub converged: bool,
}

fn integrate_once<F>(cfg: &QuadratureConfig, order: usize, f: &F) -> Result<Complex64, KirillovError>
where
    F: Fn(Chart, f64, f64) -> Result<Complex64, KirillovError>,
{
    let gl = GaussLegendre::new(order).map_err(|e| KirillovError::Config(e.to_string()))?;
    let geo = GeometryModel;
    let a = cfg.overlap;
    // Support of χ_N is z > −a, i.e. r² < (1+a)/(1−a); likewise for χ_S.
    let rmax = ((1.0 + a) / (1.0 - a)).sqrt();
    let h = rmax / cfg.subdivisions as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for chart in [Chart::North, Chart::South] {
        let mut err = None;
        let mut part = |re: bool| {
            let mut acc = 0.0;
            for seg in 0..cfg.subdivisions {
                let (r0, r1) = (seg as f64 * h, (seg + 1) as f64 * h);
                acc += gl.integrate(r0, r1, |r| {
                    gl.integrate(0.0, 2.0 * std::f64::consts::PI, |t| {
                        let (u, v) = (r * t.cos(), r * t.sin());
                        let z = match geo.height(chart, u, v) {
                            Ok(z) => z,
                            Err(e) => {
                                err = Some(e);
                                return 0.0;
                            }
                        };
                        match f(chart, u, v) {
                            Ok(val) => partition(chart, z, a) * r * if re { val.re } else { val.im },
                            Err(e) => {
                                err = Some(e);
                                0.0
                            }
                        }
                    })
                });
            }
            acc
        };
        let re = part(true);
        let im = part(false);
        if let Some(e) = err {
            return Err(e);
        }
        total += Complex64::new(re, im);
    }
    Ok(total)
}

/// Two-chart quadrature of a density, with the Richardson-style comparison.
pub fn integrate_density<F>(cfg: &QuadratureConfig, f: F) -> Result<IntegralResult, KirillovError>
where
    F: Fn(Chart, f64, f64) -> Result<Complex64, KirillovError>,
{
    cfg.validate()?;
    let lo = integrate_once(cfg, cfg.order, &f)?;
    let hi = integrate_once(cfg, 2 * cfg.order, &f)?;
    let est = (hi - lo).norm();
    Ok(IntegralResult { value: hi, error_estimate: est, converged: est < cfg.tolerance })
}

pub fn integrate(k: i64, s: f64, cfg: &QuadratureConfig) -> Result<IntegralResult, KirillovError> {
    let geo = GeometryModel;
    integrate_density(cfg, |c, u, v| geo.equivariant_integrand(c, k, s, u, v))
}

/// `(i/2π)∫ F` for `F = −i·deg/2·vol`.
pub fn chern_number(deg: i64, cfg: &QuadratureConfig) -> Result<f64, KirillovError> {
    let geo = GeometryModel;
    let r = integrate_density(cfg, |_, u, v| {
        let f = Complex64::new(0.0, -(deg as f64) / 2.0) * geo.conformal(u, v)?;
        Ok(Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI)) * f)
    })?;
    Ok(r.value.re)
}

/// Character of `e^{−sX₀}` on `H⁰(CP¹, O(k))` with the weight ladder
/// `a − k/2 + δ`, `a = 0..k`.
pub fn index_oracle(k: i64, s: f64) -> Result<Complex64, KirillovError> {
    if k < 0 {
        return Err(KirillovError::NegativeDegree(k));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..=k {
        let w = a as f64 - k as f64 / 2.0 + WEIGHT_SHIFT;
        acc += Complex64::new(0.0, w * s).exp();
    }
    Ok(acc)
}

/// Weight shift read off from the `s → 0` slope of the integral at `k = 1`,
/// rounded to the half-integer lattice.
pub fn calibrate_weight_shift(cfg: &QuadratureConfig) -> Result<f64, KirillovError> {
    let h = 1e-3;
    let up = integrate(1, h, cfg)?.value;
    let dn = integrate(1, -h, cfg)?.value;
    let slope = (up - dn) / (2.0 * h);
    // slope = i(k+1)δ with k = 1
    Ok(slope.im.round() / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KirillovReport {
    pub k: i64,
    pub s: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub diff: f64,
    pub error_estimate: f64,
    pub pass: bool,
}

pub fn kirillov_check(k: i64, s: f64, cfg: &QuadratureConfig) -> Result<KirillovReport, KirillovError> {
    let rhs = index_oracle(k, s)?;
    let lhs = integrate(k, s, cfg)?;
    if !lhs.converged {
        return Err(KirillovError::NotConverged { estimate: lhs.error_estimate, tolerance: cfg.tolerance });
    }
    let diff = (lhs.value - rhs).norm();
    Ok(KirillovReport { k, s, lhs: lhs.value, rhs, diff, error_estimate: lhs.error_estimate, pass: diff < cfg.tolerance })
}

/// `kirillov_check` at `steps + 1` evenly spaced `s` in `[lo, hi]`.
pub fn sweep(k: i64, lo: f64, hi: f64, steps: usize, cfg: &QuadratureConfig) -> Result<Vec<KirillovReport>, KirillovError> {
    (0..=steps).map(|i| kirillov_check(k, lo + (hi - lo) * i as f64 / steps.max(1) as f64, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn area_of_sphere() {
        let geo = GeometryModel;
        let r = integrate_density(&cfg(), |_, u, v| Ok(Complex64::new(geo.conformal(u, v)?, 0.0))).unwrap();
        assert!((r.value.re - 4.0 * std::f64::consts::PI).abs() < 1e-10, "{:?}", r);
    }

    #[test]
    fn chart_round_trip() {
        let geo = GeometryModel;
        let p = geo.to_sphere(Chart::North, 0.3, -0.7).unwrap();
        let (u, v) = geo.from_sphere(Chart::South, p).unwrap();
        let q = geo.to_sphere(Chart::South, u, v).unwrap();
        for i in 0..3 {
            assert!((p[i] - q[i]).abs() < 1e-14);
        }
        assert!(matches!(geo.conformal(20.0, 0.0), Err(KirillovError::OutsideChart(..))));
    }

    #[test]
    fn theta_moment_lemma_at_random_points() {
        let geo = GeometryModel;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for i in 0..100 {
            let c = if i % 2 == 0 { Chart::North } else { Chart::South };
            let (u, v) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            assert!(geo.theta_moment_residual(c, u, v).unwrap().abs() < 1e-10);
            let z = geo.height(c, u, v).unwrap();
            assert!((geo.dtheta(c, u, v).unwrap() - 2.0 * z * geo.conformal(u, v).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn chern_numbers() {
        for k in 0..4 {
            assert!((chern_number(k, &cfg()).unwrap() - k as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_examples() {
        assert!((index_oracle(0, 0.0).unwrap() - 1.0).norm() < 1e-15);
        assert!((index_oracle(2, 0.0).unwrap() - 3.0).norm() < 1e-15);
        assert!((index_oracle(1, 0.5).unwrap() - 2.0 * 0.25f64.cos()).norm() < 1e-15);
        assert_eq!(index_oracle(-1, 0.0), Err(KirillovError::NegativeDegree(-1)));
    }

    #[test]
    fn integrand_finite_at_poles() {
        let geo = GeometryModel;
        for c in [Chart::North, Chart::South] {
            assert!(geo.equivariant_integrand(c, 2, 0.7, 0.0, 0.0).unwrap().norm().is_finite());
        }
    }

    #[test]
    fn calibration_gives_zero_shift() {
        assert_eq!(calibrate_weight_shift(&cfg()).unwrap(), WEIGHT_SHIFT);
    }

    #[test]
    fn checks_pass() {
        for (k, s, tol) in [(0, 0.0, 1e-8), (3, 0.0, 1e-8), (1, 0.4, 1e-6), (2, 0.3, 1e-6)] {
            let c = QuadratureConfig { tolerance: tol, ..cfg() };
            let r = kirillov_check(k, s, &c).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn partition_independence() {
        let vals: Vec<Complex64> = [0.3, 0.5, 0.7].iter().map(|&a| integrate(2, 0.3, &QuadratureConfig { overlap: a, ..cfg() }).unwrap().value).collect();
        assert!((vals[0] - vals[1]).norm() < 1e-9 && (vals[1] - vals[2]).norm() < 1e-9);
    }

    #[test]
    fn smooth_in_s() {
        let c = cfg();
        let h = 1e-2;
        let f = |s: f64| integrate(2, s, &c).unwrap().value;
        let slope = (f(h) - f(-h)) / (2.0 * h);
        // Oracle slope at 0 is i Σ (a − k/2) = 0.
        assert!(slope.norm() < 1e-6, "{slope}");
        for i in 1..10 {
            let s = i as f64 / 10.0;
            let second = (f(s + h) - f(s) * 2.0 + f(s - h)) / (h * h);
            assert!(second.norm() < 10.0, "s = {s}: {second}");
        }
    }

    #[test]
    fn bad_config() {
        let c = QuadratureConfig { tolerance: 0.0, ..cfg() };
        assert!(matches!(integrate(0, 0.0, &c), Err(KirillovError::Config(_))));
    }
}
