//! Run configuration, read from TOML.
//!
//! ```toml
//! suites = ["rescale", "kirillov"]
//! seed = 7
//! samples = 50
//! y_degree = 4
//! j = 2
//! op_bound = 6
//! output = "report.json"
//!
//! [kirillov]
//! k = [2]
//! s = [0.3]
//! tolerance = 1e-6
//!
//! [kirillov.quadrature]
//! order = 20
//! subdivisions = 6
//! overlap = 0.5
//! tolerance = 1e-8
//!
//! [kirillov.sweep]
//! k = 1
//! steps = 20
//! csv = "sweep.csv"
//! ```
//!
//! Every key is optional; missing keys take the defaults of `RunConfig::default()`.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::kirillov::QuadratureConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Forms,
    Dnc,
    Rescale,
    Symbols,
    Mehler,
    Kirillov,
}

impl Suite {
    pub const ALL: [Suite; 7] = [Suite::Algebra, Suite::Forms, Suite::Dnc, Suite::Rescale, Suite::Symbols, Suite::Mehler, Suite::Kirillov];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Forms => "forms",
            Suite::Dnc => "dnc",
            Suite::Rescale => "rescale",
            Suite::Symbols => "symbols",
            Suite::Mehler => "mehler",
            Suite::Kirillov => "kirillov",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "one_i64", deserialize_with = "nonneg_i64")]
    pub k: i64,
    #[serde(default = "twenty", deserialize_with = "positive_usize")]
    pub steps: usize,
    #[serde(default, deserialize_with = "sweep_end")]
    pub lo: f64,
    #[serde(default = "one_f64", deserialize_with = "sweep_end")]
    pub hi: f64,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KirillovSettings {
    #[serde(default = "default_k", deserialize_with = "degrees")]
    pub k: Vec<i64>,
    #[serde(default = "default_s", deserialize_with = "finite_list")]
    pub s: Vec<f64>,
    /// Bound on `|integral − character|`.
    #[serde(default = "default_kirillov_tol", deserialize_with = "positive_f64")]
    pub tolerance: f64,
    #[serde(default, deserialize_with = "quadrature")]
    pub quadrature: QuadratureConfig,
    pub sweep: Option<SweepConfig>,
}

impl Default for KirillovSettings {
    fn default() -> Self {
        KirillovSettings {
            k: default_k(),
            s: default_s(),
            tolerance: default_kirillov_tol(),
            quadrature: QuadratureConfig::default(),
            sweep: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "all_suites", deserialize_with = "suites")]
    pub suites: Vec<Suite>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random cases per property check.
    #[serde(default = "default_samples", deserialize_with = "positive_usize")]
    pub samples: usize,
    /// Largest `y`-degree of random sections.
    #[serde(default = "four", deserialize_with = "positive_i32")]
    pub y_degree: i32,
    /// Largest kept `X`-degree `J`.
    #[serde(default = "two", deserialize_with = "positive_u32")]
    pub j: u32,
    /// Operator-word bound of the brute-force scaling order. Zero is accepted
    /// and makes those checks inconclusive.
    #[serde(default = "six", deserialize_with = "nonneg_i32")]
    pub op_bound: i32,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub kirillov: KirillovSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suites: all_suites(),
            seed: default_seed(),
            samples: default_samples(),
            y_degree: 4,
            j: 2,
            op_bound: 6,
            output: None,
            kirillov: KirillovSettings::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{}:{}: {}{}", .line, .column, .field.as_ref().map(|f| format!("field `{f}`: ")).unwrap_or_default(), .message)]
    Parse { line: usize, column: usize, field: Option<String>, message: String },
    #[error("{0}")]
    Other(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        toml::from_str(src).map_err(|e| locate(src, &e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&src)
    }

    pub fn runs(&self, s: Suite) -> bool {
        self.suites.contains(&s)
    }
}

/// Line/column (1-based) and dotted key of the error span.
fn locate(src: &str, e: &toml::de::Error) -> ConfigError {
    let message = e.message().trim().to_string();
    let Some(span) = e.span() else {
        return ConfigError::Other(message);
    };
    let start = span.start.min(src.len());
    let before = &src[..start];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() + 1;
    let text = src[line_start..].lines().next().unwrap_or("");
    let mut table = None;
    let here = text.trim();
    if here.starts_with('[') {
        table = Some(here.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    }
    for l in before[..line_start].lines().rev().filter(|_| table.is_none()) {
        let t = l.trim();
        if t.starts_with('[') {
            table = Some(t.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            break;
        }
    }
    let key = text.split_once('=').map(|(k, _)| k.trim().to_string()).filter(|k| !k.is_empty() && !k.starts_with('['));
    let field = match (table, key) {
        (Some(t), Some(k)) => Some(format!("{t}.{k}")),
        (None, Some(k)) => Some(k),
        (Some(t), None) => Some(t),
        (None, None) => None,
    };
    ConfigError::Parse { line, column, field, message }
}

fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}
fn default_seed() -> u64 {
    20_240_601
}
fn default_samples() -> usize {
    20
}
fn default_k() -> Vec<i64> {
    vec![0, 1, 2, 3]
}
fn default_s() -> Vec<f64> {
    vec![0.0, 0.1, 0.3, 0.5]
}
fn default_kirillov_tol() -> f64 {
    1e-6
}
fn one_i64() -> i64 {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn twenty() -> usize {
    20
}
fn two() -> u32 {
    2
}
fn four() -> i32 {
    4
}
fn six() -> i32 {
    6
}

fn bad<E: serde::de::Error>(msg: impl fmt::Display) -> E {
    E::custom(msg)
}

fn positive_usize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
    let v = usize::deserialize(d)?;
    if v == 0 {
        return Err(bad("must be positive"));
    }
    Ok(v)
}

fn positive_u32<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
    let v = u32::deserialize(d)?;
    if v == 0 {
        return Err(bad("must be positive"));
    }
    Ok(v)
}

fn positive_i32<'de, D: Deserializer<'de>>(d: D) -> Result<i32, D::Error> {
    let v = i32::deserialize(d)?;
    if v <= 0 {
        return Err(bad("must be positive"));
    }
    Ok(v)
}

fn nonneg_i32<'de, D: Deserializer<'de>>(d: D) -> Result<i32, D::Error> {
    let v = i32::deserialize(d)?;
    if v < 0 {
        return Err(bad("must be non-negative"));
    }
    Ok(v)
}

fn nonneg_i64<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
    let v = i64::deserialize(d)?;
    if v < 0 {
        return Err(bad("twist degree must be non-negative"));
    }
    Ok(v)
}

fn positive_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(bad("must be a positive finite number"));
    }
    Ok(v)
}

fn sweep_end<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if !v.is_finite() || v.abs() > 10.0 {
        return Err(bad("sweep endpoint must lie in [-10, 10]"));
    }
    Ok(v)
}

fn degrees<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<i64>, D::Error> {
    let v = Vec::<i64>::deserialize(d)?;
    if v.is_empty() {
        return Err(bad("list must not be empty"));
    }
    if let Some(k) = v.iter().find(|&&k| k < 0) {
        return Err(bad(format!("twist degree {k} is negative")));
    }
    Ok(v)
}

fn finite_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    let v = Vec::<f64>::deserialize(d)?;
    if v.is_empty() {
        return Err(bad("list must not be empty"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(v)
}

fn quadrature<'de, D: Deserializer<'de>>(d: D) -> Result<QuadratureConfig, D::Error> {
    let q = QuadratureConfig::deserialize(d)?;
    q.validate().map_err(bad)?;
    Ok(q)
}

fn suites<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Suite>, D::Error> {
    let names = Vec::<String>::deserialize(d)?;
    let mut out = Vec::new();
    for n in &names {
        if n == "all" {
            out.extend(Suite::ALL);
            continue;
        }
        match Suite::ALL.iter().find(|s| s.name() == n) {
            Some(s) => out.push(*s),
            None => return Err(bad(format!("unknown suite `{n}`"))),
        }
    }
    if out.is_empty() {
        return Err(bad("no suite selected"));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn kirillov_only() {
        let c = RunConfig::from_toml("suites = [\"kirillov\"]\n[kirillov]\nk = [2]\ns = [0.3]\n").unwrap();
        assert_eq!(c.suites, vec![Suite::Kirillov]);
        assert_eq!(c.kirillov.k, vec![2]);
        assert_eq!(c.kirillov.quadrature, QuadratureConfig::default());
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let err = RunConfig::from_toml("seed = 1\nsamples = 0\n").unwrap_err();
        match err {
            ConfigError::Parse { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field.as_deref(), Some("samples"));
            }
            e => panic!("{e:?}"),
        }
        let err = RunConfig::from_toml("[kirillov]\nk = [1]\n\n[kirillov.quadrature]\noverlap = 2.0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 4 | 5, .. }), "{err}");
        let err = RunConfig::from_toml("bogus = 3\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = RunConfig::from_toml("suites = [\"nope\"]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        assert!(RunConfig::from_toml("op_bound = 0\n").is_ok());
        assert!(RunConfig::from_toml("[kirillov]\nk = [-1]\n").is_err());
    }
}
