//! Experiment configuration documents.
//!
//! A config is a TOML document:
//!
//! ```toml
//! experiment = "thm1_2d"
//! seed = 7
//!
//! [grid]
//! n = 2
//! L = 24.0
//! M = 64
//!
//! [solver]
//! p = 5.0
//! dt = 1e-3
//! T = 1.0
//! dt_out = 1e-2
//!
//! [initial]
//! kind = "gaussian"
//! amplitude = 1.0
//! width = 1.5
//!
//! [params]
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{Flow, SolverConfig};
use crate::spectral::is_lattice_dyadic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[serde(rename = "thm1_2d")]
    Thm1TwoD,
    #[serde(rename = "thm2_1d_deriv")]
    Thm2Deriv,
    #[serde(rename = "thm2_1d_p3")]
    Thm2P3,
    #[serde(rename = "l4l8_2d")]
    L4L8,
    Monotonicity,
    Scattering,
    IEnergy,
    ScaleInvariance,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Thm1TwoD => "thm1_2d",
            ExperimentKind::Thm2Deriv => "thm2_1d_deriv",
            ExperimentKind::Thm2P3 => "thm2_1d_p3",
            ExperimentKind::L4L8 => "l4l8_2d",
            ExperimentKind::Monotonicity => "monotonicity",
            ExperimentKind::Scattering => "scattering",
            ExperimentKind::IEnergy => "i_energy",
            ExperimentKind::ScaleInvariance => "scale_invariance",
        }
    }

    /// Required spatial dimension, if fixed.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            ExperimentKind::Thm1TwoD | ExperimentKind::L4L8 | ExperimentKind::Scattering | ExperimentKind::IEnergy => {
                Some(2)
            }
            ExperimentKind::Thm2Deriv | ExperimentKind::Thm2P3 | ExperimentKind::ScaleInvariance => Some(1),
            ExperimentKind::Monotonicity => None,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub p: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Defaults to `10·dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_out: Option<f64>,
    #[serde(default)]
    pub flow: Flow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `A exp(-|x-c|²/w²) e^{i v·x}`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default)]
        velocity: Vec<f64>,
    },
    /// Two Gaussians at `(∓separation/2, 0)` moving towards each other with speed `speed`.
    TwoBump {
        amplitude: f64,
        width: f64,
        separation: f64,
        speed: f64,
    },
    /// Gaussian envelope times a seeded sum of `modes` random plane waves with
    /// frequencies up to `bandwidth`; scaled so that `max |u| = amplitude`.
    RandomPhase {
        amplitude: f64,
        width: f64,
        modes: usize,
        bandwidth: f64,
    },
    /// Gaussian envelope times seeded random phases on every lattice mode up to
    /// `kmax`, with modulus `(1 + |k|)^{-exponent}`; scaled so that `max |u| = amplitude`.
    PowerLaw {
        amplitude: f64,
        width: f64,
        exponent: f64,
        kmax: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Frequencies in lattice modes (multiples of `1/L`).
    /// A single value is read as a one-element list.
    #[serde(rename = "N", default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Monotonicity action: `"erf"` (1D), `"r0"` or `"abs"` (interaction).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    /// Relative tolerance for monotonicity checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Ceiling on pairs visited by direct double sums.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_cap: Option<u64>,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub params: Params,
}

fn toml_error_key(path: &serde_path_to_error::Path, message: &str) -> String {
    let mut s = path.to_string();
    if s == "." {
        s.clear();
    }
    // internally tagged tables swallow the field name; recover it from the message
    if let Some(field) = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
    {
        if !s.ends_with(field) {
            s = if s.is_empty() { field.to_string() } else { format!("{s}.{field}") };
        }
    }
    s
}

/// Dotted key of the line containing byte `offset`, qualified by the
/// enclosing `[section]`.
fn key_at(text: &str, offset: usize) -> String {
    let mut section = String::new();
    let mut start = 0;
    for line in text.split_inclusive('\n') {
        let end = start + line.len();
        let t = line.trim();
        if t.starts_with('[') && !t.starts_with("[[") {
            section = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if offset < end {
            let key = t.split('=').next().unwrap_or("").trim();
            return match (section.is_empty(), key.is_empty() || t.starts_with('[')) {
                (_, true) => section,
                (true, false) => key.to_string(),
                (false, false) => format!("{section}.{key}"),
            };
        }
        start = end;
    }
    section
}

impl ExperimentConfig {
    /// Parse and validate a TOML document. Errors name the offending key.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| {
            let key = e.span().map(|r| key_at(text, r.start)).unwrap_or_default();
            Error::config(key, e.message().to_string())
        })?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().clone();
            let inner = e.into_inner();
            Error::config(toml_error_key(&path, inner.message()), inner.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Canonical text: the document re-serialised with keys sorted.
    pub fn canonical_text(&self) -> String {
        let value = toml::Value::try_from(self).expect("config serialises");
        toml::to_string(&value).expect("value serialises")
    }

    /// SHA-256 of [`ExperimentConfig::canonical_text`], lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn dt_out(&self) -> f64 {
        self.solver.dt_out.unwrap_or(10.0 * self.solver.dt)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        SolverConfig::new(self.solver.p, self.solver.dt, self.solver.t_final, self.dt_out())
    }

    pub fn make_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.length, self.grid.points)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.make_grid().map_err(|e| Error::config("grid", e.to_string()))?;
        if let Some(n) = self.experiment.dimension() {
            if g.dim() != n {
                return Err(Error::config("grid.n", format!("{} needs n = {n}", self.experiment)));
            }
        }
        self.solver_config().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::config(format!("solver.{name}"), reason),
            other => Error::config("solver", other.to_string()),
        })?;
        self.validate_initial()?;
        self.validate_params(&g)
    }

    fn validate_initial(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("initial.{key}"), format!("must be > 0, got {v}")))
            }
        };
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("initial.{key}"), "must be finite"))
            }
        };
        match &self.initial {
            InitialSpec::Gaussian {
                amplitude,
                width,
                center,
                velocity,
            } => {
                finite("amplitude", *amplitude)?;
                positive("width", *width)?;
                for (key, v) in [("center", center), ("velocity", velocity)] {
                    if v.len() > self.grid.n {
                        return Err(Error::config(
                            format!("initial.{key}"),
                            format!("has {} components for a {}-dimensional grid", v.len(), self.grid.n),
                        ));
                    }
                    for x in v {
                        finite(key, *x)?;
                    }
                }
            }
            InitialSpec::TwoBump {
                amplitude,
                width,
                separation,
                speed,
            } => {
                finite("amplitude", *amplitude)?;
                positive("width", *width)?;
                finite("separation", *separation)?;
                finite("speed", *speed)?;
            }
            InitialSpec::RandomPhase {
                amplitude,
                width,
                modes,
                bandwidth,
            } => {
                finite("amplitude", *amplitude)?;
                positive("width", *width)?;
                positive("bandwidth", *bandwidth)?;
                if *modes == 0 {
                    return Err(Error::config("initial.modes", "must be >= 1"));
                }
            }
            InitialSpec::PowerLaw {
                amplitude,
                width,
                exponent,
                kmax,
            } => {
                finite("amplitude", *amplitude)?;
                positive("width", *width)?;
                finite("exponent", *exponent)?;
                if *kmax == 0 || *kmax >= self.grid.points / 2 {
                    return Err(Error::config("initial.kmax", "must lie in [1, M/2)"));
                }
            }
        }
        Ok(())
    }

    fn validate_params(&self, g: &Grid) -> Result<()> {
        let p = &self.params;
        let need = |v: Option<f64>, key: &str| -> Result<f64> {
            v.ok_or_else(|| Error::config(format!("params.{key}"), format!("required by {}", self.experiment)))
        };
        match self.experiment {
            ExperimentKind::IEnergy => {
                let s = need(p.s, "s")?;
                let k = (self.solver.p - 1.0) / 2.0;
                if (k - k.round()).abs() > 1e-12 || k.round() < 2.0 {
                    return Err(Error::config("solver.p", "i_energy needs p = 2k+1 with k >= 2"));
                }
                let s_k = 1.0 - 1.0 / (4.0 * k.round() - 3.0);
                if !(s > s_k && s < 1.0) {
                    return Err(Error::config("params.s", format!("must lie in ({s_k}, 1), got {s}")));
                }
                let list = p
                    .n_list
                    .as_ref()
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| Error::config("params.N", "needs at least one dyadic mode count"))?;
                for &n in list {
                    if !is_lattice_dyadic(g, n / g.length()) || n < 2.0 {
                        return Err(Error::config("params.N", format!("{n} is not a power of two >= 2")));
                    }
                }
            }
            ExperimentKind::ScaleInvariance => {
                let l = need(p.lambda, "lambda")?;
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::config("params.lambda", "must be > 0"));
                }
            }
            ExperimentKind::Monotonicity => {
                let weight = p.weight.as_deref().unwrap_or(if g.dim() == 1 { "erf" } else { "r0" });
                match weight {
                    "erf" => {
                        if g.dim() != 1 {
                            return Err(Error::config("params.weight", "the erf action is one-dimensional"));
                        }
                        let eps = need(p.epsilon, "epsilon")?;
                        if !(eps >= 2.0 * g.spacing() * (1.0 - 1e-12)) {
                            return Err(Error::config("params.epsilon", "must be at least 2h"));
                        }
                    }
                    "r0" => {
                        let r0 = need(p.r0, "r0")?;
                        if !(r0.is_finite() && r0 > 0.0) {
                            return Err(Error::config("params.r0", "must be > 0"));
                        }
                    }
                    "abs" => {}
                    other => {
                        return Err(Error::config(
                            "params.weight",
                            format!("unknown weight {other:?}; expected erf, r0 or abs"),
                        ))
                    }
                }
            }
            ExperimentKind::Thm2Deriv => {
                if let Some(eps) = p.epsilon {
                    if !(eps >= 2.0 * g.spacing() * (1.0 - 1e-12)) {
                        return Err(Error::config("params.epsilon", "must be at least 2h"));
                    }
                }
            }
            _ => {}
        }
        if let Some(t) = p.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::config("params.tolerance", "must be >= 0"));
            }
        }
        Ok(())
    }

    /// Copy with one dotted key (e.g. `solver.p`) replaced. The value text is
    /// read as a TOML value (`3.5`, `[8, 16]`, `"abs"`), falling back to a string.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut root = toml::Value::try_from(self).map_err(|e| Error::config(key, e.to_string()))?;
        let parsed = parse_value(value);
        let parts: Vec<&str> = key.split('.').collect();
        let mut cur = &mut root;
        for (i, part) in parts.iter().enumerate() {
            let table = cur
                .as_table_mut()
                .ok_or_else(|| Error::config(key, format!("{} is not a table", parts[..i].join("."))))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), parsed.clone());
                break;
            }
            cur = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let text = toml::to_string(&root).map_err(|e| Error::config(key, e.to_string()))?;
        ExperimentConfig::from_toml(&text)
    }
}

/// Read a TOML scalar or array; bare words become strings.
pub fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.to_string())),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

/// Flattened `key -> value` view used for CSV echoes.
pub fn flatten(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    fn walk(prefix: &str, v: &toml::Value, out: &mut BTreeMap<String, String>) {
        match v {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            other => {
                out.insert(prefix.to_string(), other.to_string());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk("", &toml::Value::try_from(cfg).expect("config serialises"), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
experiment = "thm1_2d"
seed = 3

[grid]
n = 2
L = 24.0
M = 32

[solver]
p = 5.0
dt = 0.01
T = 0.5

[initial]
kind = "gaussian"
amplitude = 1.0
width = 1.5
"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Thm1TwoD);
        assert_eq!(c.seed, 3);
        assert!((c.dt_out() - 0.1).abs() < 1e-15);
        assert_eq!(c.params, Params::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let text = BASE.replace("width = 1.5", "width = 1.5\nwidht = 2.0");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Config { key, .. }) => assert!(key.contains("initial"), "{key}"),
            other => panic!("{other:?}"),
        }
        let text = BASE.replace("p = 5.0", "p = \"five\"");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "solver.p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_names_keys() {
        let text = BASE.replace("n = 2", "n = 1");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config { key, .. }) if key == "grid.n"));
        let text = BASE.replace("M = 32", "M = 30");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config { key, .. }) if key == "grid"));
        let text = BASE.replace("T = 0.5", "T = 0.55");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config { key, .. }) if key == "solver.T"));
    }

    #[test]
    fn hash_is_stable_under_formatting() {
        let a = ExperimentConfig::from_toml(BASE).unwrap();
        let shuffled = BASE.replace("seed = 3\n", "").replace("experiment = \"thm1_2d\"", "seed   =  3\nexperiment=\"thm1_2d\"");
        let b = ExperimentConfig::from_toml(&shuffled).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = a.with_override("seed", "4").unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn overrides() {
        let a = ExperimentConfig::from_toml(BASE).unwrap();
        let b = a.with_override("solver.p", "3.5").unwrap();
        assert_eq!(b.solver.p, 3.5);
        let c = a.with_override("params.N", "[8, 16]").unwrap();
        assert_eq!(c.params.n_list, Some(vec![8.0, 16.0]));
        let c = a.with_override("params.N", "8").unwrap();
        assert_eq!(c.params.n_list, Some(vec![8.0]));
        assert!(a.with_override("solver.p", "0.5").is_err());
        assert!(a.with_override("solver.bogus", "1").is_err());
    }
}
