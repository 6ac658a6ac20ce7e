use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::greens::DomainSpec;
use crate::linearized::Sector;
use crate::tower::ProjectionMode;

use super::thresholds::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Params,
    Ansatz,
    ResidualScan,
    LinearSpectrum,
    Solve,
    LimitChecks,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::Params,
        Self::Ansatz,
        Self::ResidualScan,
        Self::LinearSpectrum,
        Self::Solve,
        Self::LimitChecks,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Params => "params",
            Self::Ansatz => "ansatz",
            Self::ResidualScan => "residual-scan",
            Self::LinearSpectrum => "linear-spectrum",
            Self::Solve => "solve",
            Self::LimitChecks => "limit-checks",
        }
    }

    fn needs_lambda(&self) -> bool {
        !matches!(self, Self::LimitChecks)
    }

    fn needs_disk(&self) -> bool {
        matches!(
            self,
            Self::ResidualScan | Self::LinearSpectrum | Self::Solve
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown experiment kind `{s}`"))
    }
}

/// Geometric `λ` sweep between `from` and `to` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default = "yes")]
    pub geometric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_newton_tol")]
    pub newton: f64,
    #[serde(default = "default_newton_tol")]
    pub contraction: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton: default_newton_tol(),
            contraction: default_newton_tol(),
            max_iterations: default_max_iterations(),
        }
    }
}

/// Everything a run needs. Fields irrelevant to `kind` are carried along
/// and hashed, but ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_nodes_per_unit")]
    pub nodes_per_unit: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub projection: ProjectionMode,
    #[serde(default = "default_sectors")]
    pub sectors: Vec<Sector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_mode: Option<u32>,
    /// For `solve`: also run the fixed-point iteration at every `λ` and
    /// compare it with Newton.
    #[serde(default)]
    pub contraction_check: bool,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_test_functions")]
    pub test_functions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Per-run replacements for entries of the default thresholds file.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, f64>,
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn default_newton_tol() -> f64 {
    1e-12
}
fn default_max_iterations() -> usize {
    200
}
fn default_p() -> Vec<f64> {
    vec![1.0, 1.05, 1.1]
}
fn default_nodes_per_unit() -> f64 {
    64.0
}
fn default_sectors() -> Vec<Sector> {
    vec![Sector::Even, Sector::Unrestricted]
}
fn default_alphas() -> Vec<f64> {
    vec![2.0, 6.0, 10.0, 14.0]
}
fn default_test_functions() -> usize {
    5
}

/// Config problem pinned to a source position when one is known.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        if let Some(field) = &self.field {
            write!(f, "`{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl ConfigError {
    fn syntax(e: &serde_json::Error) -> Self {
        // serde_json appends its own "at line L column C"; keep the bare message
        let full = e.to_string();
        let message = full.split(" at line ").next().unwrap_or(&full).to_string();
        Self {
            line: Some(e.line()),
            column: Some(e.column()),
            field: None,
            message,
        }
    }

    fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            column: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    /// Points the error at the first line of `source` mentioning the field's
    /// last path component as a JSON key.
    fn locate(mut self, source: Option<&str>) -> Self {
        let (Some(src), Some(field)) = (source, self.field.as_deref()) else {
            return self;
        };
        let key = format!("\"{}\"", field.rsplit('.').next().unwrap_or(field));
        if let Some((n, line)) = src.lines().enumerate().find(|(_, l)| l.contains(&key)) {
            self.line = Some(n + 1);
            self.column = line.find(&key).map(|c| c + 1);
        }
        self
    }
}

/// Applies `key=value` to a JSON object. Dotted keys descend into nested
/// objects, creating them as needed; the value is parsed as JSON and taken
/// as a bare string when that fails. Setting `lambda` drops `sweep` and
/// the other way round.
pub fn apply_override(config: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::field(spec, "override must have the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::field(spec, "override key is empty"));
    }
    let value =
        serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut target = config;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let obj = target
            .as_object_mut()
            .ok_or_else(|| ConfigError::field(key, format!("`{part}` is not inside an object")))?;
        target = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = target
        .as_object_mut()
        .ok_or_else(|| ConfigError::field(key, "override target is not an object"))?;
    let last = parts[parts.len() - 1];
    if parts.len() == 1 {
        match last {
            "lambda" => {
                obj.remove("sweep");
            }
            "sweep" => {
                obj.remove("lambda");
            }
            _ => {}
        }
    }
    obj.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses and validates JSON text. Errors carry the line of the
    /// offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Self::from_json_with(text, &[])
    }

    /// As [`from_json`](Self::from_json), with `key=value` overrides
    /// applied before validation.
    pub fn from_json_with(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| ConfigError::syntax(&e))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let source = overrides.is_empty().then_some(text);
        let config: RunConfig = serde_json::from_value(value).map_err(|e| {
            let mut err = ConfigError {
                line: None,
                column: None,
                field: None,
                message: e.to_string(),
            };
            if let Some(name) = quoted_name(&err.message) {
                err.field = Some(name);
                err = err.locate(source);
            }
            err
        })?;
        config.validate().map_err(|e| e.locate(source))?;
        Ok(config)
    }

    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_value(value).map_err(|e| ConfigError {
            line: None,
            column: None,
            field: None,
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Default config of the given kind at a single `λ`.
    pub fn new(kind: ExperimentKind) -> Self {
        let mut value = serde_json::json!({ "kind": kind });
        if kind.needs_lambda() {
            value["lambda"] = serde_json::json!(1e-3);
        }
        serde_json::from_value(value).expect("defaults deserialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::field("k", "must be at least 1"));
        }
        match (self.lambda, &self.sweep) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::field(
                    "sweep",
                    "give either `lambda` or `sweep`, not both",
                ))
            }
            (None, None) if self.kind.needs_lambda() => {
                return Err(ConfigError::field(
                    "lambda",
                    format!("{} needs `lambda` or `sweep`", self.kind),
                ))
            }
            _ => {}
        }
        if let Some(l) = self.lambda {
            positive("lambda", l)?;
        }
        if let Some(s) = &self.sweep {
            positive("sweep.from", s.from)?;
            positive("sweep.to", s.to)?;
            if s.points < 2 {
                return Err(ConfigError::field(
                    "sweep.points",
                    "a sweep needs at least 2 points",
                ));
            }
            if !s.geometric {
                return Err(ConfigError::field(
                    "sweep.geometric",
                    "only geometric sweeps are supported",
                ));
            }
        }
        if let Err(e) = self.domain.validate() {
            return Err(ConfigError::field("domain", e.to_string()));
        }
        if self.kind.needs_disk() && !self.domain.is_disk() {
            return Err(ConfigError::field(
                "domain",
                format!("{} runs on disks only", self.kind),
            ));
        }
        if self.p.is_empty() {
            return Err(ConfigError::field("p", "list is empty"));
        }
        for &p in &self.p {
            if !(p.is_finite() && p >= 1.0) {
                return Err(ConfigError::field(
                    "p",
                    format!("exponent {p} must be finite and at least 1"),
                ));
            }
        }
        positive("nodes_per_unit", self.nodes_per_unit)?;
        positive("tolerances.newton", self.tolerances.newton)?;
        positive("tolerances.contraction", self.tolerances.contraction)?;
        if self.tolerances.max_iterations == 0 {
            return Err(ConfigError::field("max_iterations", "must be positive"));
        }
        if self.sectors.is_empty() {
            return Err(ConfigError::field("sectors", "list is empty"));
        }
        for &a in &self.alphas {
            positive("alphas", a)?;
        }
        if self.kind == ExperimentKind::LimitChecks && self.alphas.is_empty() {
            return Err(ConfigError::field("alphas", "list is empty"));
        }
        if self.max_mode == Some(0) {
            return Err(ConfigError::field("max_mode", "must be positive"));
        }
        let defaults = Thresholds::defaults();
        for (name, &v) in &self.thresholds {
            if defaults.get(name).is_none() {
                return Err(ConfigError::field(
                    &format!("thresholds.{name}"),
                    "unknown threshold",
                ));
            }
            positive(&format!("thresholds.{name}"), v)?;
        }
        Ok(())
    }

    /// The `λ` values of the run, largest first.
    pub fn lambdas(&self) -> Vec<f64> {
        let mut out = match (&self.sweep, self.lambda) {
            (Some(s), _) => {
                let (a, b) = (s.from.ln(), s.to.ln());
                (0..s.points)
                    .map(|i| (a + (b - a) * i as f64 / (s.points - 1) as f64).exp())
                    .collect()
            }
            (None, Some(l)) => vec![l],
            (None, None) => Vec::new(),
        };
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// Default thresholds with this run's replacements.
    pub fn effective_thresholds(&self) -> Thresholds {
        Thresholds::defaults().with_overrides(&self.thresholds)
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::field(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn quoted_name(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_lambda_points_at_its_line() {
        let text = "{\n  \"kind\": \"params\",\n  \"k\": 2,\n  \"lambda\": -1e-3\n}";
        let err = RunConfig::from_json(text).unwrap_err();
        assert_eq!(err.line, Some(4));
        assert_eq!(err.field.as_deref(), Some("lambda"));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = RunConfig::from_json("{\n \"kind\": \"params\",\n \"k\": 2,,\n}").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.column.is_some());
    }

    #[test]
    fn unknown_field_is_located() {
        let text = "{\"kind\": \"params\",\n\"lambda\": 0.01,\n\"lamda\": 2}";
        let err = RunConfig::from_json(text).unwrap_err();
        assert_eq!(err.line, Some(3), "{err}");
    }

    #[test]
    fn round_trip() {
        let text =
            r#"{"kind":"residual-scan","k":2,"sweep":{"from":1e-2,"to":1e-6,"points":6},"seed":7}"#;
        let c = RunConfig::from_json(text).unwrap();
        let again = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_json(), again.to_json());
        assert_eq!(c.lambdas().len(), 6);
        assert!((c.lambdas()[0] - 1e-2).abs() < 1e-16);
    }

    #[test]
    fn overrides_replace_and_nest() {
        let text = r#"{"kind":"solve","sweep":{"from":1e-2,"to":1e-4,"points":3}}"#;
        let c = RunConfig::from_json_with(
            text,
            &[
                "lambda=1e-3".into(),
                r#"domain={"kind":"disk","radius":1}"#.into(),
                "domain.radius=2".into(),
                "k=2".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.lambda, Some(1e-3));
        assert!(c.sweep.is_none());
        assert_eq!(c.domain, DomainSpec::Disk { radius: 2.0 });
        assert_eq!(c.k, 2);
        assert!(RunConfig::from_json_with(text, &["nonsense".into()]).is_err());
    }

    #[test]
    fn kind_specific_rules() {
        assert!(RunConfig::from_json(r#"{"kind":"params"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"kind":"limit-checks"}"#).is_ok());
        let rect = r#"{"kind":"solve","lambda":0.01,"domain":{"kind":"rectangle","half_width":1,"half_height":1,"cells":64}}"#;
        assert!(RunConfig::from_json(rect).is_err());
        let bad_threshold = r#"{"kind":"params","lambda":0.01,"thresholds":{"nope":1}}"#;
        assert!(RunConfig::from_json(bad_threshold).is_err());
        let flat =
            r#"{"kind":"params","sweep":{"from":0.1,"to":0.01,"points":3,"geometric":false}}"#;
        assert!(RunConfig::from_json(flat).is_err());
    }
}
