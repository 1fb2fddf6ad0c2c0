//! Flat TOML experiment configuration.

use std::path::{Path, PathBuf};

use lyapunov_lab::exponents::{BranchPolicy, RecurrenceReference};
use lyapunov_lab::hyperbolic::CriticalityMode;
use lyapunov_lab::lab::SampleRegion;
use lyapunov_lab::{Disk, MapSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidField { field, reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Orbit,
    CycleDetect,
    Lyapunov,
    Backward,
    Slowrec,
    Pliss,
    Hyptimes,
    Shadows,
    DensityReport,
    ReturnBound,
    CloseReturn,
    Fredholm,
    AreaScan,
    Porosity,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Orbit => "orbit",
            ExperimentKind::CycleDetect => "cycle-detect",
            ExperimentKind::Lyapunov => "lyapunov",
            ExperimentKind::Backward => "backward",
            ExperimentKind::Slowrec => "slowrec",
            ExperimentKind::Pliss => "pliss",
            ExperimentKind::Hyptimes => "hyptimes",
            ExperimentKind::Shadows => "shadows",
            ExperimentKind::DensityReport => "density-report",
            ExperimentKind::ReturnBound => "return-bound",
            ExperimentKind::CloseReturn => "close-return",
            ExperimentKind::Fredholm => "fredholm",
            ExperimentKind::AreaScan => "area-scan",
            ExperimentKind::Porosity => "porosity",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Unicritical,
    Exponential,
}

/// Every key is optional in the file; [`ExperimentConfig::validate`] fills
/// defaults and checks what the chosen kind needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[arg(long)]
    pub schema_version: Option<u32>,
    #[arg(skip)]
    pub kind: Option<ExperimentKind>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub degree: Option<u32>,
    /// Complex numbers are strings such as `"-2"`, `"0+1i"`, `"0.3-0.1i"`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub max_period: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// `fixed_angle:K`, `random:SEED` or `min_derivative`.
    #[arg(long)]
    pub policy: Option<String>,
    /// `critical_point` or `critical_value`.
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sequence: Option<Vec<f64>>,
    #[arg(long)]
    pub sequence_file: Option<PathBuf>,
    #[arg(long)]
    pub bound: Option<f64>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub n_cap: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// `shadow_proxy` or `certified_pullback`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub events: Option<usize>,
    #[arg(long)]
    pub max_tasks: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub region_from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub region_to: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub n_cut: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub scan_radius: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub eps_values: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub window_center: Option<String>,
    #[arg(long)]
    pub window_radius: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub j_values: Option<Vec<u32>>,
    #[arg(long)]
    pub escape_budget: Option<usize>,
    #[arg(long, value_enum)]
    pub sweep_kind: Option<ExperimentKind>,
    #[arg(long)]
    pub sweep_axis: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sweep_values: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_complex(field: &'static str, text: &str) -> Result<Complex64, ConfigError> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    cleaned
        .parse::<Complex64>()
        .map_err(|_| invalid(field, format!("`{text}` is not a complex number")))
}

fn positive(field: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Keys set in `over` replace those in `self`.
    pub fn overridden_by(&self, over: &ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
        let mut base = toml::Table::try_from(self).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let top = toml::Table::try_from(over).map_err(|e| ConfigError::Parse(e.to_string()))?;
        base.extend(top);
        base.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    /// Sets one key from its textual value, as a sweep axis does.
    pub fn with_key(&self, key: &str, value: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut table = toml::Table::try_from(self).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let parsed = match key {
            "c" | "a" | "point" | "t" | "region_from" | "region_to" | "window_center" | "policy" | "reference"
            | "mode" => toml::Value::String(value.to_owned()),
            _ => {
                let doc: toml::Table = format!("v = {value}")
                    .parse()
                    .map_err(|_| invalid("sweep_values", format!("`{value}` is not a value for `{key}`")))?;
                doc["v"].clone()
            }
        };
        table.insert(key.to_owned(), parsed);
        table.try_into().map_err(|e: toml::de::Error| invalid("sweep_axis", e.to_string()))
    }

    /// SHA-256 of the canonical JSON form without `out_dir` and `threads`.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        canonical.threads = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn kind(&self) -> Result<ExperimentKind, ConfigError> {
        self.kind.ok_or_else(|| invalid("kind", "missing"))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(ConfigError::Schema(v));
            }
        }
        let kind = self.kind()?;
        if kind == ExperimentKind::Sweep {
            let inner = self.sweep_kind.ok_or_else(|| invalid("sweep_kind", "required for a sweep"))?;
            if inner == ExperimentKind::Sweep {
                return Err(invalid("sweep_kind", "sweeps do not nest"));
            }
            if self.sweep_axis.is_none() {
                return Err(invalid("sweep_axis", "required for a sweep"));
            }
            return Ok(());
        }
        if kind != ExperimentKind::Pliss {
            self.map()?;
        }
        for (field, v) in [
            ("tol", self.tol),
            ("alpha", self.alpha),
            ("eps0", self.eps0),
            ("k", self.k),
            ("rho", self.rho),
            ("delta", self.delta),
            ("delta0", self.delta0),
            ("scan_radius", self.scan_radius),
            ("window_radius", self.window_radius),
        ] {
            if let Some(v) = v {
                positive(field, v)?;
            }
        }
        if let Some(l) = self.lambda {
            if !(l > 1.0 && l.is_finite()) {
                return Err(invalid("lambda", format!("must exceed 1, got {l}")));
            }
        }
        if matches!(self.grid, Some(0)) {
            return Err(invalid("grid", "must be at least 1"));
        }
        if let Some(t) = &self.t {
            if parse_complex("t", t)?.norm() >= 1.0 {
                return Err(invalid("t", "|t| must be below 1"));
            }
        }
        self.policy()?;
        self.reference()?;
        self.mode()?;
        if let Some(p) = &self.point {
            parse_complex("point", p)?;
        }
        self.region()?;
        self.window()?;
        if kind == ExperimentKind::Pliss && self.sequence.is_none() && self.sequence_file.is_none() {
            return Err(invalid("sequence", "pliss needs `sequence` or `sequence_file`"));
        }
        Ok(())
    }

    pub fn map(&self) -> Result<MapSpec, ConfigError> {
        match self.family.unwrap_or_default() {
            Family::Unicritical => {
                let c = parse_complex("c", self.c.as_deref().ok_or_else(|| invalid("c", "missing"))?)?;
                MapSpec::unicritical(self.degree.unwrap_or(2), c).map_err(|e| invalid("degree", e.to_string()))
            }
            Family::Exponential => {
                let a = parse_complex("a", self.a.as_deref().ok_or_else(|| invalid("a", "missing"))?)?;
                MapSpec::exponential(a).map_err(|e| invalid("a", e.to_string()))
            }
        }
    }

    /// The configured start point, or the marked point of the map.
    pub fn point(&self, map: &MapSpec) -> Result<Complex64, ConfigError> {
        match &self.point {
            Some(p) => parse_complex("point", p),
            None => Ok(map.marked_point()),
        }
    }

    pub fn complex_t(&self) -> Result<Option<Complex64>, ConfigError> {
        self.t.as_deref().map(|t| parse_complex("t", t)).transpose()
    }

    pub fn policy(&self) -> Result<BranchPolicy, ConfigError> {
        let text = self.policy.as_deref().unwrap_or("fixed_angle:0");
        let (name, arg) = text.split_once(':').unwrap_or((text, ""));
        let num = |what: &str| -> Result<u64, ConfigError> {
            arg.parse().map_err(|_| invalid("policy", format!("`{text}` needs an integer {what}")))
        };
        match name {
            "fixed_angle" => Ok(BranchPolicy::FixedAngle(num("branch index")? as u32)),
            "random" => Ok(BranchPolicy::RandomSeeded(num("seed")?)),
            "min_derivative" => Ok(BranchPolicy::MinDerivative),
            _ => Err(invalid("policy", format!("unknown policy `{text}`"))),
        }
    }

    pub fn reference(&self) -> Result<RecurrenceReference, ConfigError> {
        match self.reference.as_deref().unwrap_or("critical_value") {
            "critical_value" => Ok(RecurrenceReference::CriticalValue),
            "critical_point" => Ok(RecurrenceReference::CriticalPoint),
            other => Err(invalid("reference", format!("unknown reference `{other}`"))),
        }
    }

    pub fn mode(&self) -> Result<CriticalityMode, ConfigError> {
        match self.mode.as_deref().unwrap_or("shadow_proxy") {
            "shadow_proxy" => Ok(CriticalityMode::ShadowProxy),
            "certified_pullback" => Ok(CriticalityMode::CertifiedPullback),
            other => Err(invalid("mode", format!("unknown mode `{other}`"))),
        }
    }

    /// Campaign start region: the segment `region_from..region_to`, by default `[-2, 2]`.
    pub fn region(&self) -> Result<SampleRegion, ConfigError> {
        let from = parse_complex("region_from", self.region_from.as_deref().unwrap_or("-2"))?;
        let to = parse_complex("region_to", self.region_to.as_deref().unwrap_or("2"))?;
        Ok(SampleRegion::Segment { from, to })
    }

    pub fn window(&self) -> Result<Disk, ConfigError> {
        let center = parse_complex("window_center", self.window_center.as_deref().unwrap_or("0"))?;
        Disk::new(center, self.window_radius.unwrap_or(2.5)).map_err(|e| invalid("window_radius", e.to_string()))
    }

    pub fn sequence_values(&self, base: &Path) -> Result<Vec<f64>, ConfigError> {
        if let Some(seq) = &self.sequence {
            return Ok(seq.clone());
        }
        let rel = self.sequence_file.as_ref().ok_or_else(|| invalid("sequence", "missing"))?;
        let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
        read_sequence(&text).map_err(|reason| invalid("sequence_file", reason))
    }
}

/// Numbers separated by commas, whitespace or newlines; a non-numeric first
/// line is taken as a header.
pub fn read_sequence(text: &str) -> Result<Vec<f64>, String> {
    let mut lines = text.lines().peekable();
    if let Some(first) = lines.peek() {
        if first.split([',', ' ', '\t']).filter(|s| !s.is_empty()).any(|s| s.trim().parse::<f64>().is_err()) {
            lines.next();
        }
    }
    lines
        .flat_map(|l| l.split([',', ' ', '\t']).map(str::trim).filter(|s| !s.is_empty()).collect::<Vec<_>>())
        .map(|s| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml_str(
            "schema_version = 1\nkind = \"lyapunov\"\nc = \"-2\"\nn_max = 50\n",
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.map().unwrap(), MapSpec::quadratic(Complex64::new(-2.0, 0.0)));
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = |text: &str| ExperimentConfig::from_toml_str(text).and_then(|c| c.validate());
        assert!(matches!(bad("kind = \"orbit\"\nc = \"x\"\n"), Err(ConfigError::InvalidField { field: "c", .. })));
        assert!(matches!(bad("kind = \"orbit\"\nc = \"0\"\nlambda = 0.5\n"), Err(ConfigError::InvalidField { field: "lambda", .. })));
        assert!(matches!(bad("kind = \"orbit\"\nbogus = 1\n"), Err(ConfigError::Parse(_))));
        assert!(matches!(bad("schema_version = 9\nkind = \"orbit\"\nc = \"0\"\n"), Err(ConfigError::Schema(9))));
        assert!(matches!(bad("c = \"0\"\n"), Err(ConfigError::InvalidField { field: "kind", .. })));
    }

    #[test]
    fn complex_syntax() {
        for (text, z) in [("-2", (-2.0, 0.0)), ("0+1i", (0.0, 1.0)), ("0.25 - 0.5i", (0.25, -0.5)), ("i", (0.0, 1.0))] {
            assert_eq!(parse_complex("c", text).unwrap(), Complex64::new(z.0, z.1), "{text}");
        }
    }

    #[test]
    fn digest_ignores_plumbing() {
        let mut a = ExperimentConfig::from_toml_str("kind = \"orbit\"\nc = \"-2\"\n").unwrap();
        let d = a.digest();
        a.out_dir = Some("elsewhere".into());
        a.threads = Some(3);
        assert_eq!(a.digest(), d);
        a.seed = Some(1);
        assert_ne!(a.digest(), d);
    }

    #[test]
    fn override_and_sweep_keys() {
        let base = ExperimentConfig::from_toml_str("kind = \"orbit\"\nc = \"-2\"\nn_max = 5\n").unwrap();
        let over = ExperimentConfig { n_max: Some(9), ..Default::default() };
        let merged = base.overridden_by(&over).unwrap();
        assert_eq!((merged.n_max, merged.c.as_deref()), (Some(9), Some("-2")));
        let swept = base.with_key("c", "0+1i").unwrap().with_key("lambda", "1.5").unwrap();
        assert_eq!((swept.c.as_deref(), swept.lambda), (Some("0+1i"), Some(1.5)));
        assert!(base.with_key("n_max", "abc").is_err());
    }

    #[test]
    fn sequence_files() {
        assert_eq!(read_sequence("a\n2\n0.5\n0.5\n").unwrap(), vec![2.0, 0.5, 0.5]);
        assert_eq!(read_sequence("1, 2 3\n4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(read_sequence("1\nx\n").is_err());
    }
}
