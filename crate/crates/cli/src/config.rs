use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use subexp::claims::ClaimModel;
use subexp::ruinsets::RuinSetDescriptor;
use subexp::simulator::{Horizon, Interarrival, Solvency};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level experiment file. Exactly one experiment section is present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub diagnose: Option<DiagnoseSpec>,
    #[serde(default)]
    pub hcurve: Option<HcurveSpec>,
    #[serde(default)]
    pub ruin: Option<RuinSpec>,
    #[serde(default)]
    pub compare: Option<RuinSpec>,
    #[serde(default)]
    pub geometry: Option<GeometrySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Diagnose,
    Hcurve,
    Ruin,
    Compare,
    Geometry,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Diagnose => "diagnose",
            Kind::Hcurve => "hcurve",
            Kind::Ruin => "ruin",
            Kind::Compare => "compare",
            Kind::Geometry => "geometry",
        }
    }
}

impl ExperimentConfig {
    pub fn kind(&self) -> Result<Kind, String> {
        let present: Vec<Kind> = [
            (self.diagnose.is_some(), Kind::Diagnose),
            (self.hcurve.is_some(), Kind::Hcurve),
            (self.ruin.is_some(), Kind::Ruin),
            (self.compare.is_some(), Kind::Compare),
            (self.geometry.is_some(), Kind::Geometry),
        ]
        .into_iter()
        .filter_map(|(p, k)| p.then_some(k))
        .collect();
        match present.as_slice() {
            [k] => Ok(*k),
            [] => Err("no experiment section (expected one of diagnose, hcurve, ruin, compare, geometry)".into()),
            _ => Err("more than one experiment section".into()),
        }
    }
}

fn default_n() -> u64 {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSpec {
    pub model: ClaimModel,
    pub ruin_set: RuinSetDescriptor,
    #[serde(default = "default_n")]
    pub n: u64,
    /// Explicit levels `u`.
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    /// Levels given as quantiles of the scalarized law, resolved by sampling.
    #[serde(default)]
    pub quantiles: Option<Vec<f64>>,
    pub tests: Vec<DiagnosticTest>,
}

fn default_tol() -> f64 {
    0.05
}

fn default_points() -> usize {
    4000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagnosticTest {
    Empirical,
    Convolution {
        m: usize,
    },
    RandomSum {
        p: f64,
    },
    Translation {
        a: Vec<f64>,
    },
    Kesten {
        epsilon: f64,
        m_max: usize,
    },
    /// Deterministic convolution of the scalarized survival on a table.
    Numeric {
        t_max: f64,
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    LongTail {
        y: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    DominatedVariation,
}

impl DiagnosticTest {
    pub fn name(&self) -> &'static str {
        match self {
            DiagnosticTest::Empirical => "empirical",
            DiagnosticTest::Convolution { .. } => "convolution",
            DiagnosticTest::RandomSum { .. } => "random_sum",
            DiagnosticTest::Translation { .. } => "translation",
            DiagnosticTest::Kesten { .. } => "kesten",
            DiagnosticTest::Numeric { .. } => "numeric",
            DiagnosticTest::LongTail { .. } => "long_tail",
            DiagnosticTest::DominatedVariation => "dominated_variation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HMethod {
    #[default]
    Auto,
    Quadrature,
    Mc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HcurveSpec {
    pub model: ClaimModel,
    pub ruin_set: RuinSetDescriptor,
    /// Safety loading.
    pub c: Vec<f64>,
    pub levels: Vec<f64>,
    #[serde(default)]
    pub method: HMethod,
    #[serde(default = "default_n")]
    pub n: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuinSpec {
    pub claims: ClaimModel,
    pub interarrival: Interarrival,
    pub premium: Vec<f64>,
    pub allocation: Vec<f64>,
    pub solvency: Solvency,
    #[serde(default)]
    pub horizon: Horizon,
    pub levels: Vec<f64>,
    #[serde(default = "default_n")]
    pub n_paths: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub ruin_set: RuinSetDescriptor,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
}

fn default_levels() -> Vec<f64> {
    vec![1.0]
}

/// A validation failure with the 1-based line it points at.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Line of the first `"key"` at or after the line holding `"section"`.
pub fn locate(text: &str, section: &str, key: &str) -> usize {
    let lines: Vec<&str> = text.lines().collect();
    let quoted = |k: &str| format!("\"{k}\"");
    let start = lines.iter().position(|l| l.contains(&quoted(section))).unwrap_or(0);
    lines[start..]
        .iter()
        .position(|l| l.contains(&quoted(key)))
        .map(|i| start + i + 1)
        .unwrap_or(start + 1)
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| ConfigError { line: e.line(), message: e.to_string() })?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(ConfigError {
            line: locate(text, "schema_version", "schema_version"),
            message: format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
        });
    }
    cfg.kind().map_err(|message| ConfigError { line: 1, message })?;
    Ok(cfg)
}
