//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use rgue::contours::QuadratureSettings;
use rgue::kernels::{Configuration, ScalingVariant};
use rgue::sampling::EntryDistribution;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Top-level document. Command-specific settings live under `params`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// The `params` object as a command-specific type.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        let value = if self.params.is_null() { serde_json::json!({}) } else { self.params.clone() };
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("params: {e}")))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("seed: required for stochastic commands".into()))
    }

    pub fn validate_quadrature(&self) -> Result<(), CliError> {
        let q = &self.quadrature;
        if q.nodes_per_panel == 0 || q.max_panels == 0 {
            return Err(CliError::Config("quadrature: node and panel counts must be positive".into()));
        }
        if !(q.abs_tol > 0.0 && q.rel_tol > 0.0) {
            return Err(CliError::Config("quadrature: tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Where a starting configuration comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConfigSource {
    Explicit(Vec<f64>),
    SemicircleQuantiles(usize),
    /// One level of one replica of a `sample` CSV (`replica,level,index,value`).
    FromSample { path: PathBuf, replica: usize, level: usize },
}

impl ConfigSource {
    pub fn resolve(&self, field: &str) -> Result<Configuration, CliError> {
        let bad = |msg: String| CliError::Config(format!("{field}: {msg}"));
        match self {
            ConfigSource::Explicit(v) => Configuration::new(v.clone()).map_err(|e| bad(e.to_string())),
            ConfigSource::SemicircleQuantiles(m) => Ok(Configuration::semicircle_quantiles(*m)),
            ConfigSource::FromSample { path, replica, level } => {
                let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
                let mut values = Vec::new();
                for (i, line) in text.lines().enumerate().skip(1) {
                    let cols: Vec<&str> = line.split(',').collect();
                    if cols.len() != 4 {
                        return Err(bad(format!("{} line {}: expected 4 columns", path.display(), i + 1)));
                    }
                    let parse_err = || bad(format!("{} line {}: malformed number", path.display(), i + 1));
                    let r: usize = cols[0].parse().map_err(|_| parse_err())?;
                    let l: usize = cols[1].parse().map_err(|_| parse_err())?;
                    if r == *replica && l == *level {
                        values.push(cols[3].parse::<f64>().map_err(|_| parse_err())?);
                    }
                }
                if values.is_empty() {
                    return Err(bad(format!("no rows for replica {replica}, level {level}")));
                }
                Configuration::from_unsorted(values).map_err(|e| bad(e.to_string()))
            }
        }
    }
}

/// Evenly spaced points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        if self.points == 0 || !(self.lo.is_finite() && self.hi.is_finite()) || (self.points > 1 && self.hi <= self.lo) {
            return Err(CliError::Config(format!("{field}: need finite lo < hi and points >= 1")));
        }
        if self.points == 1 {
            return Ok(vec![self.lo]);
        }
        let h = (self.hi - self.lo) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.lo + h * i as f64).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum KernelFamily {
    FixedStart { cfg: ConfigSource },
    FixedStartTermsum { cfg: ConfigSource },
    /// Fixed top row (uniform Gelfand-Tsetlin pattern below it).
    FixedTop { cfg: ConfigSource },
    /// Levels are offsets from `m + t`, positions are bulk offsets around `energy`.
    FixedStartBulk { cfg: ConfigSource, energy: f64, t: usize },
    /// Single-level GUE kernel; `n1` and `n2` must both equal `n`.
    GueLevel { n: usize },
    /// Parameter `a = [re, im]`, or the bulk value at `energy`.
    ExtendedSine {
        #[serde(default)]
        a: Option<[f64; 2]>,
        #[serde(default)]
        energy: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalKernelParams {
    pub kernel: KernelFamily,
    pub n1: i64,
    pub n2: i64,
    pub x1: Axis,
    pub x2: Axis,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SampleModel {
    GueMinors { n: usize },
    Wigner {
        n: usize,
        dist: EntryDistribution,
        #[serde(default)]
        levels: Option<Vec<usize>>,
    },
    Rising {
        cfg: ConfigSource,
        t: usize,
        #[serde(default)]
        levels: Option<Vec<usize>>,
    },
    GtUniform { top: ConfigSource },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleParams {
    pub model: SampleModel,
    pub replicas: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum CorrModel {
    Gue { n: usize },
    Wigner { n: usize, dist: EntryDistribution },
    Rising { cfg: ConfigSource, t: usize },
}

fn default_bins() -> usize {
    32
}

fn default_window() -> [f64; 2] {
    [-4.0, 4.0]
}

fn default_scaling() -> ScalingVariant {
    ScalingVariant::Density
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrParams {
    pub model: CorrModel,
    pub replicas: usize,
    /// Correlation order, 1 or 2.
    pub k: usize,
    #[serde(default)]
    pub energy: f64,
    /// Level to analyse; defaults to the top level of the model.
    #[serde(default)]
    pub level: Option<usize>,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_scaling")]
    pub scaling: ScalingVariant,
}

fn default_grid() -> Axis {
    Axis { lo: -2.0, hi: 2.0, points: 21 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeParams {
    pub cfg: ConfigSource,
    #[serde(default)]
    pub energy: f64,
    pub ts: Vec<usize>,
    #[serde(default = "default_grid")]
    pub grid: Axis,
}

fn default_r() -> f64 {
    2.0
}

fn default_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleParams {
    /// Sizes of the semicircle-quantile configurations.
    pub ms: Vec<usize>,
    pub energies: Vec<f64>,
    /// Horizon; defaults to `ceil(m^0.4)`.
    #[serde(default)]
    pub t: Option<usize>,
    /// Cutoff multiple `R` for `d_m(R)`.
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingParams {
    pub cfg: ConfigSource,
    pub ns: Vec<usize>,
    /// Limit points `[level, x]`.
    pub points: Vec<(usize, f64)>,
}

fn default_orders() -> Vec<usize> {
    vec![1, 2]
}

fn default_dist() -> EntryDistribution {
    EntryDistribution::RademacherComplex
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareWignerParams {
    pub n: usize,
    pub replicas: usize,
    #[serde(default = "default_dist")]
    pub dist: EntryDistribution,
    #[serde(default)]
    pub energy: f64,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_scaling")]
    pub scaling: ScalingVariant,
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
}

pub fn positive(value: usize, field: &str) -> Result<(), CliError> {
    if value == 0 {
        return Err(CliError::Config(format!("{field}: must be positive")));
    }
    Ok(())
}

pub fn bulk_energy(energy: f64, field: &str) -> Result<(), CliError> {
    if !(energy.abs() < 2.0) {
        return Err(CliError::Config(format!("{field}: must lie in (-2, 2), got {energy}")));
    }
    Ok(())
}
