//! JSON-serializable experiment descriptions.

use std::fs;
use std::path::{Path, PathBuf};

use ldp_sgd::bootstrap::{BlockSpec, MultiplierLaw};
use ldp_sgd::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Data-generating law for the scalar quantile model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataLaw {
    #[default]
    StandardNormal,
}

/// Which estimation problem a run solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Scalar tau-quantile of `law`, privatized by randomized response.
    Quantile {
        tau: f64,
        #[serde(default)]
        law: DataLaw,
    },
    /// Linear tau-quantile regression with true coefficients `beta_star`,
    /// privatized by the Laplace mechanism.
    Quantreg { tau: f64, beta_star: Vec<f64> },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Quantile { .. } => 1,
            ModelSpec::Quantreg { beta_star, .. } => beta_star.len(),
        }
    }
}

/// Interval construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Multiplier block bootstrap quantile interval.
    #[value(name = "bb")]
    #[serde(alias = "bb")]
    BlockBootstrap,
    /// Batch-mean covariance with normal quantiles.
    #[value(name = "bm")]
    #[serde(alias = "bm")]
    BatchMean,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::BlockBootstrap => "bb",
            Method::BatchMean => "bm",
        }
    }
}

/// Step sizes `eta_i = c * i^{-gamma}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleSpec {
    pub c: f64,
    pub gamma: f64,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self { c: 1.0, gamma: 0.51 }
    }
}

/// Bootstrap tuning: replicate count B, block geometry, tail level, and
/// multiplier law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapSpec {
    pub replicates: usize,
    pub block: BlockSpec,
    pub alpha: f64,
    pub multiplier: MultiplierLaw,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        Self {
            replicates: 500,
            block: BlockSpec::Exponent(0.75),
            alpha: 0.05,
            multiplier: MultiplierLaw::default(),
        }
    }
}

/// Optional file destinations for the report pieces.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    /// Per-replication rows as CSV.
    pub rows: Option<PathBuf>,
    /// Aggregate header as JSON.
    pub summary: Option<PathBuf>,
}

/// One cell of a coverage study, round-trippable through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub method: Method,
    /// SGD run length per replication.
    pub n: u64,
    /// Per-datum privacy budget; `None` runs without noise.
    #[serde(default)]
    pub privacy_epsilon: Option<f64>,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub bootstrap: BootstrapSpec,
    /// Monte Carlo replication count M.
    pub replications: u64,
    pub master_seed: u64,
    /// Starting iterate; defaults to the origin.
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("malformed experiment spec: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read spec file {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("spec serialization");
        text.push('\n');
        text
    }
}
