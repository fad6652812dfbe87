//! JSON configuration files, one schema per subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fracbayes::harness::PriorTemplate;
use fracbayes::metrics::Divergence;
use fracbayes::model::{DesignDistribution, LabelModel};
use fracbayes::sampler::SamplerConfig;
use fracbayes::{Error, Result};

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn logistic() -> LabelModel {
    LabelModel::Logistic
}

fn default_c1() -> f64 {
    fracbayes::priors::DEFAULT_C1
}

fn default_chains() -> usize {
    1
}

fn default_n_mc() -> usize {
    100_000
}

/// Where the data for `sample` comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    /// A dataset CSV written by this tool (with its JSON sidecar).
    File { path: PathBuf },
    /// Fresh synthetic data. Either `theta0` or `s_star` and `magnitude`.
    Generate {
        n: usize,
        design: DesignDistribution,
        #[serde(default)]
        theta0: Option<Vec<f64>>,
        #[serde(default)]
        s_star: Option<usize>,
        #[serde(default)]
        magnitude: Option<f64>,
        #[serde(default = "logistic")]
        link: LabelModel,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleConfig {
    pub data: DataSource,
    pub alpha: f64,
    pub prior: PriorTemplate,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub n: usize,
    pub d: usize,
    pub s_star: usize,
    pub alpha: f64,
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Margin exponent; 0 gives the margin-free rate.
    #[serde(default)]
    pub gamma: f64,
    /// `K1` directly, or estimated from `design`.
    #[serde(default)]
    pub k1: Option<f64>,
    #[serde(default)]
    pub design: Option<DesignDistribution>,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Parameters to evaluate: a single vector or a sample CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluated {
    Theta(Vec<f64>),
    Samples(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergeConfig {
    pub evaluate: Evaluated,
    pub theta0: Vec<f64>,
    #[serde(default = "logistic")]
    pub link: LabelModel,
    pub design: DesignDistribution,
    pub divergences: Vec<Divergence>,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskConfig {
    pub evaluate: Evaluated,
    pub theta0: Vec<f64>,
    pub design: DesignDistribution,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    /// Fit the margin exponent on this grid of `h` values when present.
    #[serde(default)]
    pub margin_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaConfig {
    pub n: usize,
    pub d: usize,
    pub s_star: usize,
    pub c1: f64,
    /// Truth; defaults to `s_star` leading coordinates equal to 1.
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
}
