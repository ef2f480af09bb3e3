//! Run configuration: one JSON file with optional sections per subcommand.
//! Unknown keys are rejected with the offending key path.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use taskmarket::econ::InstrumentSpec;
use taskmarket::model::EconomyConfig;
use taskmarket::synth::SynthConfig;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub economy: Option<EconomyConfig>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub metrics: Option<MetricsSection>,
    #[serde(default)]
    pub classifier: Option<ClassifierSection>,
    #[serde(default)]
    pub panel: Option<PanelSection>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Either an explicit list of capability levels or an even grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    List { list: Vec<f64> },
    Range { min: f64, max: f64, count: usize },
}

impl ThetaGrid {
    pub fn materialize(&self) -> Result<Vec<f64>, CliError> {
        let thetas = match self {
            ThetaGrid::List { list } => list.clone(),
            ThetaGrid::Range { min, max, count } => {
                if *count == 0 {
                    return Err(CliError::usage("sweep.thetas.count must be at least 1"));
                }
                if *count == 1 {
                    vec![*min]
                } else {
                    (0..*count)
                        .map(|i| min + (max - min) * i as f64 / (*count as f64 - 1.0))
                        .collect()
                }
            }
        };
        if thetas.is_empty() {
            return Err(CliError::usage("sweep.thetas must not be empty"));
        }
        if thetas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::usage("sweep.thetas must be strictly increasing"));
        }
        Ok(thetas)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub thetas: ThetaGrid,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_scan_points() -> usize {
    taskmarket::assignment::DEFAULT_SCAN_POINTS
}

fn default_tolerance() -> f64 {
    taskmarket::assignment::DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    #[serde(default)]
    pub weights: Option<taskmarket::metrics::TaskWeights>,
    #[serde(default = "default_winsor_lo")]
    pub winsor_lo: f64,
    #[serde(default = "default_winsor_hi")]
    pub winsor_hi: f64,
}

fn default_winsor_lo() -> f64 {
    0.01
}

fn default_winsor_hi() -> f64 {
    0.99
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    #[serde(default)]
    pub lexicon_path: Option<PathBuf>,
    #[serde(default)]
    pub stub_path: Option<PathBuf>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
}

fn default_batch_size() -> usize {
    30
}

fn default_concurrency() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelSection {
    #[serde(default)]
    pub synth: Option<SynthConfig>,
    #[serde(default)]
    pub estimations: Vec<EstimationEntry>,
}

/// One estimation request: a regression design plus which estimator
/// variants to run. The instrumental variants derive their instruments
/// from the endogenous column: `iv_loo` uses the leave-one-out group mean,
/// `iv_lagged` uses lagged values.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationEntry {
    pub name: String,
    pub outcome: String,
    pub regressors: Vec<String>,
    #[serde(default)]
    pub fe_factors: Vec<String>,
    #[serde(default)]
    pub cluster: Option<String>,
    #[serde(default)]
    pub instruments: Option<InstrumentSpec>,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    /// Endogenous column for the derived-instrument variants.
    #[serde(default = "default_endogenous")]
    pub endogenous: String,
    /// Grouping columns for the leave-one-out instrument.
    #[serde(default = "default_loo_group")]
    pub loo_group: Vec<String>,
    /// Lags (in periods) for the lagged-instrument variant.
    #[serde(default = "default_lags")]
    pub lags: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Ols,
    IvLoo,
    IvLagged,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Ols => "ols",
            Variant::IvLoo => "iv_loo",
            Variant::IvLagged => "iv_lagged",
        }
    }
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::Ols]
}

fn default_endogenous() -> String {
    "digital".to_string()
}

fn default_loo_group() -> Vec<String> {
    vec!["city".to_string(), "year".to_string()]
}

fn default_lags() -> Vec<u32> {
    vec![1]
}

/// Loads and parses a config, reporting unknown or malformed keys with
/// their full path.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let deserializer = &mut serde_json::Deserializer::from_str(&text);
    let config: RunConfig = serde_path_to_error::deserialize(deserializer).map_err(|e| {
        CliError::usage(format!(
            "config {}: at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })?;
    if let Some(economy) = &config.economy {
        economy
            .validate()
            .map_err(|e| CliError::usage(format!("config {}: economy: {e}", path.display())))?;
    }
    Ok(config)
}
