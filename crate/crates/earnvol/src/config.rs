//! Experiment configuration: a TOML document naming data paths, the
//! convention, windows, models, quarters, and optional analyses.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use earnvol_core::baseline::{Aggregator, BaselineMode, MlpSettings};
use earnvol_core::event::Quarter;
use earnvol_core::mlp::TrainConfig;
use earnvol_core::vol::{VolConvention, STANDARD_WINDOWS};

use crate::error::{Error, Result};

/// A baseline named the way the result tables name them, e.g. `PEV(Mean)`,
/// `STPEV(Median)`, `STPEV(LR)`, `STPEV(MLP)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub mode: BaselineMode,
    pub agg: Aggregator,
}

impl ModelSpec {
    pub fn parse(name: &str, mlp: MlpSettings) -> Result<ModelSpec> {
        let bad = || Error::Usage(format!(
            "unknown model `{name}`; expected PEV(Mean), PEV(Median), STPEV(Mean), STPEV(Median), STPEV(LR) or STPEV(MLP)"
        ));
        let (mode, rest) = if let Some(rest) = name.strip_prefix("STPEV(") {
            (BaselineMode::Stpev, rest)
        } else if let Some(rest) = name.strip_prefix("PEV(") {
            (BaselineMode::Pev, rest)
        } else {
            return Err(bad());
        };
        let agg = match rest.strip_suffix(')') {
            Some("Mean") => Aggregator::Mean,
            Some("Median") => Aggregator::Median,
            Some("LR") => Aggregator::LinearRegression { ridge: None },
            Some("MLP") => Aggregator::Mlp(mlp),
            _ => return Err(bad()),
        };
        if mode == BaselineMode::Pev && !matches!(agg, Aggregator::Mean | Aggregator::Median) {
            return Err(bad());
        }
        Ok(ModelSpec { mode, agg })
    }

    pub fn label(&self) -> String {
        format!("{}({})", self.mode.label(), self.agg.label())
    }
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub data: DataSection,
    pub eval: EvalSection,
    #[serde(default)]
    pub mlp: MlpSection,
    pub output: OutputSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub prices_dir: PathBuf,
    pub earnings: PathBuf,
    #[serde(default)]
    pub extension: Option<ExtensionSection>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSection {
    pub prices_dir: PathBuf,
    pub earnings: PathBuf,
    #[serde(default = "default_years")]
    pub years: u32,
}

fn default_years() -> u32 {
    5
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    #[serde(default = "default_convention")]
    pub convention: String,
    #[serde(default = "default_taus")]
    pub taus: Vec<u32>,
    pub models: Vec<String>,
    pub quarters: Vec<String>,
    #[serde(default = "default_seed")]
    pub split_seed: u64,
}

fn default_convention() -> String {
    "paper_literal".into()
}

fn default_taus() -> Vec<u32> {
    STANDARD_WINDOWS.to_vec()
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpSection {
    pub hidden: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub seed: Option<u64>,
    pub patience: Option<usize>,
}

impl MlpSection {
    pub fn settings(&self) -> MlpSettings {
        let defaults = TrainConfig::default();
        MlpSettings {
            hidden: self.hidden.unwrap_or(512),
            train: TrainConfig {
                learning_rate: self.learning_rate.unwrap_or(defaults.learning_rate),
                batch_size: self.batch_size.unwrap_or(defaults.batch_size),
                max_epochs: self.max_epochs.unwrap_or(defaults.max_epochs),
                seed: self.seed.unwrap_or(defaults.seed),
                patience: self.patience.unwrap_or(defaults.patience),
            },
        }
    }
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub report: PathBuf,
    #[serde(default)]
    pub predictions_dir: Option<PathBuf>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Relative-day horizon for the announcement drift profile.
    pub drift_horizon: Option<usize>,
    #[serde(default = "default_drift_tau")]
    pub drift_tau: u32,
    /// `random_all`, `random_ticker`, or a path to a JSON-lines file.
    pub similarity: Option<String>,
    #[serde(default = "default_dim")]
    pub similarity_dim: usize,
    #[serde(default = "default_sim_seed")]
    pub similarity_seed: u64,
    /// Two model names whose pooled predictions are correlated per window.
    pub correlate: Option<[String; 2]>,
}

fn default_drift_tau() -> u32 {
    3
}

fn default_dim() -> usize {
    512
}

fn default_sim_seed() -> u64 {
    7
}

/// Validated experiment plan, resolved against the config file's directory.
#[derive(Debug)]
pub struct ExperimentPlan {
    pub prices_dir: PathBuf,
    pub earnings: PathBuf,
    pub extension: Option<(PathBuf, PathBuf, u32)>,
    pub convention: VolConvention,
    pub taus: Vec<u32>,
    pub models: Vec<(String, ModelSpec)>,
    pub quarters: Vec<Quarter>,
    pub split_seed: u64,
    pub mlp: MlpSettings,
    pub report: PathBuf,
    pub predictions_dir: Option<PathBuf>,
    pub drift: Option<(usize, u32)>,
    pub similarity: Option<SimilaritySource>,
    pub similarity_dim: usize,
    pub similarity_seed: u64,
    pub correlate: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimilaritySource {
    RandomAll,
    RandomTicker,
    File(PathBuf),
}

/// Parses and validates the config before any data is touched: model and
/// quarter names must be known, windows non-empty and at least 2 days.
pub fn load_plan(path: &Path) -> Result<ExperimentPlan> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{e}")))?;
    let base = path.parent().unwrap_or(Path::new("."));
    plan_from_raw(raw, base)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn plan_from_raw(raw: RawConfig, base: &Path) -> Result<ExperimentPlan> {
    let convention = VolConvention::from_str(&raw.eval.convention)
        .map_err(|_| Error::Config(format!("unknown convention `{}`", raw.eval.convention)))?;
    if raw.eval.taus.is_empty() {
        return Err(Error::Config("eval.taus must not be empty".into()));
    }
    if raw.eval.taus.iter().any(|t| *t < 2) {
        return Err(Error::Config("every window must be at least 2 trading days".into()));
    }
    if raw.eval.models.is_empty() {
        return Err(Error::Config("eval.models must not be empty".into()));
    }
    let mlp = raw.mlp.settings();
    let mut models = Vec::new();
    for name in &raw.eval.models {
        let spec = ModelSpec::parse(name, mlp).map_err(|e| Error::Config(format!("{e}")))?;
        models.push((name.clone(), spec));
    }
    let mut quarters = Vec::new();
    for q in &raw.eval.quarters {
        quarters
            .push(q.parse::<Quarter>().map_err(|e| Error::Config(format!("{e}")))?);
    }
    if quarters.is_empty() {
        return Err(Error::Config("eval.quarters must not be empty".into()));
    }
    let similarity = match raw.analysis.similarity.as_deref() {
        None => None,
        Some("random_all") => Some(SimilaritySource::RandomAll),
        Some("random_ticker") => Some(SimilaritySource::RandomTicker),
        Some(path) => Some(SimilaritySource::File(resolve(base, Path::new(path)))),
    };
    if let Some(pair) = &raw.analysis.correlate {
        for name in pair {
            if !raw.eval.models.iter().any(|m| m == name) {
                return Err(Error::Config(format!(
                    "analysis.correlate names `{name}`, which is not in eval.models"
                )));
            }
        }
    }
    Ok(ExperimentPlan {
        prices_dir: resolve(base, &raw.data.prices_dir),
        earnings: resolve(base, &raw.data.earnings),
        extension: raw
            .data
            .extension
            .map(|e| (resolve(base, &e.prices_dir), resolve(base, &e.earnings), e.years)),
        convention,
        taus: raw.eval.taus,
        models,
        quarters,
        split_seed: raw.eval.split_seed,
        mlp,
        report: resolve(base, &raw.output.report),
        predictions_dir: raw.output.predictions_dir.map(|p| resolve(base, &p)),
        drift: raw.analysis.drift_horizon.map(|h| (h, raw.analysis.drift_tau)),
        similarity,
        similarity_dim: raw.analysis.similarity_dim,
        similarity_seed: raw.analysis.similarity_seed,
        correlate: raw.analysis.correlate,
    })
}
