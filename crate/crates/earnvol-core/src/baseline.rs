//! Training-free volatility predictors.
//!
//! PEV aggregates every post-earnings volatility in the training pool; STPEV
//! aggregates only the same ticker's prior values, falling back to PEV when a
//! ticker has no history. Mean and Median need no fitting at all; the LR and
//! MLP variants fit one small model per (quarter, window) on the pool's
//! history rows.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::embed::EmbeddingSet;
use crate::event::EventId;
use crate::mlp::{mlp_train, MlpError, TrainConfig};
use crate::ridge::{ridge_fit, ridge_fit_pinned, LinearModel, RidgeError};
use crate::stats;
use crate::table::{EventTable, Split};

/// Ridge grid searched by cross-validation, ascending so ties resolve to the
/// smallest penalty.
pub const RIDGE_GRID: [f64; 5] = [0.0, 1e-4, 1e-2, 1.0, 10.0];

/// Neighbourhood size for the embedding-similarity predictor.
pub const DEFAULT_KNN: usize = 8;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum BaselineError {
    #[error("empty training pool")]
    EmptyPool,
    #[error("PEV supports only the Mean and Median aggregators")]
    UnsupportedAggregator,
    #[error("validation pool is empty; the MLP variant needs one")]
    EmptyValidationPool,
    #[error("missing volatility record for {event} at tau={tau}")]
    MissingRecord { event: EventId, tau: u32 },
    #[error("non-finite prediction for {event} at tau={tau}")]
    NonFinitePrediction { event: EventId, tau: u32 },
    #[error("no embedding vector for {0}")]
    MissingEmbedding(EventId),
    #[error(transparent)]
    Ridge(#[from] RidgeError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
}

/// MLP settings for the STPEV(MLP) variant: a 512-wide hidden layer unless
/// overridden, trained with the seeded defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpSettings {
    pub hidden: usize,
    pub train: TrainConfig,
}

impl Default for MlpSettings {
    fn default() -> Self {
        MlpSettings { hidden: 512, train: TrainConfig::default() }
    }
}

/// Aggregation function applied to the historical volatilities. The linear
/// variant cross-validates its ridge over [`RIDGE_GRID`] unless a fixed value
/// is supplied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Aggregator {
    Mean,
    Median,
    LinearRegression { ridge: Option<f64> },
    Mlp(MlpSettings),
}

impl Aggregator {
    pub fn label(&self) -> &'static str {
        match self {
            Aggregator::Mean => "Mean",
            Aggregator::Median => "Median",
            Aggregator::LinearRegression { .. } => "LR",
            Aggregator::Mlp(_) => "MLP",
        }
    }

    fn is_training_free(&self) -> bool {
        matches!(self, Aggregator::Mean | Aggregator::Median)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineMode {
    Pev,
    Stpev,
}

impl BaselineMode {
    pub fn label(&self) -> &'static str {
        match self {
            BaselineMode::Pev => "PEV",
            BaselineMode::Stpev => "STPEV",
        }
    }
}

/// Per-event, per-window predicted log-volatility.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet {
    pub model: String,
    pub predictions: BTreeMap<EventId, BTreeMap<u32, f64>>,
}

impl PredictionSet {
    pub fn new(model: impl Into<String>) -> Self {
        PredictionSet { model: model.into(), predictions: BTreeMap::new() }
    }

    pub fn insert(&mut self, event: EventId, tau: u32, value: f64) {
        self.predictions.entry(event).or_default().insert(tau, value);
    }

    pub fn get(&self, event: &EventId, tau: u32) -> Option<f64> {
        self.predictions.get(event).and_then(|m| m.get(&tau)).copied()
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

/// One baseline evaluated on one split, with fallback bookkeeping.
#[derive(Clone, Debug)]
pub struct BaselineRun {
    pub predictions: PredictionSet,
    /// Per window: test events that fell back to the pool-level prediction.
    pub fallbacks: BTreeMap<u32, usize>,
    pub warnings: Vec<String>,
}

/// The pool-level prediction: one aggregate over every training-pool value
/// for the window, shared by all test events.
pub fn pev_predict(pool: &[f64], agg: &Aggregator) -> Result<f64, BaselineError> {
    if pool.is_empty() {
        return Err(BaselineError::EmptyPool);
    }
    match agg {
        Aggregator::Mean => Ok(stats::mean(pool)?),
        Aggregator::Median => Ok(stats::median(pool)?),
        _ => Err(BaselineError::UnsupportedAggregator),
    }
}

/// Same-ticker aggregate, or `None` when the ticker has no prior earnings
/// (the caller falls back to [`pev_predict`] and records it).
pub fn stpev_predict(history: &[f64], agg: &Aggregator) -> Result<Option<f64>, BaselineError> {
    if history.is_empty() {
        return Ok(None);
    }
    match agg {
        Aggregator::Mean => Ok(Some(stats::mean(history)?)),
        Aggregator::Median => Ok(Some(stats::median(history)?)),
        _ => Err(BaselineError::UnsupportedAggregator),
    }
}

/// One training row for the fitted STPEV variants: the event's prior
/// same-ticker volatilities (chronological) and its realized value.
#[derive(Clone, Debug)]
pub struct HistoryRow {
    pub event: EventId,
    pub history: Vec<f64>,
    pub target: f64,
    pub in_val: bool,
}

/// A model fitted for one (quarter, window) pair. Prediction consumes the
/// most recent `dim` entries of a history.
#[derive(Clone, Debug)]
pub struct QuarterModel {
    pub dim: usize,
    pub truncated: bool,
    pub warnings: Vec<String>,
    inner: QuarterModelInner,
}

#[derive(Clone, Debug)]
enum QuarterModelInner {
    Linear(LinearModel),
    Mlp(crate::mlp::MlpModel),
}

impl QuarterModel {
    pub fn predict(&self, history: &[f64]) -> Option<f64> {
        if history.len() < self.dim {
            return None;
        }
        let tail = &history[history.len() - self.dim..];
        Some(match &self.inner {
            QuarterModelInner::Linear(m) => m.predict(tail),
            QuarterModelInner::Mlp(m) => m.predict(tail),
        })
    }

    pub fn linear(&self) -> Option<&LinearModel> {
        match &self.inner {
            QuarterModelInner::Linear(m) => Some(m),
            QuarterModelInner::Mlp(_) => None,
        }
    }
}

/// Fits the quarter's model on the pool's history rows.
///
/// Rows without history are dropped. When the kept rows disagree on history
/// length, every history is truncated to the common minimum suffix and the
/// fit is flagged. The ridge is chosen by k-fold cross-validation (k = 5, or
/// leave-one-out below 10 rows) over [`RIDGE_GRID`] by mean validation MSE,
/// ties to the smallest; a fixed ridge skips the search. Singular fits at
/// ridge zero fall back to a pinned solve, which interpolates and warns.
pub fn fit_quarter_model(rows: &[HistoryRow], agg: &Aggregator) -> Result<QuarterModel, BaselineError> {
    let kept: Vec<&HistoryRow> = rows.iter().filter(|r| !r.history.is_empty()).collect();
    if kept.is_empty() {
        return Err(BaselineError::EmptyPool);
    }
    let dim = kept.iter().map(|r| r.history.len()).min().expect("non-empty");
    let truncated = kept.iter().any(|r| r.history.len() != dim);
    let mut warnings = Vec::new();
    if truncated {
        warnings.push(format!(
            "unequal history lengths in pool; fitting on the common minimum suffix of {dim}"
        ));
    }

    let mut sorted: Vec<&HistoryRow> = kept.clone();
    sorted.sort_by(|a, b| a.event.cmp(&b.event));
    let x: Vec<Vec<f64>> =
        sorted.iter().map(|r| r.history[r.history.len() - dim..].to_vec()).collect();
    let y: Vec<f64> = sorted.iter().map(|r| r.target).collect();

    let inner = match agg {
        Aggregator::LinearRegression { ridge } => {
            let chosen = match ridge {
                Some(r) => *r,
                None => select_ridge(&x, &y),
            };
            let model = match ridge_fit(&x, &y, chosen) {
                Ok(m) => m,
                Err(RidgeError::SingularDesign) => {
                    let (m, pinned) = ridge_fit_pinned(&x, &y, chosen)?;
                    warnings.push(format!(
                        "singular normal equations at ridge {chosen}; pinned {pinned} parameter(s), solution interpolates the pool"
                    ));
                    m
                }
                Err(e) => return Err(e.into()),
            };
            QuarterModelInner::Linear(model)
        }
        Aggregator::Mlp(settings) => {
            let mut xt = Vec::new();
            let mut yt = Vec::new();
            let mut xv = Vec::new();
            let mut yv = Vec::new();
            for (row, (xi, yi)) in sorted.iter().zip(x.iter().zip(&y)) {
                if row.in_val {
                    xv.push(xi.clone());
                    yv.push(*yi);
                } else {
                    xt.push(xi.clone());
                    yt.push(*yi);
                }
            }
            if xv.is_empty() {
                return Err(BaselineError::EmptyValidationPool);
            }
            let trained = mlp_train(&xt, &yt, &xv, &yv, settings.hidden, &settings.train)?;
            QuarterModelInner::Mlp(trained.model)
        }
        _ => return Err(BaselineError::UnsupportedAggregator),
    };
    Ok(QuarterModel { dim, truncated, warnings, inner })
}

/// Mean k-fold validation MSE for each grid ridge; first strict improvement
/// wins so ties go to the smallest penalty.
fn select_ridge(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = x.len();
    let k = if n < 10 { n } else { 5 };
    if k < 2 {
        // A single row cannot be cross-validated; the smallest grid ridge
        // giving a solvable system is used downstream anyway.
        return RIDGE_GRID[0];
    }
    let mut best = RIDGE_GRID[0];
    let mut best_mse = f64::INFINITY;
    for &ridge in RIDGE_GRID.iter() {
        let mut total = 0.0;
        let mut folds_used = 0usize;
        for fold in 0..k {
            let mut xt = Vec::new();
            let mut yt = Vec::new();
            let mut xv = Vec::new();
            let mut yv = Vec::new();
            for i in 0..n {
                if i % k == fold {
                    xv.push(x[i].clone());
                    yv.push(y[i]);
                } else {
                    xt.push(x[i].clone());
                    yt.push(y[i]);
                }
            }
            if xt.is_empty() || xv.is_empty() {
                continue;
            }
            let model = match ridge_fit(&xt, &yt, ridge) {
                Ok(m) => m,
                Err(_) => match ridge_fit_pinned(&xt, &yt, ridge) {
                    Ok((m, _)) => m,
                    Err(_) => continue,
                },
            };
            let mse: f64 = xv
                .iter()
                .zip(&yv)
                .map(|(row, t)| {
                    let e = model.predict(row) - t;
                    e * e
                })
                .sum::<f64>()
                / xv.len() as f64;
            total += mse;
            folds_used += 1;
        }
        if folds_used == 0 {
            continue;
        }
        let mean_mse = total / folds_used as f64;
        if mean_mse < best_mse {
            best_mse = mean_mse;
            best = ridge;
        }
    }
    best
}

/// Runs one baseline over a split, producing a prediction for every
/// (test event, window). Deterministic given the table, split, and
/// aggregator settings.
pub fn run_baseline(
    table: &EventTable,
    split: &Split,
    tau_set: &[u32],
    agg: &Aggregator,
    mode: BaselineMode,
) -> Result<BaselineRun, BaselineError> {
    let label = format!("{}({})", mode.label(), agg.label());
    let mut predictions = PredictionSet::new(label);
    let mut fallbacks: BTreeMap<u32, usize> = BTreeMap::new();
    let mut warnings: Vec<String> = Vec::new();

    if mode == BaselineMode::Pev && !agg.is_training_free() {
        return Err(BaselineError::UnsupportedAggregator);
    }

    let pool_ids: Vec<&EventId> = split.pool().collect();
    let val_ids: BTreeSet<&EventId> = split.val.iter().collect();

    for &tau in tau_set {
        let mut pool_values = Vec::with_capacity(pool_ids.len());
        for id in &pool_ids {
            let rec = table
                .record(id, tau)
                .ok_or_else(|| BaselineError::MissingRecord { event: (*id).clone(), tau })?;
            pool_values.push(rec.value);
        }
        let fallback_value = match agg {
            Aggregator::Mean | Aggregator::Median => pev_predict(&pool_values, agg)?,
            // The fitted variants fall back to the pool mean.
            _ => pev_predict(&pool_values, &Aggregator::Mean)?,
        };

        let quarter_model = match (mode, agg.is_training_free()) {
            (BaselineMode::Stpev, false) => {
                let rows: Vec<HistoryRow> = pool_ids
                    .iter()
                    .filter_map(|id| {
                        let event = table.event(id)?;
                        let target = table.record(id, tau)?.value;
                        let history = table.history_values(event, tau);
                        Some(HistoryRow {
                            event: (*id).clone(),
                            history,
                            target,
                            in_val: val_ids.contains(id),
                        })
                    })
                    .collect();
                let model = fit_quarter_model(&rows, agg)?;
                for w in &model.warnings {
                    warnings.push(format!("tau={tau}: {w}"));
                }
                Some(model)
            }
            _ => None,
        };

        for id in &split.test {
            let event = table
                .event(id)
                .ok_or_else(|| BaselineError::MissingRecord { event: id.clone(), tau })?;
            let value = match mode {
                BaselineMode::Pev => fallback_value,
                BaselineMode::Stpev => {
                    let history = table.history_values(event, tau);
                    let predicted = match &quarter_model {
                        Some(model) => model.predict(&history),
                        None => stpev_predict(&history, agg)?,
                    };
                    match predicted {
                        Some(v) => v,
                        None => {
                            *fallbacks.entry(tau).or_insert(0) += 1;
                            fallback_value
                        }
                    }
                }
            };
            if !value.is_finite() {
                return Err(BaselineError::NonFinitePrediction { event: id.clone(), tau });
            }
            predictions.insert(id.clone(), tau, value);
        }
    }
    Ok(BaselineRun { predictions, fallbacks, warnings })
}

/// Embedding-similarity predictor: each test event is scored as the mean
/// realized volatility of its `k` most cosine-similar training-pool events
/// (ties broken by event id). A deterministic, fit-free stand-in for
/// representation-driven models.
pub fn embedding_knn_predict(
    table: &EventTable,
    split: &Split,
    embeddings: &EmbeddingSet,
    tau_set: &[u32],
    k: usize,
) -> Result<PredictionSet, BaselineError> {
    let mut predictions =
        PredictionSet::new(format!("KNN{k}({})", embeddings.source()));
    let pool_ids: Vec<&EventId> = split.pool().collect();
    if pool_ids.is_empty() {
        return Err(BaselineError::EmptyPool);
    }
    for id in &split.test {
        let query = embeddings
            .get(id)
            .ok_or_else(|| BaselineError::MissingEmbedding(id.clone()))?;
        let mut scored: Vec<(f64, &EventId)> = Vec::with_capacity(pool_ids.len());
        for pid in &pool_ids {
            let v = embeddings
                .get(pid)
                .ok_or_else(|| BaselineError::MissingEmbedding((*pid).clone()))?;
            scored.push((crate::embed::cosine(query, v), pid));
        }
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite cosines").then(a.1.cmp(b.1)));
        let take = k.min(scored.len());
        for &tau in tau_set {
            let mut acc = 0.0;
            for (_, pid) in &scored[..take] {
                let rec = table
                    .record(pid, tau)
                    .ok_or_else(|| BaselineError::MissingRecord { event: (*pid).clone(), tau })?;
                acc += rec.value;
            }
            predictions.insert(id.clone(), tau, acc / take as f64);
        }
    }
    Ok(predictions)
}
