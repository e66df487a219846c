//! MSE scoring and report assembly in the evaluation tables' layout.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::baseline::{BaselineRun, PredictionSet};
use crate::event::{EventId, Quarter};
use crate::stats;
use crate::table::{EventTable, Split};
use crate::vol::VolConvention;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum EvalError {
    #[error("missing prediction for {event} at tau={tau}")]
    MissingPrediction { event: EventId, tau: u32 },
    #[error("missing volatility record for {event} at tau={tau}")]
    MissingTruth { event: EventId, tau: u32 },
    #[error("empty test set")]
    EmptyTestSet,
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
}

/// Mean squared error of the predictions against the test set's realized
/// volatilities at one window.
pub fn mse(
    preds: &PredictionSet,
    table: &EventTable,
    test: &alloc::collections::BTreeSet<EventId>,
    tau: u32,
) -> Result<f64, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let mut pred = Vec::with_capacity(test.len());
    let mut truth = Vec::with_capacity(test.len());
    for id in test {
        pred.push(
            preds
                .get(id, tau)
                .ok_or_else(|| EvalError::MissingPrediction { event: id.clone(), tau })?,
        );
        truth.push(
            table
                .record(id, tau)
                .ok_or_else(|| EvalError::MissingTruth { event: id.clone(), tau })?
                .value,
        );
    }
    Ok(stats::mse_pairs(&pred, &truth)?)
}

/// One (model, quarter) line: per-window MSE plus their unweighted mean, with
/// fallback and size bookkeeping. Failed cells carry an error string instead
/// of numbers.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportRow {
    pub model: String,
    pub quarter: Quarter,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub mse_mean: Option<f64>,
    pub mse_by_tau: BTreeMap<u32, f64>,
    pub test_events: usize,
    pub train_events: usize,
    pub val_events: usize,
    pub fallbacks: BTreeMap<u32, usize>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub error: Option<String>,
}

impl ReportRow {
    pub fn failed(model: impl Into<String>, quarter: Quarter, error: impl Into<String>) -> Self {
        ReportRow {
            model: model.into(),
            quarter,
            mse_mean: None,
            mse_by_tau: BTreeMap::new(),
            test_events: 0,
            train_events: 0,
            val_events: 0,
            fallbacks: BTreeMap::new(),
            error: Some(error.into()),
        }
    }
}

/// Scores one baseline run against its split, producing the table row.
pub fn score_baseline(
    table: &EventTable,
    split: &Split,
    run: &BaselineRun,
    taus: &[u32],
) -> Result<ReportRow, EvalError> {
    let mut mse_by_tau = BTreeMap::new();
    for &tau in taus {
        mse_by_tau.insert(tau, mse(&run.predictions, table, &split.test, tau)?);
    }
    let values: Vec<f64> = mse_by_tau.values().copied().collect();
    let mse_mean = stats::mean(&values)?;
    Ok(ReportRow {
        model: run.predictions.model.clone(),
        quarter: split.target,
        mse_mean: Some(mse_mean),
        mse_by_tau,
        test_events: split.test.len(),
        train_events: split.train.len(),
        val_events: split.val.len(),
        fallbacks: run.fallbacks.clone(),
        error: None,
    })
}

/// Full evaluation report: config echo plus rows in canonical
/// (model, quarter) order regardless of completion order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub convention: VolConvention,
    pub taus: Vec<u32>,
    pub split_seed: u64,
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn new(convention: VolConvention, taus: Vec<u32>, split_seed: u64) -> Self {
        EvalReport { convention, taus, split_seed, rows: Vec::new() }
    }

    /// Inserts rows and re-sorts into the canonical order.
    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
        self.rows.sort_by(|a, b| a.model.cmp(&b.model).then(a.quarter.cmp(&b.quarter)));
    }
}
