//! The config-driven experiment driver: build the event table, split each
//! requested quarter, run the requested baselines, score, and assemble one
//! deterministic report document.

use std::collections::BTreeMap;

use rayon::prelude::*;

use earnvol_core::baseline::{run_baseline, BaselineRun, PredictionSet};
use earnvol_core::drift::{event_window_profile, DriftProfile};
use earnvol_core::embed::{
    group_cosine_similarity, prediction_correlation, random_embeddings, EmbeddingSet,
    GroupSimilarityReport, RandomMode,
};
use earnvol_core::event::EarningsEvent;
use earnvol_core::report::{score_baseline, EvalReport, ReportRow};
use earnvol_core::table::{rolling_quarter_split, EventTable, Split, SplitRatio};

use crate::config::{ExperimentPlan, SimilaritySource};
use crate::error::{Error, Result};
use crate::formats;

/// Everything `run` writes into the report document.
#[derive(Debug, serde::Serialize)]
pub struct ExperimentReport {
    pub config: ConfigEcho,
    pub eval: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<GroupSimilarityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationReport>,
}

#[derive(Debug, serde::Serialize)]
pub struct ConfigEcho {
    pub models: Vec<String>,
    pub quarters: Vec<String>,
    pub augmented: bool,
    pub events_total: usize,
    pub events_incomplete: usize,
}

#[derive(Debug, serde::Serialize)]
pub struct CorrelationReport {
    pub a: String,
    pub b: String,
    /// Pearson r per window over the pooled test predictions of all quarters.
    pub per_tau: BTreeMap<u32, f64>,
}

pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub json: String,
    /// Model label -> pooled predictions across all quarters.
    pub predictions: BTreeMap<String, PredictionSet>,
}

/// Builds the table described by the plan (including optional augmentation),
/// returning the native prices alongside for the drift analysis.
pub fn build_table(
    plan: &ExperimentPlan,
) -> Result<(EventTable, BTreeMap<String, earnvol_core::price::PriceSeries>)> {
    let prices = formats::load_prices_dir(&plan.prices_dir)?;
    let events = formats::load_earnings(&plan.earnings)?;
    let table = EventTable::build(events, &prices, plan.convention, &plan.taus)?;
    match &plan.extension {
        None => Ok((table, prices)),
        Some((ext_prices_dir, ext_earnings, years)) => {
            let ext_prices = formats::load_prices_dir(ext_prices_dir)?;
            let ext_events = formats::load_earnings(ext_earnings)?;
            let augmented = table.augment(ext_events, &ext_prices, &prices, *years)?;
            Ok((augmented, prices))
        }
    }
}

fn run_cell(
    table: &EventTable,
    split: &Split,
    plan: &ExperimentPlan,
    name: &str,
    spec: &crate::config::ModelSpec,
) -> (ReportRow, Option<BaselineRun>) {
    let outcome = run_baseline(table, split, &plan.taus, &spec.agg, spec.mode)
        .map_err(Error::from)
        .and_then(|run| {
            let row = score_baseline(table, split, &run, &plan.taus)?;
            Ok((row, run))
        });
    match outcome {
        Ok((row, run)) => (row, Some(run)),
        Err(e) => (ReportRow::failed(name, split.target, e.to_string()), None),
    }
}

/// Runs the whole plan. Deterministic: cells are computed in parallel but
/// merged in canonical (model, quarter) order, and every random draw is
/// seeded from the config.
pub fn run(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    let (table, prices) = build_table(plan)?;

    // One split per quarter, shared across models. A quarter that cannot be
    // split fails each of its cells, not the whole run.
    let mut splits: Vec<Split> = Vec::new();
    let mut failed_rows: Vec<ReportRow> = Vec::new();
    for &quarter in &plan.quarters {
        match rolling_quarter_split(&table, quarter, SplitRatio::default(), plan.split_seed) {
            Ok(split) => splits.push(split),
            Err(e) => {
                for (name, _) in &plan.models {
                    failed_rows.push(ReportRow::failed(name, quarter, e.to_string()));
                }
            }
        }
    }

    let cells: Vec<(&(String, crate::config::ModelSpec), &Split)> = plan
        .models
        .iter()
        .flat_map(|m| splits.iter().map(move |s| (m, s)))
        .collect();
    let results: Vec<(ReportRow, Option<(String, PredictionSet)>)> = cells
        .par_iter()
        .map(|((name, spec), split)| {
            let (row, run) = run_cell(&table, split, plan, name, spec);
            (row, run.map(|r| (name.clone(), r.predictions)))
        })
        .collect();

    let mut eval = EvalReport::new(plan.convention, plan.taus.clone(), plan.split_seed);
    eval.extend(failed_rows);
    let mut pooled: BTreeMap<String, PredictionSet> = BTreeMap::new();
    let mut rows = Vec::new();
    for (row, preds) in results {
        rows.push(row);
        if let Some((name, set)) = preds {
            let entry = pooled.entry(name).or_insert_with(|| PredictionSet::new(set.model.clone()));
            for (id, by_tau) in set.predictions {
                for (tau, value) in by_tau {
                    entry.insert(id.clone(), tau, value);
                }
            }
        }
    }
    eval.extend(rows);

    let complete: Vec<EarningsEvent> = table.complete_events().cloned().collect();
    let drift = match plan.drift {
        None => None,
        Some((horizon, tau)) => {
            Some(event_window_profile(&complete, &prices, horizon, tau, plan.convention)?)
        }
    };

    let similarity = match &plan.similarity {
        None => None,
        Some(source) => {
            let set: EmbeddingSet = match source {
                SimilaritySource::RandomAll => random_embeddings(
                    &complete,
                    RandomMode::All,
                    plan.similarity_dim,
                    plan.similarity_seed,
                )?,
                SimilaritySource::RandomTicker => random_embeddings(
                    &complete,
                    RandomMode::Ticker,
                    plan.similarity_dim,
                    plan.similarity_seed,
                )?,
                SimilaritySource::File(path) => formats::load_embeddings(path)?,
            };
            Some(group_cosine_similarity(&set, &complete, true)?)
        }
    };

    let correlation = match &plan.correlate {
        None => None,
        Some([a, b]) => {
            let (sa, sb) = match (pooled.get(a), pooled.get(b)) {
                (Some(sa), Some(sb)) => (sa, sb),
                _ => {
                    return Err(Error::Config(
                        "correlation requested but a model produced no predictions".into(),
                    ))
                }
            };
            let mut per_tau = BTreeMap::new();
            for &tau in &plan.taus {
                per_tau.insert(tau, prediction_correlation(sa, sb, tau)?);
            }
            Some(CorrelationReport { a: a.clone(), b: b.clone(), per_tau })
        }
    };

    let report = ExperimentReport {
        config: ConfigEcho {
            models: plan.models.iter().map(|(n, _)| n.clone()).collect(),
            quarters: plan.quarters.iter().map(|q| q.to_string()).collect(),
            augmented: plan.extension.is_some(),
            events_total: table.len(),
            events_incomplete: table.incomplete_count(),
        },
        eval,
        drift,
        similarity,
        correlation,
    };
    let json = format!("{}\n", serde_json::to_string_pretty(&report)?);
    Ok(ExperimentOutput { report, json, predictions: pooled })
}

/// Runs the plan and writes the report (and optional per-model prediction
/// files) to disk.
pub fn run_to_files(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    let output = run(plan)?;
    if let Some(parent) = plan.report.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(Error::io(parent))?;
        }
    }
    std::fs::write(&plan.report, &output.json).map_err(Error::io(&plan.report))?;
    if let Some(dir) = &plan.predictions_dir {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
        for (name, set) in &output.predictions {
            let file = dir.join(format!("{}.json", sanitize(name)));
            formats::save_predictions(set, &file)?;
        }
    }
    Ok(output)
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// Caps rayon's worker count for this process. Call once, before any
/// parallel work.
pub fn limit_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_plan;
    use earnvol_core::synth::{generate, SynthConfig};
    use std::path::Path;

    fn write_fixture(dir: &Path) {
        let data = generate(&SynthConfig {
            tickers: 8,
            quarters: 6,
            seed: 11,
            ..SynthConfig::default()
        });
        formats::write_dataset(&data, dir).unwrap();
    }

    fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
        let path = dir.join("exp.toml");
        std::fs::write(&path, body).unwrap();
        path
    }

    const BODY: &str = r#"
        [data]
        prices_dir = "prices"
        earnings = "earnings.csv"

        [eval]
        taus = [3, 7]
        models = ["PEV(Mean)", "STPEV(Mean)"]
        quarters = ["2020Q1", "2020Q2"]

        [output]
        report = "report.json"

        [analysis]
        drift_horizon = 3
        similarity = "random_ticker"
        similarity_dim = 32
        correlate = ["PEV(Mean)", "STPEV(Mean)"]
    "#;

    #[test]
    fn report_has_one_row_per_model_quarter_cell() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = write_config(dir.path(), BODY);
        let plan = load_plan(&config).unwrap();
        let out = run_to_files(&plan).unwrap();
        assert_eq!(out.report.eval.rows.len(), 4);
        assert!(out.report.eval.rows.iter().all(|r| r.error.is_none()));
        // Mean column is the unweighted mean of the per-window columns.
        for row in &out.report.eval.rows {
            let vals: Vec<f64> = row.mse_by_tau.values().copied().collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!((row.mse_mean.unwrap() - mean).abs() <= 1e-12);
        }
        assert!(out.report.drift.is_some());
        let sim = out.report.similarity.as_ref().unwrap();
        assert_eq!(sim.within_ticker, 1.0);
        assert!(out.report.correlation.is_some());
        assert!(plan.report.exists());

        // The drift profile lands in the report JSON with its documented keys.
        let doc: serde_json::Value = serde_json::from_str(&out.json).unwrap();
        for key in ["offsets", "mean_abs_return", "mean_volatility", "n_events_per_offset"] {
            assert!(doc["drift"].get(key).is_some(), "missing drift.{key}");
        }
        assert_eq!(doc["drift"]["offsets"][0], "past_3");
    }

    #[test]
    fn rerun_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = write_config(dir.path(), BODY);
        let plan = load_plan(&config).unwrap();
        let a = run(&plan).unwrap();
        let b = run(&plan).unwrap();
        assert_eq!(a.json, b.json);
    }

    #[test]
    fn extension_config_grows_the_training_pool() {
        let dir = tempfile::tempdir().unwrap();
        // One long consistent history; the native cut keeps 2021 onwards and
        // the extension directory carries the full range.
        let full = generate(&SynthConfig {
            tickers: 4,
            quarters: 12,
            start_quarter: "2019Q1".parse().unwrap(),
            seed: 5,
            ..SynthConfig::default()
        });
        let native_cut: earnvol_core::event::Quarter = "2021Q1".parse().unwrap();
        let native = earnvol_core::synth::SynthDataset {
            events: full.events.iter().filter(|e| e.quarter >= native_cut).cloned().collect(),
            prices: full.prices.clone(),
        };
        formats::write_dataset(&native, dir.path()).unwrap();
        formats::write_dataset(&full, &dir.path().join("ext")).unwrap();

        let body = r#"
            [data]
            prices_dir = "prices"
            earnings = "earnings.csv"

            [data.extension]
            prices_dir = "ext/prices"
            earnings = "ext/earnings.csv"
            years = 5

            [eval]
            taus = [3, 7]
            models = ["STPEV(Mean)"]
            quarters = ["2021Q3"]

            [output]
            report = "report.json"
        "#;
        let with_ext = load_plan(&write_config(dir.path(), body)).unwrap();
        let out = run(&with_ext).unwrap();
        assert!(out.report.config.augmented);
        assert_eq!(out.report.config.events_total, 48);
        let row = &out.report.eval.rows[0];
        assert!(row.error.is_none());
        // 2 native prior quarters plus 8 extension quarters feed the pool.
        assert_eq!(row.train_events + row.val_events, 40);

        let body_native = body
            .lines()
            .filter(|l| !l.contains("ext") && !l.contains("years") && !l.contains("[data.extension]"))
            .collect::<Vec<_>>()
            .join("\n");
        let plain = load_plan(&write_config(dir.path(), &body_native)).unwrap();
        let out = run(&plain).unwrap();
        assert!(!out.report.config.augmented);
        let row = &out.report.eval.rows[0];
        assert_eq!(row.train_events + row.val_events, 8);
    }

    #[test]
    fn failed_cells_do_not_abort_the_run() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        // 2019Q1 has no prior quarter: that cell errors, the rest succeed.
        let body = BODY.replace("\"2020Q1\", \"2020Q2\"", "\"2019Q1\", \"2020Q2\"");
        let body = body.replace("correlate = [\"PEV(Mean)\", \"STPEV(Mean)\"]", "");
        let config = write_config(dir.path(), &body);
        let plan = load_plan(&config).unwrap();
        let out = run(&plan).unwrap();
        let failed: Vec<_> = out.report.eval.rows.iter().filter(|r| r.error.is_some()).collect();
        assert_eq!(failed.len(), 2);
        assert!(out.report.eval.rows.len() == 4);
    }
}
