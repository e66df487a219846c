//! On-disk formats: price and earnings CSV, embedding JSON-lines, prediction
//! sets, models, and synthetic dataset export.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use earnvol_core::baseline::{MlpSettings, PredictionSet};
use earnvol_core::date::Date;
use earnvol_core::embed::EmbeddingSet;
use earnvol_core::event::{EarningsEvent, EventId, MarketSession, Quarter};
use earnvol_core::mlp::MlpModel;
use earnvol_core::price::{PricePoint, PriceSeries};
use earnvol_core::ridge::LinearModel;
use earnvol_core::synth::SynthDataset;

use crate::error::{Error, Result};

pub const PRICE_HEADER: &str = "date,close";
pub const EARNINGS_HEADER: &str = "ticker,date,session,year,quarter";

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    Ok(text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect())
}

fn check_header(path: &Path, lines: &[String], expected: &str) -> Result<usize> {
    let Some(first) = lines.first() else {
        return Err(Error::EmptyFile { path: path.into() });
    };
    let got = first.trim();
    if got == expected {
        return Ok(expected.split(',').count());
    }
    // Earnings files may carry a trailing pass-through sector column.
    if expected == EARNINGS_HEADER && got == format!("{expected},sector") {
        return Ok(expected.split(',').count() + 1);
    }
    Err(Error::Header { path: path.into(), expected: expected.into(), got: got.into() })
}

fn ticker_from_stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Format {
            path: path.into(),
            line: 0,
            message: "cannot derive a ticker from the file name".into(),
        })
}

/// Loads one ticker's closes. The file name stem is the ticker; rows are
/// sorted by date, so shuffled input loads identically to sorted input.
pub fn load_price_series(path: &Path) -> Result<PriceSeries> {
    let lines = read_lines(path)?;
    check_header(path, &lines, PRICE_HEADER)?;
    let mut points = Vec::with_capacity(lines.len().saturating_sub(1));
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Format { path: path.into(), line: lineno, message };
        let (date, close) = line
            .split_once(',')
            .ok_or_else(|| err("expected `date,close`".into()))?;
        let date: Date =
            date.trim().parse().map_err(|e| err(format!("{e}")))?;
        let close: f64 = close
            .trim()
            .parse()
            .map_err(|_| err(format!("close `{}` is not a number", close.trim())))?;
        if !(close.is_finite() && close > 0.0) {
            return Err(err(format!("non-positive close {close}")));
        }
        points.push(PricePoint { date, close });
    }
    if points.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    points.sort_by_key(|p| p.date);
    Ok(PriceSeries::new(ticker_from_stem(path)?, points)?)
}

pub fn save_price_series(series: &PriceSeries, path: &Path) -> Result<()> {
    let mut out = String::from(PRICE_HEADER);
    out.push('\n');
    for p in series.points() {
        out.push_str(&format!("{},{}\n", p.date, p.close));
    }
    fs::write(path, out).map_err(Error::io(path))
}

/// Loads every `*.csv` under `dir` keyed by ticker (file stem).
pub fn load_prices_dir(dir: &Path) -> Result<BTreeMap<String, PriceSeries>> {
    let mut out = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(Error::io(dir))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    paths.sort();
    for path in paths {
        let series = load_price_series(&path)?;
        out.insert(series.ticker().to_string(), series);
    }
    Ok(out)
}

/// Parses one earnings metadata row shared by the file loader and the CLI's
/// inline `--event ticker,date,session` form (quarter inferred from the date
/// when absent).
pub fn parse_inline_event(text: &str) -> std::result::Result<EarningsEvent, String> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != 3 {
        return Err("expected `ticker,date,session`".into());
    }
    let date: Date = fields[1].parse().map_err(|e| format!("{e}"))?;
    let session: MarketSession = fields[2].parse().map_err(|e| format!("{e}"))?;
    let quarter = Quarter::new(date.year(), (date.month() - 1) / 3 + 1)
        .expect("calendar quarter from a valid month");
    Ok(EarningsEvent::new(fields[0], date, session, quarter))
}

/// Loads the earnings metadata file. An optional trailing `sector` column is
/// carried through untouched.
pub fn load_earnings(path: &Path) -> Result<Vec<EarningsEvent>> {
    let lines = read_lines(path)?;
    let width = check_header(path, &lines, EARNINGS_HEADER)?;
    let mut events = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Format { path: path.into(), line: lineno, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(err(format!("expected {width} fields, got {}", fields.len())));
        }
        let date: Date = fields[1].parse().map_err(|e| err(format!("{e}")))?;
        let session: MarketSession = fields[2].parse().map_err(|e| err(format!("{e}")))?;
        let year: i32 =
            fields[3].parse().map_err(|_| err(format!("year `{}` is not a number", fields[3])))?;
        let qnum: u8 = fields[4]
            .parse()
            .map_err(|_| err(format!("quarter `{}` is not a number", fields[4])))?;
        let quarter = Quarter::new(year, qnum).map_err(|e| err(format!("{e}")))?;
        let mut event = EarningsEvent::new(fields[0], date, session, quarter);
        if width == 6 && !fields[5].is_empty() {
            event = event.with_sector(fields[5]);
        }
        events.push(event);
    }
    if events.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Ok(events)
}

pub fn save_earnings(events: &[EarningsEvent], path: &Path) -> Result<()> {
    let with_sector = events.iter().any(|e| e.sector.is_some());
    let mut out = String::from(EARNINGS_HEADER);
    if with_sector {
        out.push_str(",sector");
    }
    out.push('\n');
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{}",
            e.ticker,
            e.announce_date,
            e.session,
            e.quarter.year(),
            e.quarter.quarter()
        ));
        if with_sector {
            out.push(',');
            out.push_str(e.sector.as_deref().unwrap_or(""));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(Error::io(path))
}

#[derive(serde::Serialize, serde::Deserialize)]
struct EmbeddingRow {
    event_id: EventId,
    vector: Vec<f64>,
}

/// Loads JSON-lines embeddings: one `{"event_id": ..., "vector": [...]}` per
/// row. The dimension is inferred from the first row and enforced.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet> {
    let lines = read_lines(path)?;
    let mut rows = Vec::new();
    for (idx, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: EmbeddingRow = serde_json::from_str(line).map_err(|e| Error::Format {
            path: path.into(),
            line: idx + 1,
            message: format!("{e}"),
        })?;
        rows.push((row.event_id, row.vector));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Ok(EmbeddingSet::new(ticker_from_stem(path)?, rows)?)
}

pub fn save_embeddings(set: &EmbeddingSet, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (id, vector) in set.iter() {
        let row = EmbeddingRow { event_id: id.clone(), vector: vector.to_vec() };
        out.push_str(&serde_json::to_string(&row)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(Error::io(path))
}

#[derive(serde::Serialize, serde::Deserialize)]
struct PredictionRow {
    event_id: EventId,
    tau: u32,
    value: f64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct PredictionFile {
    model: String,
    predictions: Vec<PredictionRow>,
}

/// The interchange JSON for prediction sets:
/// `{model, predictions: [{event_id, tau, value}, ...]}` sorted by
/// (event_id, tau).
pub fn predictions_to_json(set: &PredictionSet) -> Result<String> {
    let mut rows = Vec::new();
    for (id, by_tau) in &set.predictions {
        for (tau, value) in by_tau {
            rows.push(PredictionRow { event_id: id.clone(), tau: *tau, value: *value });
        }
    }
    let file = PredictionFile { model: set.model.clone(), predictions: rows };
    Ok(format!("{}\n", serde_json::to_string_pretty(&file)?))
}

pub fn save_predictions(set: &PredictionSet, path: &Path) -> Result<()> {
    fs::write(path, predictions_to_json(set)?).map_err(Error::io(path))
}

pub fn load_predictions(path: &Path) -> Result<PredictionSet> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let file: PredictionFile = serde_json::from_str(&text)?;
    let mut set = PredictionSet::new(file.model);
    for row in file.predictions {
        set.insert(row.event_id, row.tau, row.value);
    }
    Ok(set)
}

/// Saved regressor parameters with the config echoed, for reproducibility
/// audits.
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SavedModel {
    Linear(LinearModel),
    Mlp { model: MlpModel, settings: MlpSettings },
}

pub fn save_model(model: &SavedModel, path: &Path) -> Result<()> {
    let text = format!("{}\n", serde_json::to_string_pretty(model)?);
    fs::write(path, text).map_err(Error::io(path))
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes a synthetic dataset as `earnings.csv` plus `prices/<ticker>.csv`,
/// the same formats the loaders consume.
pub fn write_dataset(dataset: &SynthDataset, dir: &Path) -> Result<()> {
    let prices_dir = dir.join("prices");
    fs::create_dir_all(&prices_dir).map_err(Error::io(&prices_dir))?;
    save_earnings(&dataset.events, &dir.join("earnings.csv"))?;
    for (ticker, series) in &dataset.prices {
        save_price_series(series, &prices_dir.join(format!("{ticker}.csv")))?;
    }
    Ok(())
}
