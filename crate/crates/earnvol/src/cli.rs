//! Command-line entry points: one thin subcommand per pipeline stage.
//! Machine-readable JSON is the default output; `--pretty` switches to
//! aligned text. Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use earnvol_core::baseline::run_baseline;
use earnvol_core::drift::event_window_profile;
use earnvol_core::embed::{prediction_correlation, random_embeddings, RandomMode};
use earnvol_core::event::{EarningsEvent, Quarter};
use earnvol_core::price::PriceSeries;
use earnvol_core::report::score_baseline;
use earnvol_core::table::{oet, rolling_quarter_split, EventTable, Provenance, SplitRatio};
use earnvol_core::vol::{
    first_post_day, post_earnings_volatility, post_earnings_window, VolConvention,
    STANDARD_WINDOWS,
};

use crate::config::{self, ModelSpec};
use crate::error::{Error, Result};
use crate::experiment;
use crate::formats;
use crate::render;

#[derive(Parser, Debug)]
#[command(
    name = "earnvol",
    version,
    about = "Post-earnings realized volatility: datasets, training-free baselines, diagnostics",
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write output to this path instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Render tables for humans instead of JSON.
    #[arg(long, global = true, default_value_t = false)]
    pub pretty: bool,

    /// Cap the worker thread count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for splits and random embeddings.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Volatility convention: paper_literal or sample_std.
    #[arg(long, global = true, default_value = "paper_literal")]
    pub convention: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the event table from price and earnings files.
    Ingest {
        /// Directory of per-ticker `<TICKER>.csv` price files.
        #[arg(long)]
        prices: PathBuf,
        /// Earnings metadata CSV.
        #[arg(long)]
        events: PathBuf,
        /// Windows, in trading days.
        #[arg(long, value_delimiter = ',', default_values_t = STANDARD_WINDOWS)]
        taus: Vec<u32>,
    },
    /// Post-earnings volatility of one event from one price file.
    Volatility {
        /// One ticker's price CSV.
        #[arg(long)]
        prices: PathBuf,
        /// Inline event: `ticker,date,session`.
        #[arg(long)]
        event: String,
        /// Window length in trading days.
        #[arg(long)]
        tau: u32,
    },
    /// Overlapping Earnings per Ticker between two earnings files.
    Oet {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Rolling-quarter split for one target quarter.
    Split {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        events: PathBuf,
        /// Target quarter, e.g. 2021Q1.
        #[arg(long)]
        quarter: String,
        #[arg(long, value_delimiter = ',', default_values_t = STANDARD_WINDOWS)]
        taus: Vec<u32>,
    },
    /// Left-extend history with earlier prices and earnings.
    Augment {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        ext_prices: PathBuf,
        #[arg(long)]
        ext_events: PathBuf,
        /// How many years before the native range to keep.
        #[arg(long, default_value_t = 5)]
        years: u32,
        #[arg(long, value_delimiter = ',', default_values_t = STANDARD_WINDOWS)]
        taus: Vec<u32>,
    },
    /// Predictions of one baseline for one quarter.
    Predict {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        quarter: String,
        /// Model name, e.g. STPEV(Mean).
        #[arg(long)]
        model: String,
        #[arg(long, value_delimiter = ',', default_values_t = STANDARD_WINDOWS)]
        taus: Vec<u32>,
    },
    /// Predictions of one baseline for one quarter, scored against realized
    /// volatility.
    Evaluate {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        quarter: String,
        #[arg(long)]
        model: String,
        #[arg(long, value_delimiter = ',', default_values_t = STANDARD_WINDOWS)]
        taus: Vec<u32>,
    },
    /// Cross-event |return| and volatility profile around announcements.
    Drift {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        events: PathBuf,
        /// Relative-day horizon on each side of the announcement.
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 3)]
        tau: u32,
    },
    /// Within-ticker vs. all-dataset cosine similarity of embeddings.
    Similarity {
        #[arg(long)]
        events: PathBuf,
        /// JSON-lines embedding file.
        #[arg(long, conflicts_with = "random")]
        embeddings: Option<PathBuf>,
        /// Generate random embeddings instead: `all` or `ticker`.
        #[arg(long)]
        random: Option<String>,
        /// Dimension for random embeddings.
        #[arg(long, default_value_t = 512)]
        dim: usize,
        /// Exclude same-ticker pairs from the all-dataset mean.
        #[arg(long, default_value_t = false)]
        exclude_same_ticker: bool,
    },
    /// Pearson correlation per window between two prediction files.
    Correlate {
        #[arg(long)]
        pred_a: PathBuf,
        #[arg(long)]
        pred_b: PathBuf,
    },
    /// Run a whole experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::io(path)),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn parse_convention(text: &str) -> Result<VolConvention> {
    text.parse()
        .map_err(|_| Error::Usage(format!("unknown convention `{text}`")))
}

fn parse_quarter(text: &str) -> Result<Quarter> {
    text.parse().map_err(|_| Error::Usage(format!("`{text}` is not a quarter like 2021Q1")))
}

fn load_table(
    prices: &std::path::Path,
    events: &std::path::Path,
    convention: VolConvention,
    taus: &[u32],
) -> Result<(EventTable, BTreeMap<String, PriceSeries>)> {
    let prices = formats::load_prices_dir(prices)?;
    let events = formats::load_earnings(events)?;
    let table = EventTable::build(events, &prices, convention, taus)?;
    Ok((table, prices))
}

#[derive(serde::Serialize)]
struct TableDump<'a> {
    convention: VolConvention,
    taus: &'a [u32],
    events_total: usize,
    events_complete: usize,
    events: Vec<&'a EarningsEvent>,
    records: Vec<RecordDump>,
    incomplete: Vec<IncompleteDump>,
}

#[derive(serde::Serialize)]
struct RecordDump {
    event_id: String,
    provenance: Provenance,
    tau: u32,
    value: f64,
}

#[derive(serde::Serialize)]
struct IncompleteDump {
    event_id: String,
    reason: String,
}

fn dump_table<'a>(table: &'a EventTable, taus: &'a [u32]) -> TableDump<'a> {
    let mut records = Vec::new();
    let mut incomplete = Vec::new();
    let mut complete = 0usize;
    for event in table.events() {
        if table.is_complete(&event.id) {
            complete += 1;
        }
        if let Some(reason) = table.incomplete_reason(&event.id) {
            incomplete.push(IncompleteDump {
                event_id: event.id.to_string(),
                reason: reason.to_string(),
            });
        }
        if let Some(recs) = table.records_for(&event.id) {
            for (tau, rec) in recs {
                records.push(RecordDump {
                    event_id: event.id.to_string(),
                    provenance: table.provenance(&event.id).unwrap_or(Provenance::Native),
                    tau: *tau,
                    value: rec.value,
                });
            }
        }
    }
    TableDump {
        convention: table.convention(),
        taus,
        events_total: table.len(),
        events_complete: complete,
        events: table.events().collect(),
        records,
        incomplete,
    }
}

/// Executes a parsed command line; the caller turns the error into an exit
/// status.
pub fn dispatch(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        experiment::limit_threads(threads)?;
    }
    let convention = parse_convention(&cli.convention)?;

    match &cli.command {
        Command::Ingest { prices, events, taus } => {
            let (table, _) = load_table(prices, events, convention, taus)?;
            emit(&cli.out, &json(&dump_table(&table, taus))?)
        }
        Command::Volatility { prices, event, tau } => {
            let series = formats::load_price_series(prices)?;
            let event = formats::parse_inline_event(event).map_err(Error::Usage)?;
            let cal = series.trading_calendar();
            let start = first_post_day(&event, &cal)?;
            let window = post_earnings_window(&event, &cal, *tau)?;
            let record = post_earnings_volatility(&event, &series, *tau, convention)?;
            #[derive(serde::Serialize)]
            struct VolOut {
                ticker: String,
                announce_date: String,
                session: String,
                tau: u32,
                convention: VolConvention,
                first_post_day: String,
                window: Vec<String>,
                value: f64,
            }
            let out = VolOut {
                ticker: event.ticker.clone(),
                announce_date: event.announce_date.to_string(),
                session: event.session.to_string(),
                tau: *tau,
                convention,
                first_post_day: start.to_string(),
                window: window.iter().map(|d| d.to_string()).collect(),
                value: record.value,
            };
            if cli.pretty {
                emit(
                    &cli.out,
                    &format!(
                        "{} {} ({}) tau={} window=[{}] volatility={:.6}\n",
                        out.ticker,
                        out.announce_date,
                        out.session,
                        out.tau,
                        out.window.join(", "),
                        out.value
                    ),
                )
            } else {
                emit(&cli.out, &json(&out)?)
            }
        }
        Command::Oet { train, test } => {
            let train = formats::load_earnings(train)?;
            let test = formats::load_earnings(test)?;
            let got = oet(&train, &test)?;
            if cli.pretty {
                emit(&cli.out, &render::render_oet(&got))
            } else {
                #[derive(serde::Serialize)]
                struct OetOut {
                    overlapping: usize,
                    test_tickers: usize,
                    oet: f64,
                }
                emit(
                    &cli.out,
                    &json(&OetOut {
                        overlapping: got.overlapping,
                        test_tickers: got.test_tickers,
                        oet: got.value(),
                    })?,
                )
            }
        }
        Command::Split { prices, events, quarter, taus } => {
            let (table, _) = load_table(prices, events, convention, taus)?;
            let target = parse_quarter(quarter)?;
            let split = rolling_quarter_split(&table, target, SplitRatio::default(), cli.seed)?;
            emit(&cli.out, &json(&split)?)
        }
        Command::Augment { prices, events, ext_prices, ext_events, years, taus } => {
            let native_prices = formats::load_prices_dir(prices)?;
            let native_events = formats::load_earnings(events)?;
            let table = EventTable::build(native_events, &native_prices, convention, taus)?;
            let ext_prices = formats::load_prices_dir(ext_prices)?;
            let ext_events = formats::load_earnings(ext_events)?;
            let augmented = table.augment(ext_events, &ext_prices, &native_prices, *years)?;
            emit(&cli.out, &json(&dump_table(&augmented, taus))?)
        }
        Command::Predict { prices, events, quarter, model, taus } => {
            let spec = ModelSpec::parse(model, config::MlpSection::default().settings())?;
            let (table, _) = load_table(prices, events, convention, taus)?;
            let target = parse_quarter(quarter)?;
            let split = rolling_quarter_split(&table, target, SplitRatio::default(), cli.seed)?;
            let run = run_baseline(&table, &split, taus, &spec.agg, spec.mode)?;
            emit(&cli.out, &formats::predictions_to_json(&run.predictions)?)
        }
        Command::Evaluate { prices, events, quarter, model, taus } => {
            let spec = ModelSpec::parse(model, config::MlpSection::default().settings())?;
            let (table, _) = load_table(prices, events, convention, taus)?;
            let target = parse_quarter(quarter)?;
            let split = rolling_quarter_split(&table, target, SplitRatio::default(), cli.seed)?;
            let run = run_baseline(&table, &split, taus, &spec.agg, spec.mode)?;
            let row = score_baseline(&table, &split, &run, taus)?;
            if cli.pretty {
                emit(&cli.out, &render::render_rows(std::slice::from_ref(&row), taus))
            } else {
                emit(&cli.out, &json(&row)?)
            }
        }
        Command::Drift { prices, events, window, tau } => {
            let prices = formats::load_prices_dir(prices)?;
            let events = formats::load_earnings(events)?;
            let profile = event_window_profile(&events, &prices, *window, *tau, convention)?;
            if cli.pretty {
                emit(&cli.out, &render::render_drift(&profile))
            } else {
                emit(&cli.out, &json(&profile)?)
            }
        }
        Command::Similarity { events, embeddings, random, dim, exclude_same_ticker } => {
            let events = formats::load_earnings(events)?;
            let set = match (embeddings, random.as_deref()) {
                (Some(path), None) => formats::load_embeddings(path)?,
                (None, Some("all")) => random_embeddings(&events, RandomMode::All, *dim, cli.seed)?,
                (None, Some("ticker")) => {
                    random_embeddings(&events, RandomMode::Ticker, *dim, cli.seed)?
                }
                (None, Some(other)) => {
                    return Err(Error::Usage(format!(
                        "--random must be `all` or `ticker`, got `{other}`"
                    )))
                }
                _ => {
                    return Err(Error::Usage(
                        "similarity needs exactly one of --embeddings or --random".into(),
                    ))
                }
            };
            let report = earnvol_core::embed::group_cosine_similarity(
                &set,
                &events,
                !exclude_same_ticker,
            )?;
            if cli.pretty {
                emit(&cli.out, &render::render_similarity(&report))
            } else {
                emit(&cli.out, &json(&report)?)
            }
        }
        Command::Correlate { pred_a, pred_b } => {
            let a = formats::load_predictions(pred_a)?;
            let b = formats::load_predictions(pred_b)?;
            let mut taus: Vec<u32> = a
                .predictions
                .values()
                .flat_map(|m| m.keys().copied())
                .collect();
            taus.sort_unstable();
            taus.dedup();
            let mut per_tau = BTreeMap::new();
            for tau in taus {
                per_tau.insert(tau, prediction_correlation(&a, &b, tau)?);
            }
            #[derive(serde::Serialize)]
            struct CorrOut {
                a: String,
                b: String,
                per_tau: BTreeMap<u32, f64>,
            }
            emit(&cli.out, &json(&CorrOut { a: a.model, b: b.model, per_tau })?)
        }
        Command::Run { config: config_path } => {
            let plan = config::load_plan(config_path)?;
            let output = experiment::run_to_files(&plan)?;
            if cli.pretty {
                emit(&cli.out, &render::render_report(&output.report))
            } else {
                emit(&cli.out, &output.json)
            }
        }
    }
}
