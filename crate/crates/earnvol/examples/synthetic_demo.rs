//! End-to-end demo on a synthetic dense dataset: 30 tickers x 12 quarters,
//! one announcement per ticker per quarter, ticker-specific return scales.
//!
//! Run with: cargo run --example synthetic_demo
//!
//! Writes the dataset, an experiment config, and a report into
//! `target/synthetic_demo/`, then prints the result table.

use std::fs;
use std::path::PathBuf;

use earnvol::{config, experiment, formats, render};
use earnvol_core::synth::{generate, SynthConfig};

fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from("target/synthetic_demo");
    fs::create_dir_all(&dir)?;

    let data = generate(&SynthConfig {
        tickers: 30,
        quarters: 12,
        seed: 7,
        ..SynthConfig::default()
    });
    formats::write_dataset(&data, &dir)?;
    println!(
        "wrote {} events across {} tickers under {}",
        data.events.len(),
        data.prices.len(),
        dir.display()
    );

    let config_path = dir.join("experiment.toml");
    fs::write(
        &config_path,
        r#"[data]
prices_dir = "prices"
earnings = "earnings.csv"

[eval]
taus = [3, 7, 15, 30]
models = ["PEV(Mean)", "PEV(Median)", "STPEV(Mean)", "STPEV(Median)", "STPEV(LR)"]
quarters = ["2021Q1", "2021Q2", "2021Q3", "2021Q4"]

[output]
report = "report.json"

[analysis]
drift_horizon = 5
similarity = "random_ticker"
similarity_dim = 256
correlate = ["STPEV(Mean)", "STPEV(Median)"]
"#,
    )?;

    let plan = config::load_plan(&config_path)?;
    let output = experiment::run_to_files(&plan)?;
    print!("{}", render::render_report(&output.report));
    println!("\nfull report: {}", plan.report.display());
    Ok(())
}
