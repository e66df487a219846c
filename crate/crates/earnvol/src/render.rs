//! Aligned-text rendering of reports for eyeball diffing; JSON stays the
//! machine default.

use earnvol_core::drift::DriftProfile;
use earnvol_core::embed::GroupSimilarityReport;
use earnvol_core::report::ReportRow;
use earnvol_core::table::Oet;

use crate::experiment::ExperimentReport;

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Rows in the result tables' layout: model, quarter, mean MSE, then one
/// column per window.
pub fn render_rows(rows: &[ReportRow], taus: &[u32]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<14} {:<8} {:>8}", "Model", "Quarter", "MSE"));
    for tau in taus {
        out.push_str(&format!(" {:>8}", format!("MSE_{tau}")));
    }
    out.push_str(&format!(" {:>6}\n", "fb"));
    for row in rows {
        out.push_str(&format!("{:<14} {:<8}", row.model, row.quarter.to_string()));
        match (&row.error, row.mse_mean) {
            (Some(e), _) => out.push_str(&format!(" error: {e}\n")),
            (None, Some(mean)) => {
                out.push_str(&format!(" {:>8}", fmt(mean)));
                for tau in taus {
                    match row.mse_by_tau.get(tau) {
                        Some(v) => out.push_str(&format!(" {:>8}", fmt(*v))),
                        None => out.push_str(&format!(" {:>8}", "-")),
                    }
                }
                let fallbacks: usize = row.fallbacks.values().sum();
                out.push_str(&format!(" {fallbacks:>6}\n"));
            }
            (None, None) => out.push('\n'),
        }
    }
    out
}

pub fn render_report(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "convention={} seed={} events={} incomplete={}\n\n",
        report.eval.convention,
        report.eval.split_seed,
        report.config.events_total,
        report.config.events_incomplete
    ));
    out.push_str(&render_rows(&report.eval.rows, &report.eval.taus));
    if let Some(drift) = &report.drift {
        out.push('\n');
        out.push_str(&render_drift(drift));
    }
    if let Some(sim) = &report.similarity {
        out.push('\n');
        out.push_str(&render_similarity(sim));
    }
    if let Some(corr) = &report.correlation {
        out.push_str(&format!("\ncorrelation {} vs {}:\n", corr.a, corr.b));
        for (tau, r) in &corr.per_tau {
            out.push_str(&format!("  tau {tau:>2}: {}\n", fmt(*r)));
        }
    }
    out
}

pub fn render_drift(profile: &DriftProfile) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>12} {:>12} {:>8}\n",
        "offset", "mean|r|", "mean vol", "events"
    ));
    for (i, label) in profile.offsets.iter().enumerate() {
        out.push_str(&format!(
            "{:<10} {:>12.6} {:>12.4} {:>8}\n",
            label,
            profile.mean_abs_return[i],
            profile.mean_volatility[i],
            profile.n_events_per_offset[i]
        ));
    }
    out
}

pub fn render_similarity(report: &GroupSimilarityReport) -> String {
    format!(
        "{}: within-ticker {} ({} pairs), all-dataset {} ({} pairs), single-event tickers {}\n",
        report.source,
        fmt(report.within_ticker),
        report.within_pairs,
        fmt(report.all_dataset),
        report.all_pairs,
        report.single_event_tickers
    )
}

pub fn render_oet(oet: &Oet) -> String {
    format!("OET = {} ({} / {})\n", fmt(oet.value()), oet.overlapping, oet.test_tickers)
}
