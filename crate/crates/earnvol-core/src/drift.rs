//! Cross-event profiles of |return| and windowed volatility around
//! announcements, on a relative-day axis `past_k .. past_1, future_1 ..
//! future_k`. The announcement falls between `past_1` and `future_1`;
//! `future_1` is the first post-earnings trading day.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::event::EarningsEvent;
use crate::price::PriceSeries;
use crate::vol::{first_post_day, realized_volatility, VolConvention, VolError};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum DriftError {
    #[error("no events supplied")]
    NoEvents,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("no price series for ticker {0}")]
    MissingPrices(String),
    #[error(transparent)]
    Vol(#[from] VolError),
}

/// Per-offset means across events. `offsets[i]` labels the relative day,
/// `n_events_per_offset[i]` counts the events with enough data there; events
/// lacking data at an offset are skipped for that offset only.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriftProfile {
    pub offsets: Vec<String>,
    pub mean_abs_return: Vec<f64>,
    pub mean_volatility: Vec<f64>,
    pub n_events_per_offset: Vec<usize>,
}

impl DriftProfile {
    pub fn offset_index(&self, label: &str) -> Option<usize> {
        self.offsets.iter().position(|o| o == label)
    }
}

/// Builds the profile over `past_k..future_k` for the given events.
///
/// At each relative day the profile records the cross-event mean of the
/// absolute daily return on that day and of the `tau`-day volatility of the
/// window starting on that day. An event contributes to an offset only when
/// both statistics are computable there (return exists, full window ahead,
/// non-degenerate spread).
pub fn event_window_profile(
    events: &[EarningsEvent],
    prices: &BTreeMap<String, PriceSeries>,
    k: usize,
    tau: u32,
    convention: VolConvention,
) -> Result<DriftProfile, DriftError> {
    if events.is_empty() {
        return Err(DriftError::NoEvents);
    }
    if k == 0 {
        return Err(DriftError::ZeroHorizon);
    }
    let n_offsets = 2 * k;
    let mut sum_abs = alloc::vec![0.0f64; n_offsets];
    let mut sum_vol = alloc::vec![0.0f64; n_offsets];
    let mut counts = alloc::vec![0usize; n_offsets];

    for group in events.chunk_by(|a, b| a.ticker == b.ticker) {
        // chunk_by only groups adjacent equal tickers; callers need not sort,
        // so recompute per group but cache within it.
        let series = prices
            .get(&group[0].ticker)
            .ok_or_else(|| DriftError::MissingPrices(group[0].ticker.clone()))?;
        let cal = series.trading_calendar();
        let returns = series.returns().map_err(VolError::Price)?;
        for event in group {
            let Ok(start) = first_post_day(event, &cal) else { continue };
            let e0 = cal.index_of(start).expect("first_post_day is a member") as i64;
            for slot in 0..n_offsets {
                // Relative day index on the ticker calendar.
                let j = e0 - k as i64 + slot as i64;
                if j < 1 || j as usize > returns.len() {
                    continue;
                }
                let j = j as usize;
                if j - 1 + tau as usize > returns.len() {
                    continue;
                }
                let day_return = returns.points()[j - 1].value;
                let window: Vec<f64> =
                    returns.points()[j - 1..j - 1 + tau as usize].iter().map(|p| p.value).collect();
                let Ok(vol) = realized_volatility(&window, convention) else { continue };
                sum_abs[slot] += libm::fabs(day_return);
                sum_vol[slot] += vol;
                counts[slot] += 1;
            }
        }
    }

    let offsets: Vec<String> = (0..n_offsets)
        .map(|slot| {
            if slot < k {
                format!("past_{}", k - slot)
            } else {
                format!("future_{}", slot - k + 1)
            }
        })
        .collect();
    let mean = |sums: &[f64]| -> Vec<f64> {
        sums.iter()
            .zip(&counts)
            .map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
            .collect()
    };
    Ok(DriftProfile {
        offsets,
        mean_abs_return: mean(&sum_abs),
        mean_volatility: mean(&sum_vol),
        n_events_per_offset: counts,
    })
}
