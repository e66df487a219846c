//! Realized post-earnings volatility.
//!
//! The volatility of a window of daily returns is the natural log of the
//! spread of those returns around their mean. Two conventions are carried:
//! `PaperLiteral` takes `ln(sqrt(sum((r - rbar)^2)))` exactly as printed,
//! `SampleStd` divides the sum by the window length first. The two differ by
//! the additive constant `ln(sqrt(n))`, so comparative analyses are
//! convention-invariant.
//!
//! Window selection honours the market session: a release before the open
//! makes the announcement day itself the first post-earnings trading day,
//! while a release after the close pushes the window to the next trading day.

use alloc::vec::Vec;

use core::fmt;
use core::str::FromStr;

use crate::calendar::TradingCalendar;
use crate::date::Date;
use crate::event::{EarningsEvent, EventId, MarketSession};
use crate::price::PriceSeries;

/// The window lengths used throughout, in trading days.
pub const STANDARD_WINDOWS: [u32; 4] = [3, 7, 15, 30];

/// Sums of squared deviations at or below this are treated as degenerate
/// rather than fed to the log.
pub const DEGENERATE_VARIANCE_THRESHOLD: f64 = 1e-24;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VolConvention {
    /// `ln(sqrt(sum((r_i - rbar)^2)))`, the formula as printed.
    #[default]
    PaperLiteral,
    /// `ln(sqrt(sum((r_i - rbar)^2) / n))`, the sample standard deviation.
    SampleStd,
}

impl fmt::Display for VolConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolConvention::PaperLiteral => f.write_str("paper_literal"),
            VolConvention::SampleStd => f.write_str("sample_std"),
        }
    }
}

impl FromStr for VolConvention {
    type Err = VolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper_literal" => Ok(VolConvention::PaperLiteral),
            "sample_std" => Ok(VolConvention::SampleStd),
            _ => Err(VolError::UnknownConvention),
        }
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum VolError {
    #[error("need at least 2 returns, got {0}")]
    TooFewReturns(usize),
    #[error("degenerate variance: returns have (near-)zero spread")]
    DegenerateVariance,
    #[error("no trading day at or after announcement {0}")]
    NoPostTradingDay(Date),
    #[error("insufficient future data: window needs {needed} post-earnings returns, {available} available")]
    InsufficientFutureData { needed: usize, available: usize },
    #[error("insufficient history: need {needed} trading days before the first post-earnings day, {available} available")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("window length must be at least 2, got {0}")]
    WindowTooShort(u32),
    #[error("convention must be paper_literal or sample_std")]
    UnknownConvention,
    #[error(transparent)]
    Price(#[from] crate::price::PriceError),
}

/// Realized volatility of one (event, window) pair, in natural-log units.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolatilityRecord {
    pub event_id: EventId,
    pub tau: u32,
    pub value: f64,
    pub convention: VolConvention,
}

/// Log realized volatility of a window of daily returns.
pub fn realized_volatility(returns: &[f64], convention: VolConvention) -> Result<f64, VolError> {
    let n = returns.len();
    if n < 2 {
        return Err(VolError::TooFewReturns(n));
    }
    let mean = returns.iter().sum::<f64>() / n as f64;
    let ss: f64 = returns.iter().map(|r| (r - mean) * (r - mean)).sum();
    if ss < DEGENERATE_VARIANCE_THRESHOLD {
        return Err(VolError::DegenerateVariance);
    }
    let spread = match convention {
        VolConvention::PaperLiteral => ss,
        VolConvention::SampleStd => ss / n as f64,
    };
    Ok(libm::log(libm::sqrt(spread)))
}

/// First trading day on which the market can react to the announcement.
///
/// Before the open: the announcement day itself when it trades, otherwise the
/// next trading day. After the close: the next trading day strictly after the
/// announcement.
pub fn first_post_day(event: &EarningsEvent, cal: &TradingCalendar) -> Result<Date, VolError> {
    let day = match event.session {
        MarketSession::BeforeOpen => cal.next_on_or_after(event.announce_date),
        MarketSession::AfterClose => cal.next_after(event.announce_date),
    };
    day.ok_or(VolError::NoPostTradingDay(event.announce_date))
}

/// The `tau` trading days covered by the event's post-earnings window,
/// starting at [`first_post_day`].
pub fn post_earnings_window(
    event: &EarningsEvent,
    cal: &TradingCalendar,
    tau: u32,
) -> Result<Vec<Date>, VolError> {
    let start = first_post_day(event, cal)?;
    let i0 = cal.index_of(start).expect("first_post_day is a calendar member");
    let end = i0 + tau as usize;
    if end > cal.len() {
        return Err(VolError::InsufficientFutureData {
            needed: tau as usize,
            available: cal.len() - i0,
        });
    }
    Ok(cal.days()[i0..end].to_vec())
}

/// Realized volatility of the `tau` daily returns beginning on the event's
/// first post-earnings trading day.
pub fn post_earnings_volatility(
    event: &EarningsEvent,
    prices: &PriceSeries,
    tau: u32,
    convention: VolConvention,
) -> Result<VolatilityRecord, VolError> {
    if tau < 2 {
        return Err(VolError::WindowTooShort(tau));
    }
    let cal = prices.trading_calendar();
    let returns = prices.returns()?;
    let start = first_post_day(event, &cal)?;
    let tau_n = tau as usize;
    // The return on calendar day i lives at index i-1 of the return series;
    // day 0 has no prior close so no return.
    let i0 = cal.index_of(start).expect("first_post_day is a calendar member");
    let available = if i0 >= 1 { returns.len() - (i0 - 1) } else { 0 };
    if available < tau_n {
        return Err(VolError::InsufficientFutureData { needed: tau_n, available });
    }
    let window: Vec<f64> =
        returns.points()[i0 - 1..i0 - 1 + tau_n].iter().map(|p| p.value).collect();
    let value = realized_volatility(&window, convention)?;
    Ok(VolatilityRecord { event_id: event.id.clone(), tau, value, convention })
}

/// Rolling pre-announcement volatility: for each of the `lookback` trading
/// days ending the day before the first post-earnings day, the realized
/// volatility of the `window_len` returns ending on that day.
pub fn pre_earnings_volatility_series(
    event: &EarningsEvent,
    prices: &PriceSeries,
    window_len: usize,
    lookback: usize,
    convention: VolConvention,
) -> Result<Vec<f64>, VolError> {
    if window_len < 2 {
        return Err(VolError::WindowTooShort(window_len as u32));
    }
    let cal = prices.trading_calendar();
    let returns = prices.returns()?;
    let start = first_post_day(event, &cal)?;
    let e0 = cal.index_of(start).expect("first_post_day is a calendar member");
    if e0 < lookback + window_len {
        return Err(VolError::InsufficientHistory { needed: lookback + window_len, available: e0 });
    }
    let mut out = Vec::with_capacity(lookback);
    for t in 0..lookback {
        let day = e0 - lookback + t;
        let window: Vec<f64> =
            returns.points()[day - window_len..day].iter().map(|p| p.value).collect();
        out.push(realized_volatility(&window, convention)?);
    }
    Ok(out)
}
