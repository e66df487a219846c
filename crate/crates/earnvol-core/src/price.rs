//! Daily close series and the derived simple-return series.

use alloc::string::String;
use alloc::vec::Vec;

use crate::calendar::TradingCalendar;
use crate::date::Date;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum PriceError {
    #[error("price series for {ticker} is empty")]
    Empty { ticker: String },
    #[error("non-positive close {close} on {date}")]
    NonPositiveClose { date: Date, close: f64 },
    #[error("duplicate date {0}")]
    DuplicateDate(Date),
    #[error("dates out of order at {0}")]
    OutOfOrder(Date),
    #[error("need at least 2 closes to compute returns, got {0}")]
    TooFewPoints(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PricePoint {
    pub date: Date,
    pub close: f64,
}

/// Ordered per-ticker closes. Dates are strictly increasing and every close
/// is strictly positive and finite; inputs are treated as already adjusted
/// for splits and dividends.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, points: Vec<PricePoint>) -> Result<Self, PriceError> {
        let ticker = ticker.into();
        if points.is_empty() {
            return Err(PriceError::Empty { ticker });
        }
        for p in &points {
            if !(p.close.is_finite() && p.close > 0.0) {
                return Err(PriceError::NonPositiveClose { date: p.date, close: p.close });
            }
        }
        for pair in points.windows(2) {
            if pair[0].date == pair[1].date {
                return Err(PriceError::DuplicateDate(pair[1].date));
            }
            if pair[0].date > pair[1].date {
                return Err(PriceError::OutOfOrder(pair[1].date));
            }
        }
        Ok(PriceSeries { ticker, points })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The ticker's trading calendar: every date that has a close.
    pub fn trading_calendar(&self) -> TradingCalendar {
        let days: Vec<Date> = self.points.iter().map(|p| p.date).collect();
        TradingCalendar::from_days(days).expect("price dates are validated strictly increasing")
    }

    /// Daily simple returns, `(C_t - C_{t-1}) / C_{t-1}`, dated by the later
    /// close. One point shorter than the price series.
    pub fn returns(&self) -> Result<ReturnSeries, PriceError> {
        if self.points.len() < 2 {
            return Err(PriceError::TooFewPoints(self.points.len()));
        }
        let points = self
            .points
            .windows(2)
            .map(|w| ReturnPoint {
                date: w[1].date,
                value: (w[1].close - w[0].close) / w[0].close,
            })
            .collect();
        Ok(ReturnSeries { ticker: self.ticker.clone(), points })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnPoint {
    pub date: Date,
    pub value: f64,
}

/// Daily simple returns aligned to the source price series: point `k` carries
/// the return realized on price date `k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnSeries {
    ticker: String,
    points: Vec<ReturnPoint>,
}

impl ReturnSeries {
    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn points(&self) -> &[ReturnPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    /// Index of the return realized on `date`, if there is one.
    pub fn index_of(&self, date: Date) -> Option<usize> {
        self.points.binary_search_by(|p| p.date.cmp(&date)).ok()
    }
}
