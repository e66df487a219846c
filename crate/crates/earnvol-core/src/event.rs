//! Earnings events: ticker, announcement date, market session, and quarter.

use core::fmt;
use core::str::FromStr;

use alloc::format;
use alloc::string::String;

use crate::date::Date;

/// Whether the release happened before the market opened or after it closed.
/// This decides whether the announcement day itself is the first
/// post-earnings trading day.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MarketSession {
    BeforeOpen,
    AfterClose,
}

impl fmt::Display for MarketSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarketSession::BeforeOpen => f.write_str("before_open"),
            MarketSession::AfterClose => f.write_str("after_close"),
        }
    }
}

impl FromStr for MarketSession {
    type Err = ParseEventError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "before_open" => Ok(MarketSession::BeforeOpen),
            "after_close" => Ok(MarketSession::AfterClose),
            other => Err(ParseEventError::Session(String::from(other))),
        }
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseEventError {
    #[error("session must be before_open or after_close, got `{0}`")]
    Session(String),
    #[error("quarter must look like 2021Q1, got `{0}`")]
    Quarter(String),
}

/// A release quarter label, ordered chronologically.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Quarter {
    year: i32,
    quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Result<Self, ParseEventError> {
        if !(1..=4).contains(&quarter) {
            return Err(ParseEventError::Quarter(format!("{year}Q{quarter}")));
        }
        Ok(Quarter { year, quarter })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn quarter(&self) -> u8 {
        self.quarter
    }

    /// First calendar day of the quarter.
    pub fn start_date(&self) -> Date {
        Date::new(self.year, (self.quarter - 1) * 3 + 1, 1)
            .expect("first of a quarter month is always valid")
    }

    pub fn next(&self) -> Quarter {
        if self.quarter == 4 {
            Quarter { year: self.year + 1, quarter: 1 }
        } else {
            Quarter { year: self.year, quarter: self.quarter + 1 }
        }
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Quarter {
    type Err = ParseEventError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseEventError::Quarter(String::from(s));
        let (year, q) = s.split_once(['Q', 'q']).ok_or_else(err)?;
        let year: i32 = year.parse().map_err(|_| err())?;
        let quarter: u8 = q.parse().map_err(|_| err())?;
        Quarter::new(year, quarter).map_err(|_| err())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Quarter {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Quarter {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Opaque event identifier, unique within a table.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct EventId(String);

impl EventId {
    pub fn new(id: impl Into<String>) -> Self {
        EventId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One earnings announcement.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EarningsEvent {
    pub id: EventId,
    pub ticker: String,
    pub announce_date: Date,
    pub session: MarketSession,
    pub quarter: Quarter,
    /// Optional pass-through sector label; drives no computation.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub sector: Option<String>,
}

impl EarningsEvent {
    pub fn new(
        ticker: impl Into<String>,
        announce_date: Date,
        session: MarketSession,
        quarter: Quarter,
    ) -> Self {
        let ticker = ticker.into();
        let id = EventId::new(format!("{ticker}:{announce_date}"));
        EarningsEvent { id, ticker, announce_date, session, quarter, sector: None }
    }

    pub fn with_sector(mut self, sector: impl Into<String>) -> Self {
        self.sector = Some(sector.into());
        self
    }
}
