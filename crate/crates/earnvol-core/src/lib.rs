//! Core analytics for post-earnings volatility work: trading-calendar
//! arithmetic, realized volatility with before/after-market window selection,
//! event tables with rolling-quarter splits, training-free PEV/STPEV
//! baselines, small from-scratch regressors, and embedding diagnostics.
//!
//! The crate is `no_std` (with `alloc`) so the numerics can be reused from
//! any host; file formats, configuration, and the CLI live in the companion
//! `earnvol` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baseline;
pub mod calendar;
pub mod date;
pub mod drift;
pub mod embed;
pub mod event;
pub mod mlp;
pub mod price;
pub mod report;
pub mod ridge;
pub mod stats;
pub mod synth;
pub mod table;
pub mod vol;

pub use baseline::{Aggregator, BaselineMode, BaselineRun, PredictionSet};
pub use calendar::TradingCalendar;
pub use date::Date;
pub use drift::DriftProfile;
pub use embed::{EmbeddingSet, GroupSimilarityReport, RandomMode};
pub use event::{EarningsEvent, EventId, MarketSession, Quarter};
pub use mlp::{MlpModel, TrainConfig};
pub use price::{PriceSeries, ReturnSeries};
pub use ridge::LinearModel;
pub use report::{EvalReport, ReportRow};
pub use table::{EventTable, Oet, Provenance, Split, SplitRatio};
pub use vol::{VolConvention, VolatilityRecord, STANDARD_WINDOWS};
