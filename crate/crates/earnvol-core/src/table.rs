//! The event universe: per-event volatility records for every window,
//! overlap statistics, rolling-quarter splits, and history augmentation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::date::Date;
use crate::event::{EarningsEvent, EventId, Quarter};
use crate::price::{PricePoint, PriceSeries};
use crate::vol::{post_earnings_volatility, VolConvention, VolError, VolatilityRecord};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum TableError {
    #[error("no price series for ticker {0}")]
    MissingPrices(String),
    #[error("duplicate event for {ticker} on {date}")]
    DuplicateEvent { ticker: String, date: Date },
    #[error("test set is empty; OET denominator would be zero")]
    EmptyTestSet,
    #[error("no complete events in target quarter {0}")]
    EmptyTargetQuarter(Quarter),
    #[error("no complete events before target quarter {0}")]
    NoPriorEvents(Quarter),
    #[error("split ratio parts must be positive")]
    BadRatio,
    #[error("temporal hygiene violated: {event} announced {date}, on or after {target} starts")]
    TemporalHygiene { event: EventId, date: Date, target: Quarter },
    #[error("extended prices for {ticker} disagree with native close on {date}: {extended} vs {native}")]
    PriceConflict { ticker: String, date: Date, extended: f64, native: f64 },
    #[error("event {0} not present in table")]
    UnknownEvent(EventId),
}

/// Where an event came from: the native files or a history extension.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    Native,
    Augmented,
}

/// Why an event is excluded from evaluation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum IncompleteReason {
    InsufficientFutureData { tau: u32 },
    DegenerateVariance { tau: u32 },
    NoPostTradingDay,
}

impl core::fmt::Display for IncompleteReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            IncompleteReason::InsufficientFutureData { tau } => {
                write!(f, "insufficient future data for tau={tau}")
            }
            IncompleteReason::DegenerateVariance { tau } => {
                write!(f, "degenerate variance for tau={tau}")
            }
            IncompleteReason::NoPostTradingDay => f.write_str("no post-earnings trading day"),
        }
    }
}

/// Events joined to their volatility records for every window. An event is
/// complete when all windows computed; incomplete events stay in the table
/// with a reason but are excluded from training pools and test sets.
#[derive(Clone, Debug)]
pub struct EventTable {
    convention: VolConvention,
    taus: Vec<u32>,
    events: BTreeMap<EventId, EarningsEvent>,
    records: BTreeMap<EventId, BTreeMap<u32, VolatilityRecord>>,
    incomplete: BTreeMap<EventId, IncompleteReason>,
    provenance: BTreeMap<EventId, Provenance>,
}

impl EventTable {
    /// Joins each event to its ticker's prices and computes every window.
    pub fn build(
        events: Vec<EarningsEvent>,
        prices: &BTreeMap<String, PriceSeries>,
        convention: VolConvention,
        taus: &[u32],
    ) -> Result<Self, TableError> {
        let mut table = EventTable {
            convention,
            taus: taus.to_vec(),
            events: BTreeMap::new(),
            records: BTreeMap::new(),
            incomplete: BTreeMap::new(),
            provenance: BTreeMap::new(),
        };
        table.insert_events(events, prices, Provenance::Native)?;
        Ok(table)
    }

    fn insert_events(
        &mut self,
        events: Vec<EarningsEvent>,
        prices: &BTreeMap<String, PriceSeries>,
        provenance: Provenance,
    ) -> Result<(), TableError> {
        let mut seen: BTreeSet<(String, Date)> = self
            .events
            .values()
            .map(|e| (e.ticker.clone(), e.announce_date))
            .collect();
        for event in events {
            if !seen.insert((event.ticker.clone(), event.announce_date)) {
                return Err(TableError::DuplicateEvent {
                    ticker: event.ticker,
                    date: event.announce_date,
                });
            }
            let series = prices
                .get(&event.ticker)
                .ok_or_else(|| TableError::MissingPrices(event.ticker.clone()))?;
            let mut recs = BTreeMap::new();
            let mut reason = None;
            for &tau in &self.taus {
                match post_earnings_volatility(&event, series, tau, self.convention) {
                    Ok(rec) => {
                        recs.insert(tau, rec);
                    }
                    Err(VolError::InsufficientFutureData { .. }) => {
                        reason.get_or_insert(IncompleteReason::InsufficientFutureData { tau });
                    }
                    Err(VolError::DegenerateVariance) => {
                        reason.get_or_insert(IncompleteReason::DegenerateVariance { tau });
                    }
                    Err(VolError::NoPostTradingDay(_)) => {
                        reason.get_or_insert(IncompleteReason::NoPostTradingDay);
                    }
                    Err(VolError::Price(_)) => {
                        return Err(TableError::MissingPrices(event.ticker.clone()))
                    }
                    // Window shorter than 2 or similar misuse: surface as
                    // incomplete rather than aborting the whole build.
                    Err(_) => {
                        reason.get_or_insert(IncompleteReason::InsufficientFutureData { tau });
                    }
                }
            }
            let id = event.id.clone();
            if let Some(reason) = reason {
                self.incomplete.insert(id.clone(), reason);
            }
            self.records.insert(id.clone(), recs);
            self.provenance.insert(id.clone(), provenance);
            self.events.insert(id, event);
        }
        Ok(())
    }

    pub fn convention(&self) -> VolConvention {
        self.convention
    }

    pub fn taus(&self) -> &[u32] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &EarningsEvent> {
        self.events.values()
    }

    pub fn event(&self, id: &EventId) -> Option<&EarningsEvent> {
        self.events.get(id)
    }

    pub fn provenance(&self, id: &EventId) -> Option<Provenance> {
        self.provenance.get(id).copied()
    }

    pub fn is_complete(&self, id: &EventId) -> bool {
        self.records
            .get(id)
            .map(|r| self.taus.iter().all(|t| r.contains_key(t)))
            .unwrap_or(false)
    }

    pub fn complete_events(&self) -> impl Iterator<Item = &EarningsEvent> {
        self.events.values().filter(|e| self.is_complete(&e.id))
    }

    pub fn incomplete_reason(&self, id: &EventId) -> Option<&IncompleteReason> {
        self.incomplete.get(id)
    }

    pub fn incomplete_count(&self) -> usize {
        self.incomplete.len()
    }

    /// All records computed for an event (may be a partial set of windows).
    pub fn records_for(&self, id: &EventId) -> Option<&BTreeMap<u32, VolatilityRecord>> {
        self.records.get(id)
    }

    pub fn record(&self, id: &EventId, tau: u32) -> Option<&VolatilityRecord> {
        self.records.get(id).and_then(|r| r.get(&tau))
    }

    pub fn quarters(&self) -> BTreeSet<Quarter> {
        self.events.values().map(|e| e.quarter).collect()
    }

    pub fn tickers(&self) -> BTreeSet<&str> {
        self.events.values().map(|e| e.ticker.as_str()).collect()
    }

    /// The ticker's complete prior events (announced strictly earlier), in
    /// chronological order, with their records. Empty for a first-ever event.
    pub fn same_ticker_history(&self, event: &EarningsEvent) -> Vec<&EarningsEvent> {
        let mut prior: Vec<&EarningsEvent> = self
            .events
            .values()
            .filter(|e| {
                e.ticker == event.ticker
                    && e.announce_date < event.announce_date
                    && self.is_complete(&e.id)
            })
            .collect();
        prior.sort_by_key(|e| e.announce_date);
        prior
    }

    /// Prior same-ticker volatility values for one window, chronological.
    pub fn history_values(&self, event: &EarningsEvent, tau: u32) -> Vec<f64> {
        self.same_ticker_history(event)
            .iter()
            .filter_map(|e| self.record(&e.id, tau).map(|r| r.value))
            .collect()
    }

    /// Left-extends the table with earlier earnings computed from extended
    /// prices. Native events and their records are carried over unchanged;
    /// extension events already present natively are ignored. Only extension
    /// events announced within `years` years before the earliest native
    /// announcement (and strictly before it) are added, tagged `Augmented`.
    pub fn augment(
        &self,
        extension_events: Vec<EarningsEvent>,
        extension_prices: &BTreeMap<String, PriceSeries>,
        native_prices: &BTreeMap<String, PriceSeries>,
        years: u32,
    ) -> Result<EventTable, TableError> {
        let mut out = self.clone();
        if extension_events.is_empty() {
            return Ok(out);
        }
        let Some(native_start) = self.events.values().map(|e| e.announce_date).min() else {
            return Ok(out);
        };
        let cutoff = native_start.years_back(years);

        let existing: BTreeSet<(String, Date)> = self
            .events
            .values()
            .map(|e| (e.ticker.clone(), e.announce_date))
            .collect();
        let new_events: Vec<EarningsEvent> = extension_events
            .into_iter()
            .filter(|e| e.announce_date >= cutoff && e.announce_date < native_start)
            .filter(|e| !existing.contains(&(e.ticker.clone(), e.announce_date)))
            .collect();
        if new_events.is_empty() {
            return Ok(out);
        }

        let mut merged: BTreeMap<String, PriceSeries> = BTreeMap::new();
        for event in &new_events {
            if merged.contains_key(&event.ticker) {
                continue;
            }
            let series = merge_prices(
                &event.ticker,
                extension_prices.get(&event.ticker),
                native_prices.get(&event.ticker),
            )?;
            merged.insert(event.ticker.clone(), series);
        }
        out.insert_events(new_events, &merged, Provenance::Augmented)?;
        Ok(out)
    }
}

/// Joins extended and native closes for one ticker, requiring agreement to
/// 1e-9 relative on overlapping dates.
fn merge_prices(
    ticker: &str,
    extended: Option<&PriceSeries>,
    native: Option<&PriceSeries>,
) -> Result<PriceSeries, TableError> {
    let mut by_date: BTreeMap<Date, f64> = BTreeMap::new();
    if let Some(native) = native {
        for p in native.points() {
            by_date.insert(p.date, p.close);
        }
    }
    if let Some(extended) = extended {
        for p in extended.points() {
            if let Some(&native_close) = by_date.get(&p.date) {
                let scale = libm::fabs(native_close).max(libm::fabs(p.close));
                if libm::fabs(p.close - native_close) > 1e-9 * scale {
                    return Err(TableError::PriceConflict {
                        ticker: String::from(ticker),
                        date: p.date,
                        extended: p.close,
                        native: native_close,
                    });
                }
            } else {
                by_date.insert(p.date, p.close);
            }
        }
    }
    if by_date.is_empty() {
        return Err(TableError::MissingPrices(String::from(ticker)));
    }
    let points: Vec<PricePoint> =
        by_date.into_iter().map(|(date, close)| PricePoint { date, close }).collect();
    PriceSeries::new(ticker, points).map_err(|_| TableError::MissingPrices(String::from(ticker)))
}

/// Overlapping Earnings per Ticker: training earnings whose ticker appears in
/// the test set, over the number of distinct test tickers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Oet {
    pub overlapping: usize,
    pub test_tickers: usize,
}

impl Oet {
    pub fn value(&self) -> f64 {
        self.overlapping as f64 / self.test_tickers as f64
    }
}

pub fn oet<'a, 'b>(
    train: impl IntoIterator<Item = &'a EarningsEvent>,
    test: impl IntoIterator<Item = &'b EarningsEvent>,
) -> Result<Oet, TableError> {
    let test_tickers: BTreeSet<&str> = test.into_iter().map(|e| e.ticker.as_str()).collect();
    if test_tickers.is_empty() {
        return Err(TableError::EmptyTestSet);
    }
    let overlapping = train
        .into_iter()
        .filter(|e| test_tickers.contains(e.ticker.as_str()))
        .count();
    Ok(Oet { overlapping, test_tickers: test_tickers.len() })
}

/// Train-to-validation proportions for the shuffled prior pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitRatio {
    pub train: u32,
    pub val: u32,
}

impl Default for SplitRatio {
    fn default() -> Self {
        SplitRatio { train: 2, val: 1 }
    }
}

/// Event assignments for one evaluation quarter. The three sets are pairwise
/// disjoint; every test event is in the target quarter and every train/val
/// event strictly precedes it.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Split {
    pub target: Quarter,
    pub seed: u64,
    pub train: BTreeSet<EventId>,
    pub val: BTreeSet<EventId>,
    pub test: BTreeSet<EventId>,
}

impl Split {
    /// Train and validation together: the pool the training-free baselines
    /// aggregate over.
    pub fn pool(&self) -> impl Iterator<Item = &EventId> {
        self.train.iter().chain(self.val.iter())
    }
}

/// Splits the table for one target quarter: the quarter's complete events are
/// the test set; all complete earlier events are shuffled with the seed and
/// partitioned train:val (validation size floored, remainder to train).
///
/// The shuffle runs over event ids sorted lexicographically first, so the
/// outcome is independent of input file ordering.
pub fn rolling_quarter_split(
    table: &EventTable,
    target: Quarter,
    ratio: SplitRatio,
    seed: u64,
) -> Result<Split, TableError> {
    if ratio.train == 0 || ratio.val == 0 {
        return Err(TableError::BadRatio);
    }
    let mut test = BTreeSet::new();
    let mut prior: Vec<EventId> = Vec::new();
    for event in table.complete_events() {
        if event.quarter == target {
            test.insert(event.id.clone());
        } else if event.quarter < target {
            prior.push(event.id.clone());
        }
    }
    if test.is_empty() {
        return Err(TableError::EmptyTargetQuarter(target));
    }
    if prior.is_empty() {
        return Err(TableError::NoPriorEvents(target));
    }
    let start = target.start_date();
    for id in &prior {
        let event = &table.events[id];
        if event.announce_date >= start {
            return Err(TableError::TemporalHygiene {
                event: id.clone(),
                date: event.announce_date,
                target,
            });
        }
    }

    prior.sort();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    prior.shuffle(&mut rng);

    let val_size =
        (prior.len() as u64 * ratio.val as u64 / (ratio.train + ratio.val) as u64) as usize;
    let train_size = prior.len() - val_size;
    let train: BTreeSet<EventId> = prior[..train_size].iter().cloned().collect();
    let val: BTreeSet<EventId> = prior[train_size..].iter().cloned().collect();
    Ok(Split { target, seed, train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::MarketSession;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn d(s: &str) -> Date {
        s.parse().unwrap()
    }

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    /// Weekday-only synthetic series with mildly varying closes.
    fn synthetic_series(ticker: &str, start: &str, days: usize) -> PriceSeries {
        let start: Date = start.parse().unwrap();
        let mut points = Vec::new();
        let mut epoch = start.days_from_epoch();
        let mut close = 100.0;
        let mut k = 0u32;
        while points.len() < days {
            let date = date_from_epoch(epoch);
            if date.weekday() < 5 {
                // Deterministic wobble, never degenerate.
                let step = 0.01 * (1.0 + 0.5 * libm::sin(k as f64));
                close *= 1.0 + if k.is_multiple_of(2) { step } else { -step * 0.6 };
                points.push(PricePoint { date, close });
                k += 1;
            }
            epoch += 1;
        }
        PriceSeries::new(ticker, points).unwrap()
    }

    fn date_from_epoch(days: i64) -> Date {
        // Scan is fine for tests.
        let mut date = d("2015-01-01");
        let mut e = date.days_from_epoch();
        while e < days {
            e += 1;
            date = next_day(date);
        }
        date
    }

    fn next_day(date: Date) -> Date {
        for (y, m, dd) in [
            (date.year(), date.month(), date.day() + 1),
            (date.year(), date.month() + 1, 1),
            (date.year() + 1, 1, 1),
        ] {
            if let Ok(n) = Date::new(y, m, dd) {
                return n;
            }
        }
        unreachable!()
    }

    fn event(ticker: &str, date: &str, quarter: &str) -> EarningsEvent {
        EarningsEvent::new(ticker, d(date), MarketSession::BeforeOpen, q(quarter))
    }

    #[test]
    fn build_computes_all_windows() {
        let mut prices = BTreeMap::new();
        prices.insert("AAA".to_string(), synthetic_series("AAA", "2021-01-04", 60));
        let events = vec![event("AAA", "2021-02-01", "2021Q1")];
        let table =
            EventTable::build(events, &prices, VolConvention::PaperLiteral, &STANDARD).unwrap();
        assert_eq!(table.len(), 1);
        let id = table.events().next().unwrap().id.clone();
        assert!(table.is_complete(&id));
        assert_eq!(table.records_for(&id).unwrap().len(), 4);
    }

    const STANDARD: [u32; 4] = crate::vol::STANDARD_WINDOWS;

    #[test]
    fn short_future_marks_longer_windows_incomplete() {
        // Series ends 10 trading days after the announcement: windows 3 and 7
        // fit, 15 and 30 do not.
        let mut prices = BTreeMap::new();
        prices.insert("AAA".to_string(), synthetic_series("AAA", "2021-01-04", 40));
        let announce = prices["AAA"].points()[30].date;
        let events = vec![EarningsEvent::new(
            "AAA",
            announce,
            MarketSession::BeforeOpen,
            q("2021Q1"),
        )];
        let table =
            EventTable::build(events, &prices, VolConvention::PaperLiteral, &STANDARD).unwrap();
        let id = table.events().next().unwrap().id.clone();
        assert!(!table.is_complete(&id));
        let recs = table.records_for(&id).unwrap();
        assert!(recs.contains_key(&3) && recs.contains_key(&7));
        assert!(!recs.contains_key(&15) && !recs.contains_key(&30));
        assert!(matches!(
            table.incomplete_reason(&id),
            Some(IncompleteReason::InsufficientFutureData { tau: 15 })
        ));
    }

    #[test]
    fn missing_prices_is_a_hard_error() {
        let prices = BTreeMap::new();
        let events = vec![event("AAA", "2021-02-01", "2021Q1")];
        assert!(matches!(
            EventTable::build(events, &prices, VolConvention::PaperLiteral, &STANDARD),
            Err(TableError::MissingPrices(_))
        ));
    }

    #[test]
    fn duplicate_events_rejected() {
        let mut prices = BTreeMap::new();
        prices.insert("AAA".to_string(), synthetic_series("AAA", "2021-01-04", 60));
        let events =
            vec![event("AAA", "2021-02-01", "2021Q1"), event("AAA", "2021-02-01", "2021Q1")];
        assert!(matches!(
            EventTable::build(events, &prices, VolConvention::PaperLiteral, &STANDARD),
            Err(TableError::DuplicateEvent { .. })
        ));
    }

    #[test]
    fn oet_reproduces_simple_counts() {
        let train: Vec<EarningsEvent> = (0..5)
            .map(|i| event("AAA", &format!("2020-0{}-03", i + 1), "2020Q1"))
            .chain((0..3).map(|i| event("BBB", &format!("2020-0{}-06", i + 1), "2020Q1")))
            .collect();
        let test = vec![event("AAA", "2021-02-01", "2021Q1")];
        let got = oet(&train, &test).unwrap();
        assert_eq!(got.overlapping, 5);
        assert_eq!(got.test_tickers, 1);
        assert!((got.value() - 5.0).abs() < 1e-12);

        let disjoint = vec![event("ZZZ", "2021-02-01", "2021Q1")];
        assert_eq!(oet(&train, &disjoint).unwrap().value(), 0.0);
        assert!(matches!(oet(&train, &[]), Err(TableError::EmptyTestSet)));
    }

    fn quarterly_table(tickers: &[&str], quarters: &[&str]) -> EventTable {
        let mut prices = BTreeMap::new();
        let mut events = Vec::new();
        for ticker in tickers {
            prices.insert(ticker.to_string(), synthetic_series(ticker, "2018-06-01", 1500));
        }
        for (qi, quarter) in quarters.iter().enumerate() {
            for ticker in tickers {
                let qq = q(quarter);
                let month = (qq.quarter() - 1) * 3 + 2;
                let mut date = Date::new(qq.year(), month, 10).unwrap();
                while date.weekday() >= 5 {
                    date = next_day(date);
                }
                let _ = qi;
                events.push(EarningsEvent::new(
                    *ticker,
                    date,
                    MarketSession::BeforeOpen,
                    qq,
                ));
            }
        }
        EventTable::build(events, &prices, VolConvention::PaperLiteral, &STANDARD).unwrap()
    }

    #[test]
    fn split_sizes_follow_the_ratio() {
        let table = quarterly_table(&["AAA", "BBB", "CCC"], &["2020Q1", "2020Q2", "2020Q3"]);
        let split =
            rolling_quarter_split(&table, q("2020Q3"), SplitRatio::default(), 42).unwrap();
        assert_eq!(split.test.len(), 3);
        assert_eq!(split.train.len(), 4);
        assert_eq!(split.val.len(), 2);
        // Pairwise disjoint.
        assert!(split.train.intersection(&split.val).next().is_none());
        assert!(split.train.intersection(&split.test).next().is_none());
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let table = quarterly_table(&["AAA", "BBB", "CCC"], &["2020Q1", "2020Q2", "2020Q3"]);
        let a = rolling_quarter_split(&table, q("2020Q3"), SplitRatio::default(), 42).unwrap();
        let b = rolling_quarter_split(&table, q("2020Q3"), SplitRatio::default(), 42).unwrap();
        let c = rolling_quarter_split(&table, q("2020Q3"), SplitRatio::default(), 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_pool_floors_validation() {
        let table = quarterly_table(&["AAA", "BBB", "CCC"], &["2020Q1", "2020Q2"]);
        let split =
            rolling_quarter_split(&table, q("2020Q2"), SplitRatio::default(), 42).unwrap();
        assert_eq!(split.train.len(), 2);
        assert_eq!(split.val.len(), 1);
    }

    #[test]
    fn split_requires_prior_events() {
        let table = quarterly_table(&["AAA"], &["2020Q1"]);
        assert!(matches!(
            rolling_quarter_split(&table, q("2020Q1"), SplitRatio::default(), 42),
            Err(TableError::NoPriorEvents(_))
        ));
    }

    #[test]
    fn split_rejects_mislabeled_prior_events() {
        // An event labeled 2020Q1 but announced inside 2020Q3 would leak the
        // target quarter into the pool; the split refuses it.
        let mut prices = BTreeMap::new();
        for t in ["AAA", "BBB"] {
            prices.insert(t.to_string(), synthetic_series(t, "2018-06-01", 1200));
        }
        let events = vec![
            event("AAA", "2020-02-10", "2020Q1"),
            event("BBB", "2020-07-06", "2020Q1"),
            event("AAA", "2020-08-10", "2020Q3"),
            event("BBB", "2020-08-10", "2020Q3"),
        ];
        let table =
            EventTable::build(events, &prices, VolConvention::PaperLiteral, &STANDARD).unwrap();
        assert!(matches!(
            rolling_quarter_split(&table, q("2020Q3"), SplitRatio::default(), 42),
            Err(TableError::TemporalHygiene { .. })
        ));
    }

    #[test]
    fn history_is_chronological_and_prior_only() {
        let table = quarterly_table(&["AAA", "BBB"], &["2020Q1", "2020Q2", "2020Q3", "2020Q4"]);
        let last = table
            .events()
            .find(|e| e.ticker == "AAA" && e.quarter == q("2020Q4"))
            .unwrap()
            .clone();
        let history = table.same_ticker_history(&last);
        assert_eq!(history.len(), 3);
        assert!(history.windows(2).all(|w| w[0].announce_date < w[1].announce_date));
        assert!(history.iter().all(|e| e.ticker == "AAA"));

        let first = table
            .events()
            .find(|e| e.ticker == "AAA" && e.quarter == q("2020Q1"))
            .unwrap()
            .clone();
        assert!(table.same_ticker_history(&first).is_empty());
    }

    #[test]
    fn augment_adds_prior_events_and_preserves_test_records() {
        let tickers = ["AAA", "BBB"];
        let mut native_prices = BTreeMap::new();
        let mut ext_prices = BTreeMap::new();
        for t in tickers {
            // Extended series starts two years earlier and overlaps the
            // native range exactly (same generator, same start for overlap).
            ext_prices.insert(t.to_string(), synthetic_series(t, "2018-06-01", 1500));
            native_prices.insert(t.to_string(), synthetic_series(t, "2018-06-01", 1500));
        }
        let native_events = vec![
            event("AAA", "2020-05-11", "2020Q2"),
            event("BBB", "2020-05-11", "2020Q2"),
            event("AAA", "2020-08-10", "2020Q3"),
            event("BBB", "2020-08-10", "2020Q3"),
        ];
        let table = EventTable::build(
            native_events,
            &native_prices,
            VolConvention::PaperLiteral,
            &STANDARD,
        )
        .unwrap();

        let ext_events = vec![
            event("AAA", "2019-05-13", "2019Q2"),
            event("AAA", "2019-08-12", "2019Q3"),
            event("BBB", "2019-05-13", "2019Q2"),
            // Outside the 5-year window start? No: inside. One duplicate of a
            // native event must be ignored.
            event("AAA", "2020-05-11", "2020Q2"),
        ];
        let augmented = table.augment(ext_events, &ext_prices, &native_prices, 5).unwrap();
        assert_eq!(augmented.len(), table.len() + 3);

        // Native records byte-identical.
        for e in table.events() {
            for tau in STANDARD {
                let a = table.record(&e.id, tau).unwrap().value;
                let b = augmented.record(&e.id, tau).unwrap().value;
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        let aug_id = EventId::new("AAA:2019-05-13");
        assert_eq!(augmented.provenance(&aug_id), Some(Provenance::Augmented));

        // Same-ticker history grows by exactly the injected prior events.
        let late = augmented
            .events()
            .find(|e| e.ticker == "AAA" && e.quarter == q("2020Q3"))
            .unwrap()
            .clone();
        assert_eq!(table.same_ticker_history(&late).len(), 1);
        assert_eq!(augmented.same_ticker_history(&late).len(), 3);

        // OET before/after: +k prior events for test tickers raises the value
        // by exactly k / |test tickers|.
        let split = rolling_quarter_split(&augmented, q("2020Q3"), SplitRatio::default(), 42)
            .unwrap();
        let train: Vec<&EarningsEvent> =
            split.pool().map(|id| augmented.event(id).unwrap()).collect();
        let test: Vec<&EarningsEvent> =
            split.test.iter().map(|id| augmented.event(id).unwrap()).collect();
        let with = oet(train.iter().copied(), test.iter().copied()).unwrap();

        let base_split = rolling_quarter_split(&table, q("2020Q3"), SplitRatio::default(), 42)
            .unwrap();
        let base_train: Vec<&EarningsEvent> =
            base_split.pool().map(|id| table.event(id).unwrap()).collect();
        let base_test: Vec<&EarningsEvent> =
            base_split.test.iter().map(|id| table.event(id).unwrap()).collect();
        let without = oet(base_train.iter().copied(), base_test.iter().copied()).unwrap();
        assert!((with.value() - without.value() - 3.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn augment_with_empty_extension_is_identity() {
        let mut prices = BTreeMap::new();
        prices.insert("AAA".to_string(), synthetic_series("AAA", "2020-01-06", 120));
        let table = EventTable::build(
            vec![event("AAA", "2020-03-02", "2020Q1")],
            &prices,
            VolConvention::PaperLiteral,
            &STANDARD,
        )
        .unwrap();
        let augmented = table.augment(Vec::new(), &BTreeMap::new(), &prices, 5).unwrap();
        assert_eq!(augmented.len(), table.len());
    }

    #[test]
    fn augment_detects_conflicting_closes() {
        let mut native_prices = BTreeMap::new();
        native_prices.insert("AAA".to_string(), synthetic_series("AAA", "2020-01-06", 200));
        let table = EventTable::build(
            vec![event("AAA", "2020-05-11", "2020Q2")],
            &native_prices,
            VolConvention::PaperLiteral,
            &STANDARD,
        )
        .unwrap();
        // Same dates, different closes.
        let mut bad = BTreeMap::new();
        let mut pts: Vec<PricePoint> = native_prices["AAA"].points().to_vec();
        pts[10].close *= 1.5;
        let mut earlier = synthetic_series("AAA", "2019-01-07", 100).points().to_vec();
        earlier.extend(pts);
        bad.insert("AAA".to_string(), PriceSeries::new("AAA", earlier).unwrap());
        let res = table.augment(
            vec![event("AAA", "2019-05-13", "2019Q2")],
            &bad,
            &native_prices,
            5,
        );
        assert!(matches!(res, Err(TableError::PriceConflict { .. })));
    }
}
