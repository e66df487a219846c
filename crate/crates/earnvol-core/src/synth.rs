//! Deterministic synthetic datasets shaped like a dense quarterly earnings
//! corpus: one announcement per ticker per quarter over a shared weekday
//! calendar, with ticker-specific return scales. Used by the test suites and
//! for runnable demos; generation is a pure function of the config.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::date::Date;
use crate::event::{EarningsEvent, MarketSession, Quarter};
use crate::price::{PricePoint, PriceSeries};

#[derive(Clone, Copy, Debug)]
pub struct SynthConfig {
    pub tickers: usize,
    pub start_quarter: Quarter,
    pub quarters: usize,
    pub seed: u64,
    /// Per-ticker daily return scale: `sd_i = exp(N(level_ln_mean, level_ln_sd))`.
    /// A wide `level_ln_sd` plants distinct per-ticker volatility signatures.
    pub level_ln_mean: f64,
    pub level_ln_sd: f64,
    /// Multiplier on the return scale of each event's first post-earnings
    /// day. 1.0 disables the announcement shock.
    pub announcement_shock: f64,
    /// Trading days of price history kept before the first quarter and after
    /// the last announcement.
    pub pre_margin: usize,
    pub post_margin: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tickers: 90,
            start_quarter: Quarter::new(2019, 1).expect("valid quarter"),
            quarters: 20,
            seed: 7,
            level_ln_mean: -3.9,
            level_ln_sd: 0.7,
            announcement_shock: 1.0,
            pre_margin: 120,
            post_margin: 45,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthDataset {
    pub events: Vec<EarningsEvent>,
    pub prices: BTreeMap<String, PriceSeries>,
}

fn quarter_list(start: Quarter, count: usize) -> Vec<Quarter> {
    let mut out = Vec::with_capacity(count);
    let mut q = start;
    for _ in 0..count {
        out.push(q);
        q = q.next();
    }
    out
}

/// Weekdays spanning the configured range with margins.
fn weekday_calendar(config: &SynthConfig, quarters: &[Quarter]) -> Vec<Date> {
    let first = quarters[0].start_date().days_from_epoch()
        - (config.pre_margin as i64 * 7) / 5
        - 7;
    let last = quarters[quarters.len() - 1].next().start_date().days_from_epoch()
        + (config.post_margin as i64 * 7) / 5
        + 7;
    let mut days = Vec::new();
    for epoch in first..=last {
        let date = Date::from_days_epoch(epoch);
        if date.weekday() < 5 {
            days.push(date);
        }
    }
    days
}

/// Generates the dataset: `tickers x quarters` complete events with genuine
/// before/after-market variety, plus per-ticker weekday price series.
pub fn generate(config: &SynthConfig) -> SynthDataset {
    let quarters = quarter_list(config.start_quarter, config.quarters);
    let days = weekday_calendar(config, &quarters);

    // Trading-day index ranges per quarter.
    let quarter_range = |q: Quarter| -> (usize, usize) {
        let start = q.start_date();
        let end = q.next().start_date();
        let lo = days.partition_point(|d| *d < start);
        let hi = days.partition_point(|d| *d < end);
        (lo, hi)
    };

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut events = Vec::new();
    let mut prices = BTreeMap::new();

    for i in 0..config.tickers {
        let ticker = format!("T{i:03}");
        let z: f64 = StandardNormal.sample(&mut rng);
        let sd = libm::exp(config.level_ln_mean + config.level_ln_sd * z).clamp(1e-3, 0.2);

        // Announcement dates first, so shocked days are known while the
        // return path is drawn.
        let mut announce_idx = Vec::with_capacity(quarters.len());
        for (qi, q) in quarters.iter().enumerate() {
            let (lo, hi) = quarter_range(*q);
            let span = hi - lo;
            debug_assert!(span > 45, "quarter with too few trading days");
            let at = lo + 25 + (i * 7 + qi * 3) % 15;
            debug_assert!(at < hi);
            let session = if (i + qi) % 2 == 0 {
                MarketSession::BeforeOpen
            } else {
                MarketSession::AfterClose
            };
            events.push(EarningsEvent::new(ticker.clone(), days[at], session, *q));
            // First post-earnings day: the announcement day itself before the
            // open, the next trading day after the close.
            let post = match session {
                MarketSession::BeforeOpen => at,
                MarketSession::AfterClose => at + 1,
            };
            announce_idx.push(post);
        }

        let mut shocked = alloc::vec![false; days.len()];
        for &post in &announce_idx {
            shocked[post] = true;
        }
        let mut close = 40.0 + (i % 50) as f64;
        let mut points = Vec::with_capacity(days.len());
        points.push(PricePoint { date: days[0], close });
        for (t, date) in days.iter().enumerate().skip(1) {
            let scale = if shocked[t] { sd * config.announcement_shock } else { sd };
            let z: f64 = StandardNormal.sample(&mut rng);
            let ret = (scale * z).max(-0.6);
            close *= 1.0 + ret;
            points.push(PricePoint { date: *date, close });
        }
        prices.insert(ticker.clone(), PriceSeries::new(ticker, points).expect("valid series"));
    }

    SynthDataset { events, prices }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::EventTable;
    use crate::vol::{VolConvention, STANDARD_WINDOWS};

    #[test]
    fn dense_fixture_has_the_expected_shape() {
        let config = SynthConfig { tickers: 90, quarters: 20, ..SynthConfig::default() };
        let data = generate(&config);
        assert_eq!(data.events.len(), 1800);
        assert_eq!(data.prices.len(), 90);
        let table = EventTable::build(
            data.events,
            &data.prices,
            VolConvention::PaperLiteral,
            &STANDARD_WINDOWS,
        )
        .unwrap();
        assert_eq!(table.len(), 1800);
        assert_eq!(table.incomplete_count(), 0, "fixture events must be complete");
    }

    #[test]
    fn generation_is_deterministic() {
        let config = SynthConfig { tickers: 4, quarters: 3, ..SynthConfig::default() };
        let a = generate(&config);
        let b = generate(&config);
        assert_eq!(a.events, b.events);
        assert_eq!(a.prices, b.prices);
    }
}
