//! Shared fixtures for the integration and acceptance suites.

use std::path::Path;

use earnvol_core::date::Date;
use earnvol_core::event::{EarningsEvent, MarketSession, Quarter};

/// Earnings metadata whose overlap counts are chosen exactly: `overlap`
/// training rows on test tickers, `filler` training rows on disjoint tickers,
/// and `test_rows` test rows spread over `test_tickers` distinct tickers.
pub fn oet_fixture(
    overlap: usize,
    filler: usize,
    test_rows: usize,
    test_tickers: usize,
) -> (Vec<EarningsEvent>, Vec<EarningsEvent>) {
    assert!(test_tickers >= 1 && test_rows >= test_tickers);
    let base = "2016-01-01".parse::<Date>().unwrap().days_from_epoch();
    let mut serial = 0i64;
    let mut event = |ticker: String| {
        let date = Date::from_days_epoch(base + serial);
        serial += 1;
        let quarter = Quarter::new(date.year(), (date.month() - 1) / 3 + 1).unwrap();
        let session = if serial % 2 == 0 {
            MarketSession::BeforeOpen
        } else {
            MarketSession::AfterClose
        };
        EarningsEvent::new(ticker, date, session, quarter)
    };

    let mut train = Vec::new();
    for i in 0..overlap {
        train.push(event(format!("K{:04}", i % test_tickers)));
    }
    for i in 0..filler {
        train.push(event(format!("X{i:04}")));
    }
    let mut test = Vec::new();
    for i in 0..test_rows {
        test.push(event(format!("K{:04}", i % test_tickers)));
    }
    (train, test)
}

#[allow(dead_code)] // each test target compiles its own copy of this module
pub fn write_earnings(events: &[EarningsEvent], path: &Path) {
    earnvol::formats::save_earnings(events, path).unwrap();
}

/// The worked-example price file: closes tuned so the before-open window
/// realizes exactly -2.726 and the after-close window exactly -3.703.
pub const TGT_PRICES: &str = "date,close\n\
    2017-11-14,100.0\n\
    2017-11-15,108.01971383677873\n\
    2017-11-16,108.01971383677873\n\
    2017-11-17,108.01971383677873\n\
    2017-11-20,111.28075428399282\n";
