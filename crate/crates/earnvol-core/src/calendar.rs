//! Per-ticker trading calendars and offset arithmetic.
//!
//! A calendar is derived from the dates present in a ticker's price records;
//! any date with a close is a trading day. All window arithmetic is done by
//! ordinal position in the calendar, never by adding calendar days.

use alloc::vec::Vec;

use crate::date::Date;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum CalendarError {
    #[error("calendar is empty")]
    Empty,
    #[error("calendar dates must be strictly increasing (violation at position {position})")]
    Unordered { position: usize },
    #[error("{0} is not a trading day in this calendar")]
    NotTradingDay(Date),
    #[error("offset {offset} from {date} leaves the calendar (index {index} of {len})")]
    OffsetOutOfRange { date: Date, offset: i64, index: i64, len: usize },
}

/// Ordered list of trading days.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradingCalendar {
    days: Vec<Date>,
}

impl TradingCalendar {
    /// Builds a calendar from already-ordered days, rejecting duplicates and
    /// out-of-order entries.
    pub fn from_days(days: Vec<Date>) -> Result<Self, CalendarError> {
        if days.is_empty() {
            return Err(CalendarError::Empty);
        }
        for (i, pair) in days.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(CalendarError::Unordered { position: i + 1 });
            }
        }
        Ok(TradingCalendar { days })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn days(&self) -> &[Date] {
        &self.days
    }

    pub fn at(&self, index: usize) -> Option<Date> {
        self.days.get(index).copied()
    }

    /// Ordinal position of a member date.
    pub fn index_of(&self, date: Date) -> Option<usize> {
        self.days.binary_search(&date).ok()
    }

    pub fn contains(&self, date: Date) -> bool {
        self.index_of(date).is_some()
    }

    /// The trading day `offset` positions away from `date` in calendar order.
    /// `date` must itself be a trading day and the target must stay in range.
    pub fn at_offset(&self, date: Date, offset: i64) -> Result<Date, CalendarError> {
        let index = self
            .index_of(date)
            .ok_or(CalendarError::NotTradingDay(date))? as i64;
        let target = index + offset;
        if target < 0 || target >= self.days.len() as i64 {
            return Err(CalendarError::OffsetOutOfRange {
                date,
                offset,
                index: target,
                len: self.days.len(),
            });
        }
        Ok(self.days[target as usize])
    }

    /// First trading day on or after `date`, if any.
    pub fn next_on_or_after(&self, date: Date) -> Option<Date> {
        match self.days.binary_search(&date) {
            Ok(i) => Some(self.days[i]),
            Err(i) => self.days.get(i).copied(),
        }
    }

    /// First trading day strictly after `date`, if any.
    pub fn next_after(&self, date: Date) -> Option<Date> {
        match self.days.binary_search(&date) {
            Ok(i) => self.days.get(i + 1).copied(),
            Err(i) => self.days.get(i).copied(),
        }
    }
}
