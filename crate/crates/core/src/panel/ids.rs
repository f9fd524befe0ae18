use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Datelike, Months, NaiveDate};

use crate::error::{Error, Result};

/// Opaque firm key, cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FirmId(Arc<str>);

impl FirmId {
    pub fn new(id: impl AsRef<str>) -> Self {
        FirmId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FirmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FirmId {
    fn from(s: &str) -> Self {
        FirmId::new(s)
    }
}

/// A calendar month. Ordering and month arithmetic are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthStamp {
    year: i32,
    month: u8,
}

impl MonthStamp {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Validation(format!("month {month} outside 1..12")));
        }
        Ok(MonthStamp {
            year,
            month: month as u8,
        })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month as u32
    }

    /// Months since year 0, January.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        MonthStamp {
            year: ordinal.div_euclid(12) as i32,
            month: (ordinal.rem_euclid(12) + 1) as u8,
        }
    }

    pub fn add_months(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    pub fn succ(self) -> Self {
        self.add_months(1)
    }

    pub fn pred(self) -> Self {
        self.add_months(-1)
    }

    /// Signed number of months from `earlier` to `self`.
    pub fn months_since(self, earlier: MonthStamp) -> i64 {
        self.ordinal() - earlier.ordinal()
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month as u32, 1).expect("valid month")
    }

    pub fn last_day(self) -> NaiveDate {
        self.succ().first_day().pred_opt().expect("date in range")
    }

    pub fn of_date(date: NaiveDate) -> Self {
        MonthStamp {
            year: date.year(),
            month: date.month() as u8,
        }
    }

    /// Inclusive range of months.
    pub fn range_inclusive(from: MonthStamp, to: MonthStamp) -> impl Iterator<Item = MonthStamp> {
        (from.ordinal()..=to.ordinal()).map(MonthStamp::from_ordinal)
    }
}

impl fmt::Display for MonthStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthStamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Validation(format!("bad month `{s}`, expected YYYY-MM")))?;
        let year = y
            .parse()
            .map_err(|_| Error::Validation(format!("bad year in `{s}`")))?;
        let month = m
            .parse()
            .map_err(|_| Error::Validation(format!("bad month in `{s}`")))?;
        MonthStamp::new(year, month)
    }
}

/// Calendar-month addition that clamps to the end of shorter months.
pub fn add_calendar_months(date: NaiveDate, n: u32) -> NaiveDate {
    date.checked_add_months(Months::new(n))
        .expect("date arithmetic in range")
}
