//! CSV ingestion with row-level validation.
//!
//! Every file needs its exact header row. Rows missing a required value are
//! dropped and counted in the [`FileReport`]; structurally malformed rows
//! abort the load with the offending line number.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use super::ids::{add_calendar_months, FirmId, MonthStamp};
use super::report::{FileReport, LoadReport};
use super::store::{
    Dataset, FundamentalRecord, FundamentalStore, PriceObs, PricePanel, TargetStore,
    DEFAULT_AVAILABILITY_LAG_MONTHS,
};
use crate::error::{Error, Result};

pub const PRICES_FILE: &str = "prices.csv";
pub const MARKET_FILE: &str = "market.csv";
pub const DAILY_FILE: &str = "daily.csv";
pub const FUNDAMENTALS_FILE: &str = "fundamentals.csv";
pub const TARGETS_FILE: &str = "targets.csv";

pub const PRICES_HEADER: [&str; 6] = ["firm_id", "year", "month", "price", "total_return", "market_cap"];
pub const MARKET_HEADER: [&str; 3] = ["year", "month", "market_return"];
pub const DAILY_HEADER: [&str; 3] = ["firm_id", "date", "return"];
pub const FUNDAMENTALS_HEADER: [&str; 11] = [
    "firm_id",
    "fiscal_year_end",
    "available_from",
    "ocf",
    "total_assets",
    "ebit",
    "net_income",
    "common_equity",
    "book_equity",
    "shares_adj",
    "industry2",
];
pub const TARGETS_HEADER: [&str; 4] = ["firm_id", "year", "month", "consensus_target"];

struct Rows<R: Read> {
    file: &'static str,
    reader: csv::Reader<R>,
}

struct Row {
    line: u64,
    record: csv::StringRecord,
}

impl<R: Read> Rows<R> {
    fn open(file: &'static str, source: R, header: &[&str]) -> Result<Option<Self>> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(source);
        let found = reader.headers().map_err(|e| csv_error(file, e))?.clone();
        if found.is_empty() {
            return Ok(None);
        }
        if found.iter().ne(header.iter().copied()) {
            return Err(Error::BadHeader {
                file: file.into(),
                expected: header.join(","),
                found: found.iter().collect::<Vec<_>>().join(","),
            });
        }
        Ok(Some(Rows { file, reader }))
    }

    fn next_row(&mut self) -> Option<Result<Row>> {
        let mut record = csv::StringRecord::new();
        match self.reader.read_record(&mut record) {
            Ok(false) => None,
            Ok(true) => {
                let line = record.position().map(|p| p.line()).unwrap_or(0);
                Some(Ok(Row { line, record }))
            }
            Err(e) => Some(Err(csv_error(self.file, e))),
        }
    }
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::MalformedRow {
        file: file.into(),
        line,
        message: e.to_string(),
    }
}

impl Row {
    fn field(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn malformed(&self, file: &str, message: String) -> Error {
        Error::MalformedRow {
            file: file.into(),
            line: self.line,
            message,
        }
    }

    fn required<T: std::str::FromStr>(&self, file: &str, i: usize, name: &str) -> Result<T> {
        let s = self.field(i);
        s.parse()
            .map_err(|_| self.malformed(file, format!("cannot parse {name} from `{s}`")))
    }

    /// `Ok(None)` for a blank field, error for an unparseable one.
    fn optional<T: std::str::FromStr>(&self, file: &str, i: usize, name: &str) -> Result<Option<T>> {
        if self.field(i).is_empty() {
            Ok(None)
        } else {
            self.required(file, i, name).map(Some)
        }
    }

    fn month(&self, file: &str, year_idx: usize) -> Result<MonthStamp> {
        let year: i32 = self.required(file, year_idx, "year")?;
        let month: u32 = self.required(file, year_idx + 1, "month")?;
        MonthStamp::new(year, month).map_err(|e| self.malformed(file, e.to_string()))
    }

    fn date(&self, file: &str, i: usize, name: &str) -> Result<Option<NaiveDate>> {
        let s = self.field(i);
        if s.is_empty() {
            return Ok(None);
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(Some)
            .map_err(|_| self.malformed(file, format!("cannot parse {name} date from `{s}`")))
    }

    fn firm(&self, file: &str) -> Result<FirmId> {
        let s = self.field(0);
        if s.is_empty() {
            return Err(self.malformed(file, "empty firm_id".into()));
        }
        Ok(FirmId::new(s))
    }
}

pub type PriceRow = (FirmId, MonthStamp, PriceObs);

/// Reads `prices.csv`. Rows with a blank price or return are dropped;
/// a blank market cap is loaded as 0.
pub fn read_prices(source: impl Read) -> Result<(Vec<PriceRow>, FileReport)> {
    let mut report = FileReport::new(PRICES_FILE);
    let mut out = Vec::new();
    let Some(mut rows) = Rows::open(PRICES_FILE, source, &PRICES_HEADER)? else {
        report.warnings.push("empty file".into());
        return Ok((out, report));
    };
    while let Some(row) = rows.next_row() {
        let row = row?;
        report.rows_read += 1;
        let firm = row.firm(PRICES_FILE)?;
        let month = row.month(PRICES_FILE, 1)?;
        let price: Option<f64> = row.optional(PRICES_FILE, 3, "price")?;
        let ret: Option<f64> = row.optional(PRICES_FILE, 4, "total_return")?;
        let cap: Option<f64> = row.optional(PRICES_FILE, 5, "market_cap")?;
        let (Some(price), Some(total_return)) = (price, ret) else {
            report.drop_row(row.line, "missing price or return");
            continue;
        };
        if !(price > 0.0) {
            return Err(row.malformed(PRICES_FILE, format!("price must be positive, got {price}")));
        }
        let market_cap = cap.unwrap_or(0.0);
        if market_cap < 0.0 {
            return Err(row.malformed(PRICES_FILE, "negative market_cap".into()));
        }
        out.push((
            firm,
            month,
            PriceObs {
                price,
                total_return,
                market_cap,
            },
        ));
        report.rows_loaded += 1;
    }
    if report.rows_read == 0 {
        report.warnings.push("empty file".into());
    }
    Ok((out, report))
}

pub fn read_market(source: impl Read) -> Result<(Vec<(MonthStamp, f64)>, FileReport)> {
    let mut report = FileReport::new(MARKET_FILE);
    let mut out = Vec::new();
    let Some(mut rows) = Rows::open(MARKET_FILE, source, &MARKET_HEADER)? else {
        report.warnings.push("empty file".into());
        return Ok((out, report));
    };
    while let Some(row) = rows.next_row() {
        let row = row?;
        report.rows_read += 1;
        let month = row.month(MARKET_FILE, 0)?;
        match row.optional::<f64>(MARKET_FILE, 2, "market_return")? {
            Some(r) => {
                out.push((month, r));
                report.rows_loaded += 1;
            }
            None => report.drop_row(row.line, "missing market_return"),
        }
    }
    Ok((out, report))
}

pub fn read_daily(source: impl Read) -> Result<(Vec<(FirmId, NaiveDate, f64)>, FileReport)> {
    let mut report = FileReport::new(DAILY_FILE);
    let mut out = Vec::new();
    let Some(mut rows) = Rows::open(DAILY_FILE, source, &DAILY_HEADER)? else {
        report.warnings.push("empty file".into());
        return Ok((out, report));
    };
    while let Some(row) = rows.next_row() {
        let row = row?;
        report.rows_read += 1;
        let firm = row.firm(DAILY_FILE)?;
        let Some(date) = row.date(DAILY_FILE, 1, "date")? else {
            return Err(row.malformed(DAILY_FILE, "missing date".into()));
        };
        match row.optional::<f64>(DAILY_FILE, 2, "return")? {
            Some(r) => {
                out.push((firm, date, r));
                report.rows_loaded += 1;
            }
            None => report.drop_row(row.line, "missing return"),
        }
    }
    Ok((out, report))
}

/// Assembles a validated [`PricePanel`] from the three price tables.
pub fn ingest_prices(
    prices: impl Read,
    market: impl Read,
    daily: Option<impl Read>,
) -> Result<(PricePanel, LoadReport)> {
    let mut report = LoadReport::default();
    let (rows, pr) = read_prices(prices)?;
    report.push(pr);
    let (mkt, mr) = read_market(market)?;
    report.push(mr);
    let daily = match daily {
        Some(src) => {
            let (d, dr) = read_daily(src)?;
            report.push(dr);
            Some(d)
        }
        None => None,
    };
    let panel = PricePanel::from_parts(rows, mkt, daily)?;
    Ok((panel, report))
}

/// Reads `fundamentals.csv`. A blank `available_from` defaults to three
/// calendar months after the fiscal year end.
pub fn ingest_fundamentals(source: impl Read) -> Result<(FundamentalStore, FileReport)> {
    let f = FUNDAMENTALS_FILE;
    let mut report = FileReport::new(f);
    let mut records = Vec::new();
    let Some(mut rows) = Rows::open(f, source, &FUNDAMENTALS_HEADER)? else {
        report.warnings.push("empty file".into());
        return Ok((FundamentalStore::default(), report));
    };
    while let Some(row) = rows.next_row() {
        let row = row?;
        report.rows_read += 1;
        let firm = row.firm(f)?;
        let Some(fye) = row.date(f, 1, "fiscal_year_end")? else {
            return Err(row.malformed(f, "missing fiscal_year_end".into()));
        };
        let available_from = row
            .date(f, 2, "available_from")?
            .unwrap_or_else(|| add_calendar_months(fye, DEFAULT_AVAILABILITY_LAG_MONTHS));
        if available_from < fye {
            return Err(row.malformed(
                f,
                format!("available_from {available_from} precedes fiscal_year_end {fye}"),
            ));
        }
        let mut values = [0.0f64; 7];
        let names = FUNDAMENTALS_HEADER[3..10].iter();
        let mut missing = false;
        for (slot, (i, name)) in values.iter_mut().zip((3..10).zip(names)) {
            match row.optional::<f64>(f, i, name)? {
                Some(v) => *slot = v,
                None => missing = true,
            }
        }
        if missing {
            report.drop_row(row.line, "missing accounting item");
            continue;
        }
        let industry: Option<u16> = row.optional(f, 10, "industry2")?;
        let [ocf, total_assets, ebit, net_income, common_equity, book_equity, shares] = values;
        records.push(FundamentalRecord {
            firm,
            fiscal_year_end: fye,
            available_from,
            ocf,
            total_assets,
            ebit,
            net_income,
            common_equity,
            book_equity,
            shares_outstanding_adjusted: shares,
            industry_2digit: industry,
        });
        report.rows_loaded += 1;
    }
    if report.rows_read == 0 {
        report.warnings.push("empty file".into());
    }
    let store = FundamentalStore::from_records(records)?;
    Ok((store, report))
}

pub fn ingest_targets(source: impl Read) -> Result<(TargetStore, FileReport)> {
    let f = TARGETS_FILE;
    let mut report = FileReport::new(f);
    let mut out = Vec::new();
    let Some(mut rows) = Rows::open(f, source, &TARGETS_HEADER)? else {
        report.warnings.push("empty file".into());
        return Ok((TargetStore::default(), report));
    };
    while let Some(row) = rows.next_row() {
        let row = row?;
        report.rows_read += 1;
        let firm = row.firm(f)?;
        let month = row.month(f, 1)?;
        match row.optional::<f64>(f, 3, "consensus_target")? {
            Some(t) if t > 0.0 => {
                out.push((firm, month, t));
                report.rows_loaded += 1;
            }
            Some(t) => return Err(row.malformed(f, format!("target must be positive, got {t}"))),
            None => report.drop_row(row.line, "missing consensus_target"),
        }
    }
    let store = TargetStore::from_records(out)?;
    Ok((store, report))
}

fn open(dir: &Path, name: &str) -> Result<File> {
    let path = dir.join(name);
    File::open(&path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::io(path, e)
        }
    })
}

/// Loads a data directory. `daily.csv` and `targets.csv` are optional.
pub fn load_dir(dir: &Path) -> Result<Dataset> {
    let daily = if dir.join(DAILY_FILE).exists() {
        Some(open(dir, DAILY_FILE)?)
    } else {
        None
    };
    let (prices, mut report) = ingest_prices(open(dir, PRICES_FILE)?, open(dir, MARKET_FILE)?, daily)?;
    let (fundamentals, fr) = ingest_fundamentals(open(dir, FUNDAMENTALS_FILE)?)?;
    report.push(fr);
    let targets = if dir.join(TARGETS_FILE).exists() {
        let (t, tr) = ingest_targets(open(dir, TARGETS_FILE)?)?;
        report.push(tr);
        Some(t)
    } else {
        None
    };
    Ok(Dataset {
        prices,
        fundamentals,
        targets,
        report,
    })
}
