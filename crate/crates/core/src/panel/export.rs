use std::fs;
use std::io::Write;
use std::path::Path;

use super::ingest::{
    DAILY_FILE, DAILY_HEADER, FUNDAMENTALS_FILE, FUNDAMENTALS_HEADER, MARKET_FILE, MARKET_HEADER,
    PRICES_FILE, PRICES_HEADER, TARGETS_FILE, TARGETS_HEADER,
};
use super::store::{Dataset, FundamentalStore, PricePanel, TargetStore};
use crate::error::{Error, Result};

fn writer<W: Write>(sink: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().from_writer(sink);
    w.write_record(header).map_err(csv_err)?;
    Ok(w)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("csv write failed: {e}"))
}

pub fn write_prices<W: Write>(panel: &PricePanel, sink: W) -> Result<()> {
    let mut w = writer(sink, &PRICES_HEADER)?;
    for firm in panel.firms() {
        for (m, o) in panel.firm_series(firm).into_iter().flatten() {
            w.write_record([
                firm.as_str(),
                &m.year().to_string(),
                &m.month().to_string(),
                &o.price.to_string(),
                &o.total_return.to_string(),
                &o.market_cap.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

pub fn write_market<W: Write>(panel: &PricePanel, sink: W) -> Result<()> {
    let mut w = writer(sink, &MARKET_HEADER)?;
    for (m, r) in panel.market_series() {
        w.write_record([m.year().to_string(), m.month().to_string(), r.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

pub fn write_daily<W: Write>(panel: &PricePanel, sink: W) -> Result<()> {
    let mut w = writer(sink, &DAILY_HEADER)?;
    for (firm, rows) in panel.daily().into_iter().flatten() {
        for (d, r) in rows {
            w.write_record([firm.as_str(), &d.format("%Y-%m-%d").to_string(), &r.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

pub fn write_fundamentals<W: Write>(store: &FundamentalStore, sink: W) -> Result<()> {
    let mut w = writer(sink, &FUNDAMENTALS_HEADER)?;
    for r in store.records() {
        w.write_record([
            r.firm.as_str(),
            &r.fiscal_year_end.format("%Y-%m-%d").to_string(),
            &r.available_from.format("%Y-%m-%d").to_string(),
            &r.ocf.to_string(),
            &r.total_assets.to_string(),
            &r.ebit.to_string(),
            &r.net_income.to_string(),
            &r.common_equity.to_string(),
            &r.book_equity.to_string(),
            &r.shares_outstanding_adjusted.to_string(),
            &r.industry_2digit.map(|c| c.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

pub fn write_targets<W: Write>(store: &TargetStore, sink: W) -> Result<()> {
    let mut w = writer(sink, &TARGETS_HEADER)?;
    for (firm, m, t) in store.iter() {
        w.write_record([
            firm.as_str(),
            &m.year().to_string(),
            &m.month().to_string(),
            &t.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

/// Writes the dataset in the ingestion schemas. Creates `dir` on demand and
/// refuses to replace existing tables unless `force` is set.
pub fn export_dir(data: &Dataset, dir: &Path, force: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let names = [PRICES_FILE, MARKET_FILE, DAILY_FILE, FUNDAMENTALS_FILE, TARGETS_FILE];
    if !force && names.iter().any(|n| dir.join(n).exists()) {
        return Err(Error::WouldOverwrite(dir.to_path_buf()));
    }
    let create = |name: &str| {
        let path = dir.join(name);
        fs::File::create(&path)
            .map(std::io::BufWriter::new)
            .map_err(|e| Error::io(path, e))
    };
    write_prices(&data.prices, create(PRICES_FILE)?)?;
    write_market(&data.prices, create(MARKET_FILE)?)?;
    if data.prices.has_daily() {
        write_daily(&data.prices, create(DAILY_FILE)?)?;
    } else if force && dir.join(DAILY_FILE).exists() {
        fs::remove_file(dir.join(DAILY_FILE)).map_err(|e| Error::io(dir.join(DAILY_FILE), e))?;
    }
    write_fundamentals(&data.fundamentals, create(FUNDAMENTALS_FILE)?)?;
    if let Some(t) = &data.targets {
        write_targets(t, create(TARGETS_FILE)?)?;
    }
    Ok(())
}
