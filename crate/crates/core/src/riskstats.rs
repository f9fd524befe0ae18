//! Risk-profile statistics for monthly strategy returns.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::moments::{fit_line, mean, median, sample_sd};
use crate::panel::FirmId;
use crate::signals::SignalFrame;

pub const MONTHS_PER_YEAR: f64 = 12.0;
pub const MIN_REPORT_MONTHS: usize = 12;
pub const MIN_DOWNSIDE_MONTHS: usize = 6;

fn sd_nonzero(returns: &[f64]) -> Result<f64> {
    match sample_sd(returns) {
        Some(sd) if sd > 0.0 => Ok(sd),
        Some(_) => Err(Error::ZeroVariance("returns")),
        None => Err(Error::InsufficientData(format!("{} observations", returns.len()))),
    }
}

/// Annualised Sharpe ratio, zero risk-free rate.
pub fn sharpe(returns: &[f64]) -> Result<f64> {
    if returns.len() < MIN_REPORT_MONTHS {
        return Err(Error::InsufficientData(format!(
            "sharpe needs {MIN_REPORT_MONTHS} months, got {}",
            returns.len()
        )));
    }
    let sd = sd_nonzero(returns)?;
    Ok(mean(returns) / sd * MONTHS_PER_YEAR.sqrt())
}

pub fn tstat_of_mean(returns: &[f64]) -> Result<f64> {
    let sd = sd_nonzero(returns)?;
    Ok(mean(returns) / (sd / (returns.len() as f64).sqrt()))
}

/// OLS slope of `returns` on `market`.
pub fn beta_full(returns: &[f64], market: &[f64]) -> Result<f64> {
    if returns.len() != market.len() {
        return Err(Error::Validation("beta: series lengths differ".into()));
    }
    fit_line(market, returns)
        .map(|f| f.slope)
        .ok_or(Error::ZeroVariance("market returns"))
}

/// Beta estimated only on months with a negative market return.
pub fn downside_beta(returns: &[f64], market: &[f64]) -> Result<f64> {
    if returns.len() != market.len() {
        return Err(Error::Validation("beta: series lengths differ".into()));
    }
    let (m, r): (Vec<f64>, Vec<f64>) = market
        .iter()
        .zip(returns)
        .filter(|(m, _)| **m < 0.0)
        .map(|(m, r)| (*m, *r))
        .unzip();
    if m.len() < MIN_DOWNSIDE_MONTHS {
        return Err(Error::InsufficientData(format!(
            "downside beta needs {MIN_DOWNSIDE_MONTHS} negative market months, got {}",
            m.len()
        )));
    }
    beta_full(&r, &m)
}

/// (mean - median) / sd.
pub fn skew_proxy(returns: &[f64]) -> Result<f64> {
    let sd = sd_nonzero(returns)?;
    let med = median(returns).expect("non-empty");
    Ok((mean(returns) - med) / sd)
}

/// Fraction of months below the sample mean minus two sample SDs.
pub fn tail_prob(returns: &[f64]) -> Result<f64> {
    let sd = sd_nonzero(returns)?;
    let threshold = mean(returns) - 2.0 * sd;
    let hits = returns.iter().filter(|r| **r < threshold).count();
    Ok(hits as f64 / returns.len() as f64)
}

/// Pooled slope b of s_{i,t} = a + b s_{i,t-1} over consecutive-month frames,
/// using the frames' ranks.
pub fn persistence(frames: &[SignalFrame]) -> Result<f64> {
    let (lagged, current) = lagged_pairs(frames);
    if frames.len() < 2 || lagged.is_empty() {
        return Err(Error::InsufficientData("persistence needs two consecutive months".into()));
    }
    fit_line(&lagged, &current)
        .map(|f| f.slope)
        .ok_or(Error::ZeroVariance("lagged signal"))
}

pub(crate) fn lagged_pairs(frames: &[SignalFrame]) -> (Vec<f64>, Vec<f64>) {
    let by_month: BTreeMap<_, &BTreeMap<FirmId, f64>> = frames.iter().map(|f| (f.month, &f.ranks)).collect();
    let mut lagged = Vec::new();
    let mut current = Vec::new();
    for (month, ranks) in &by_month {
        let Some(prev) = by_month.get(&month.pred()) else {
            continue;
        };
        for (firm, s) in ranks.iter() {
            if let Some(p) = prev.get(firm) {
                lagged.push(*p);
                current.push(*s);
            }
        }
    }
    (lagged, current)
}

/// One row of the risk-profile table.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub sharpe_annualized: f64,
    pub beta: f64,
    pub downside_beta: Option<f64>,
    pub skew_proxy: f64,
    pub tail_prob: f64,
    pub persistence_b: Option<f64>,
    pub n_months: usize,
}

/// Builds the report for aligned strategy and market returns. Signal
/// persistence is reported when frames are supplied.
pub fn risk_report(returns: &[f64], market: &[f64], frames: Option<&[SignalFrame]>) -> Result<RiskReport> {
    if returns.len() < MIN_REPORT_MONTHS {
        return Err(Error::InsufficientData(format!(
            "risk report needs {MIN_REPORT_MONTHS} months, got {}",
            returns.len()
        )));
    }
    let downside = match downside_beta(returns, market) {
        Ok(b) => Some(b),
        Err(Error::InsufficientData(_)) | Err(Error::ZeroVariance(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(RiskReport {
        sharpe_annualized: sharpe(returns)?,
        beta: beta_full(returns, market)?,
        downside_beta: downside,
        skew_proxy: skew_proxy(returns)?,
        tail_prob: tail_prob(returns)?,
        persistence_b: frames.map(persistence).transpose()?,
        n_months: returns.len(),
    })
}

pub const STATS_HEADER: [&str; 8] = [
    "signal",
    "sharpe",
    "beta",
    "downside_beta",
    "skew_proxy",
    "tail_prob",
    "persistence",
    "n_months",
];

pub fn write_stats_report<W: Write>(rows: &[(&str, &RiskReport)], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| Error::Validation(format!("csv write failed: {e}"));
    w.write_record(STATS_HEADER).map_err(err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (name, r) in rows {
        w.write_record([
            name.to_string(),
            r.sharpe_annualized.to_string(),
            r.beta.to_string(),
            opt(r.downside_beta),
            r.skew_proxy.to_string(),
            r.tail_prob.to_string(),
            opt(r.persistence_b),
            r.n_months.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}
