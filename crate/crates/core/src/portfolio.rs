//! Rank-weighted long-short portfolios hedged with a rolling market beta.
//!
//! Weights formed at the end of month t earn the month t+1 returns. The
//! hedge ratio applied to that position is the beta of the strategy's return
//! per dollar of long exposure on the market over the `window` preceding
//! realised months, so it only uses information available when the position
//! is opened. Returns are reported per dollar of gross value: long plus
//! short market value of the hedged book.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::panel::{FirmId, MonthStamp, PricePanel};
use crate::signals::SignalFrame;

pub const DEFAULT_BETA_WINDOW: usize = 24;

/// Σ w_i r_i over firms present in both maps.
pub fn rank_portfolio_return(weights: &BTreeMap<FirmId, f64>, returns: &BTreeMap<FirmId, f64>) -> Result<f64> {
    let mut overlap = 0usize;
    let mut total = 0.0;
    for (firm, w) in weights {
        if let Some(r) = returns.get(firm) {
            total += w * r;
            overlap += 1;
        }
    }
    if overlap == 0 {
        return Err(Error::EmptyCrossSection);
    }
    Ok(total)
}

/// `out[k]` is the OLS beta of `strategy` on `market` over observations
/// `k-window..k`; `None` during burn-in.
pub fn rolling_beta(strategy: &[f64], market: &[f64], window: usize) -> Result<Vec<Option<f64>>> {
    if strategy.len() != market.len() {
        return Err(Error::Validation("rolling_beta: series lengths differ".into()));
    }
    if window < 2 {
        return Err(Error::Config("beta window must be at least 2".into()));
    }
    let mut out = vec![None; strategy.len()];
    for k in window..strategy.len() {
        let s = &strategy[k - window..k];
        let m = &market[k - window..k];
        let ms = s.iter().sum::<f64>() / window as f64;
        let mm = m.iter().sum::<f64>() / window as f64;
        let (mut cov, mut var) = (0.0, 0.0);
        for (a, b) in s.iter().zip(m) {
            cov += (a - ms) * (b - mm);
            var += (b - mm) * (b - mm);
        }
        if var <= 0.0 || m.iter().all(|x| *x == m[0]) {
            return Err(Error::ZeroVariance("market returns in beta window"));
        }
        out[k] = Some(cov / var);
    }
    Ok(out)
}

/// One realised month of an unhedged rank portfolio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    /// Month the returns were earned (formation month + 1).
    pub month: MonthStamp,
    pub raw_ls_return: f64,
    /// Σ of positive weights.
    pub long_exposure: f64,
    /// Σ |w|.
    pub gross_weight: f64,
    pub market_return: f64,
}

impl Leg {
    pub fn unit_return(&self) -> f64 {
        self.raw_ls_return / self.long_exposure
    }
}

/// Realised legs for every frame whose following month has a market return.
/// Firms lacking a next-month return drop out of the sum; exposures use the
/// full formation-time weights.
pub fn portfolio_legs(frames: &[SignalFrame], prices: &PricePanel) -> Result<Vec<Leg>> {
    let mut legs = Vec::with_capacity(frames.len());
    for frame in frames {
        let next = frame.month.succ();
        let Some(market_return) = prices.market_return(next) else {
            continue;
        };
        let long_exposure: f64 = frame.ranks.values().filter(|w| **w > 0.0).sum();
        if long_exposure <= 0.0 {
            continue;
        }
        let gross_weight: f64 = frame.ranks.values().map(|w| w.abs()).sum();
        let returns: BTreeMap<FirmId, f64> = frame
            .ranks
            .keys()
            .filter_map(|f| prices.firm_return(f, next).map(|r| (f.clone(), r)))
            .collect();
        let raw_ls_return = match rank_portfolio_return(&frame.ranks, &returns) {
            Ok(r) => r,
            Err(Error::EmptyCrossSection) => continue,
            Err(e) => return Err(e),
        };
        legs.push(Leg {
            month: next,
            raw_ls_return,
            long_exposure,
            gross_weight,
            market_return,
        });
    }
    Ok(legs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyMonth {
    pub month: MonthStamp,
    pub raw_ls_return: f64,
    pub beta: Option<f64>,
    pub hedged_return: Option<f64>,
    pub gross_value: Option<f64>,
    pub cum_pnl: Option<f64>,
}

/// Monthly record of one hedged strategy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrategyResult {
    pub rows: Vec<StrategyMonth>,
}

impl StrategyResult {
    pub fn months(&self) -> Vec<MonthStamp> {
        self.rows.iter().map(|r| r.month).collect()
    }

    /// Post burn-in (month, hedged return) pairs.
    pub fn hedged(&self) -> Vec<(MonthStamp, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.hedged_return.map(|h| (r.month, h)))
            .collect()
    }

    pub fn hedged_returns(&self) -> Vec<f64> {
        self.hedged().into_iter().map(|(_, h)| h).collect()
    }
}

/// Applies per-leg hedge ratios. Legs with `None` beta are burn-in.
pub fn apply_hedge(legs: &[Leg], betas: &[Option<f64>]) -> StrategyResult {
    let mut cum = 0.0;
    let rows = legs
        .iter()
        .zip(betas)
        .map(|(leg, beta)| {
            let (hedged, gross) = match beta {
                Some(b) => {
                    let hedge = b * leg.long_exposure;
                    let profit = leg.raw_ls_return - hedge * leg.market_return;
                    // a negative beta puts the hedge long the market; either
                    // way it adds its absolute size to gross value
                    let gross = leg.gross_weight + hedge.abs();
                    (Some(profit / gross), Some(gross))
                }
                None => (None, None),
            };
            let cum_pnl = hedged.map(|h| {
                cum += h;
                cum
            });
            StrategyMonth {
                month: leg.month,
                raw_ls_return: leg.raw_ls_return,
                beta: *beta,
                hedged_return: hedged,
                gross_value: gross,
                cum_pnl,
            }
        })
        .collect();
    StrategyResult { rows }
}

/// Hedged market-neutral strategy from point-in-time signal frames.
pub fn hedged_strategy(frames: &[SignalFrame], prices: &PricePanel, window: usize) -> Result<StrategyResult> {
    let legs = portfolio_legs(frames, prices)?;
    let unit: Vec<f64> = legs.iter().map(Leg::unit_return).collect();
    let market: Vec<f64> = legs.iter().map(|l| l.market_return).collect();
    let betas = rolling_beta(&unit, &market, window)?;
    Ok(apply_hedge(&legs, &betas))
}

/// The market held outright, reported from month `window + 1` so it shares
/// the hedged strategies' burn-in.
pub fn benchmark_strategy(prices: &PricePanel, window: usize) -> StrategyResult {
    let mut cum = 0.0;
    let rows = prices
        .market_series()
        .iter()
        .enumerate()
        .map(|(k, (month, r))| {
            let live = k > window;
            let cum_pnl = live.then(|| {
                cum += r;
                cum
            });
            StrategyMonth {
                month: *month,
                raw_ls_return: *r,
                beta: live.then_some(0.0),
                hedged_return: live.then_some(*r),
                gross_value: live.then_some(1.0),
                cum_pnl,
            }
        })
        .collect();
    StrategyResult { rows }
}

pub const STRATEGY_HEADER: [&str; 8] = [
    "signal",
    "year",
    "month",
    "raw_ls_return",
    "beta",
    "hedged_return",
    "gross_value",
    "cum_pnl",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `strategy_returns.csv`; burn-in months leave hedge columns blank.
pub fn write_strategy_returns<W: Write>(results: &[(&str, &StrategyResult)], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| Error::Validation(format!("csv write failed: {e}"));
    w.write_record(STRATEGY_HEADER).map_err(err)?;
    for (name, result) in results {
        for r in &result.rows {
            w.write_record([
                name.to_string(),
                r.month.year().to_string(),
                r.month.month().to_string(),
                r.raw_ls_return.to_string(),
                opt(r.beta),
                opt(r.hedged_return),
                opt(r.gross_value),
                opt(r.cum_pnl),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}
