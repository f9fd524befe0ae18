use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::panel::{Dataset, FirmId, MonthStamp, PricePanel};
use crate::signals::{book_to_market, low_vol, rank_normalize, Signal, SignalContext};

/// Forecast and realisation horizon, in months.
pub const HORIZON_MONTHS: i64 = 12;

/// Implied return of a target price: target / price - 1.
pub fn forecast_return(target: f64, price: f64) -> Result<f64> {
    if !(price > 0.0) || !(target > 0.0) {
        return Err(Error::Validation(format!(
            "forecast_return needs positive inputs, got target {target} price {price}"
        )));
    }
    Ok(target / price - 1.0)
}

/// Compounded return over months t+1..=t+12; `None` if any month is missing.
pub fn realized_return_12m(prices: &PricePanel, firm: &FirmId, month: MonthStamp) -> Option<f64> {
    let mut growth = 1.0;
    for ahead in 1..=HORIZON_MONTHS {
        growth *= 1.0 + prices.firm_return(firm, month.add_months(ahead))?;
    }
    Some(growth - 1.0)
}

/// Forecast minus realised return.
pub fn mistake(forecast_return: f64, realized_return: f64) -> f64 {
    forecast_return - realized_return
}

/// One firm-month of the forecast-bias panel.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasObservation {
    pub firm: FirmId,
    pub month: MonthStamp,
    pub forecast_return: f64,
    pub realized_return: f64,
    pub mistake: f64,
    pub quality_rank: f64,
    pub btm_rank: f64,
    pub vol_rank: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BiasPanelOptions {
    pub universe_size: usize,
    /// Drop observations whose mistake lies outside the pooled
    /// [q, 1 - q] quantiles. Must lie in [0, 0.1).
    pub clip_quantile: Option<f64>,
}

impl Default for BiasPanelOptions {
    fn default() -> Self {
        BiasPanelOptions {
            universe_size: crate::signals::DEFAULT_UNIVERSE_SIZE,
            clip_quantile: None,
        }
    }
}

struct Candidate {
    firm: FirmId,
    forecast: f64,
    realized: f64,
    quality: f64,
    btm: f64,
    vol: f64,
}

/// Builds one observation per firm-month with a target, a spot price, a
/// complete 12-month return path, point-in-time quality and both controls.
/// Regressors are rank-normalised per month over the retained firms.
pub fn build_bias_panel(data: &Dataset, quality: &dyn Signal, options: &BiasPanelOptions) -> Result<Vec<BiasObservation>> {
    let targets = data
        .targets
        .as_ref()
        .ok_or_else(|| Error::InsufficientData("no target prices loaded".into()))?;
    if let Some(q) = options.clip_quantile {
        if !(0.0..0.1).contains(&q) {
            return Err(Error::Config(format!("clip quantile {q} outside [0, 0.1)")));
        }
    }
    let ctx = SignalContext::new(&data.prices, &data.fundamentals).with_universe_size(options.universe_size);
    let months: Vec<MonthStamp> = targets.months().into_iter().collect();

    let per_month: Vec<(MonthStamp, Vec<Candidate>)> = months
        .par_iter()
        .map(|&month| {
            let mut out = Vec::new();
            for firm in ctx.universe(month) {
                let Some(target) = targets.get(&firm, month) else { continue };
                let Some(obs) = data.prices.obs(&firm, month) else { continue };
                let Some(realized) = realized_return_12m(&data.prices, &firm, month) else { continue };
                let Some(q) = quality.value(&ctx, &firm, month).filter(|v| v.is_finite()) else { continue };
                let Some(btm) = book_to_market(&data.fundamentals, &data.prices, &firm, month) else { continue };
                let Some(lv) = low_vol(&data.prices, &firm, month) else { continue };
                let Ok(forecast) = forecast_return(target, obs.price) else { continue };
                out.push(Candidate {
                    firm,
                    forecast,
                    realized,
                    quality: q,
                    btm,
                    vol: -lv,
                });
            }
            (month, out)
        })
        .collect();

    let bounds = match options.clip_quantile {
        Some(q) if q > 0.0 => {
            let mut all: Vec<f64> = per_month
                .iter()
                .flat_map(|(_, c)| c.iter().map(|c| mistake(c.forecast, c.realized)))
                .collect();
            if all.is_empty() {
                return Err(Error::EmptyCrossSection);
            }
            all.sort_by(f64::total_cmp);
            Some((quantile_sorted(&all, q), quantile_sorted(&all, 1.0 - q)))
        }
        _ => None,
    };

    let mut panel = Vec::new();
    for (month, mut cands) in per_month {
        if let Some((lo, hi)) = bounds {
            cands.retain(|c| {
                let m = mistake(c.forecast, c.realized);
                m >= lo && m <= hi
            });
        }
        if cands.is_empty() {
            continue;
        }
        let rank_of = |f: fn(&Candidate) -> f64| -> Result<BTreeMap<FirmId, f64>> {
            rank_normalize(&cands.iter().map(|c| (c.firm.clone(), f(c))).collect())
        };
        let q_rank = rank_of(|c| c.quality)?;
        let b_rank = rank_of(|c| c.btm)?;
        let v_rank = rank_of(|c| c.vol)?;
        for c in &cands {
            panel.push(BiasObservation {
                firm: c.firm.clone(),
                month,
                forecast_return: c.forecast,
                realized_return: c.realized,
                mistake: mistake(c.forecast, c.realized),
                quality_rank: q_rank[&c.firm],
                btm_rank: b_rank[&c.firm],
                vol_rank: v_rank[&c.firm],
            });
        }
    }
    if panel.is_empty() {
        return Err(Error::EmptyCrossSection);
    }
    Ok(panel)
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
