//! The nine built-in strategies: the market benchmark plus eight anomalies.

use std::collections::BTreeMap;

use super::registry::{Signal, SignalContext, SignalKind, SignalRegistry};
use crate::moments::sample_sd;
use crate::panel::{FirmId, FundamentalRecord, FundamentalStore, MonthStamp, PricePanel};

/// Minimum daily observations in the three-month low-vol window.
pub const MIN_DAILY_OBS: usize = 40;
/// Months of monthly returns used when no daily table is loaded.
pub const MONTHLY_VOL_WINDOW: i64 = 36;
/// Minimum firms with a lagged market cap for an industry to have leaders.
pub const MIN_INDUSTRY_FIRMS: usize = 5;

pub fn quality_ocf(r: &FundamentalRecord) -> Option<f64> {
    (r.total_assets > 0.0).then(|| r.ocf / r.total_assets)
}

pub fn quality_roa(r: &FundamentalRecord) -> Option<f64> {
    (r.total_assets > 0.0).then(|| r.ebit / r.total_assets)
}

pub fn quality_roe(r: &FundamentalRecord) -> Option<f64> {
    (r.common_equity > 0.0).then(|| r.net_income / r.common_equity)
}

/// Point-in-time book equity over the month's market cap.
pub fn book_to_market(
    fundamentals: &FundamentalStore,
    prices: &PricePanel,
    firm: &FirmId,
    month: MonthStamp,
) -> Option<f64> {
    let record = fundamentals.point_in_time(firm, month)?;
    let cap = prices.obs(firm, month)?.market_cap;
    (cap > 0.0).then(|| record.book_equity / cap)
}

/// Compounded return over months t-12..=t-2; the most recent month is skipped.
pub fn momentum(prices: &PricePanel, firm: &FirmId, month: MonthStamp) -> Option<f64> {
    let mut growth = 1.0;
    for lag in 2..=12 {
        growth *= 1.0 + prices.firm_return(firm, month.add_months(-lag))?;
    }
    Some(growth - 1.0)
}

/// Minus trailing volatility: daily returns over months t-3..=t-1 when a
/// daily table is loaded, otherwise monthly returns over t-36..=t-1.
pub fn low_vol(prices: &PricePanel, firm: &FirmId, month: MonthStamp) -> Option<f64> {
    if prices.has_daily() {
        let from = month.add_months(-3).first_day();
        let to = month.pred().last_day();
        let rets: Vec<f64> = prices.daily_returns(firm, from, to).iter().map(|r| r.1).collect();
        if rets.len() < MIN_DAILY_OBS {
            return None;
        }
        sample_sd(&rets).map(|sd| -sd)
    } else {
        let rets: Option<Vec<f64>> = (1..=MONTHLY_VOL_WINDOW)
            .map(|lag| prices.firm_return(firm, month.add_months(-lag)))
            .collect();
        sample_sd(&rets?).map(|sd| -sd)
    }
}

/// Minus the growth in adjusted shares between the two latest usable years.
pub fn net_repurchase(fundamentals: &FundamentalStore, firm: &FirmId, month: MonthStamp) -> Option<f64> {
    let (cur, prev) = fundamentals.point_in_time_pair(firm, month)?;
    if !(prev.shares_outstanding_adjusted > 0.0) {
        return None;
    }
    Some(-(cur.shares_outstanding_adjusted / prev.shares_outstanding_adjusted - 1.0))
}

/// Equal-weighted month t-1 return of the top market-cap quintile (at t-1)
/// of each 2-digit industry with at least five capitalised firms.
pub fn industry_leader_returns(
    prices: &PricePanel,
    fundamentals: &FundamentalStore,
    month: MonthStamp,
) -> BTreeMap<u16, f64> {
    let prev = month.pred();
    let mut by_industry: BTreeMap<u16, Vec<(&FirmId, f64, f64)>> = BTreeMap::new();
    for firm in prices.firms() {
        let Some(code) = industry_of(fundamentals, firm, month) else {
            continue;
        };
        let Some(obs) = prices.obs(firm, prev) else {
            continue;
        };
        if obs.market_cap > 0.0 {
            by_industry
                .entry(code)
                .or_default()
                .push((firm, obs.market_cap, obs.total_return));
        }
    }
    by_industry
        .into_iter()
        .filter(|(_, members)| members.len() >= MIN_INDUSTRY_FIRMS)
        .map(|(code, mut members)| {
            members.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            let k = (members.len() / 5).max(1);
            let mean = members[..k].iter().map(|m| m.2).sum::<f64>() / k as f64;
            (code, mean)
        })
        .collect()
}

fn industry_of(fundamentals: &FundamentalStore, firm: &FirmId, month: MonthStamp) -> Option<u16> {
    fundamentals.point_in_time(firm, month)?.industry_2digit
}

pub fn industry_leader(
    prices: &PricePanel,
    fundamentals: &FundamentalStore,
    firm: &FirmId,
    month: MonthStamp,
) -> Option<f64> {
    let code = industry_of(fundamentals, firm, month)?;
    industry_leader_returns(prices, fundamentals, month).get(&code).copied()
}

macro_rules! fundamental_ratio {
    ($ty:ident, $name:literal, $desc:literal, $f:path) => {
        pub struct $ty;

        impl Signal for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn description(&self) -> &'static str {
                $desc
            }
            fn value(&self, ctx: &SignalContext<'_>, firm: &FirmId, month: MonthStamp) -> Option<f64> {
                ctx.fundamentals.point_in_time(firm, month).and_then($f)
            }
        }
    };
}

fundamental_ratio!(OcfToAssets, "ocf_at", "operating cash flow / total assets", quality_ocf);
fundamental_ratio!(ReturnOnAssets, "roa", "EBIT / total assets", quality_roa);
fundamental_ratio!(ReturnOnEquity, "roe", "net income / common equity", quality_roe);

pub struct BookToMarket;

impl Signal for BookToMarket {
    fn name(&self) -> &'static str {
        "btm"
    }
    fn description(&self) -> &'static str {
        "book equity / most recent market value"
    }
    fn value(&self, ctx: &SignalContext<'_>, firm: &FirmId, month: MonthStamp) -> Option<f64> {
        book_to_market(ctx.fundamentals, ctx.prices, firm, month)
    }
}

pub struct Momentum;

impl Signal for Momentum {
    fn name(&self) -> &'static str {
        "momentum"
    }
    fn description(&self) -> &'static str {
        "cumulative return t-12 to t-2"
    }
    fn value(&self, ctx: &SignalContext<'_>, firm: &FirmId, month: MonthStamp) -> Option<f64> {
        momentum(ctx.prices, firm, month)
    }
}

pub struct LowVol;

impl Signal for LowVol {
    fn name(&self) -> &'static str {
        "lowvol"
    }
    fn description(&self) -> &'static str {
        "minus trailing three-month daily volatility"
    }
    fn value(&self, ctx: &SignalContext<'_>, firm: &FirmId, month: MonthStamp) -> Option<f64> {
        low_vol(ctx.prices, firm, month)
    }
    fn degradation(&self, ctx: &SignalContext<'_>) -> Option<String> {
        (!ctx.prices.has_daily()).then(|| {
            format!("lowvol: no daily returns loaded, using {MONTHLY_VOL_WINDOW}-month monthly volatility")
        })
    }
}

pub struct NetRepurchase;

impl Signal for NetRepurchase {
    fn name(&self) -> &'static str {
        "netrep"
    }
    fn description(&self) -> &'static str {
        "minus growth in adjusted shares outstanding"
    }
    fn value(&self, ctx: &SignalContext<'_>, firm: &FirmId, month: MonthStamp) -> Option<f64> {
        net_repurchase(ctx.fundamentals, firm, month)
    }
}

pub struct IndustryLeader;

impl Signal for IndustryLeader {
    fn name(&self) -> &'static str {
        "indleader"
    }
    fn description(&self) -> &'static str {
        "last month's return of the industry's largest stocks"
    }
    fn value(&self, ctx: &SignalContext<'_>, firm: &FirmId, month: MonthStamp) -> Option<f64> {
        industry_leader(ctx.prices, ctx.fundamentals, firm, month)
    }
    fn cross_section(
        &self,
        ctx: &SignalContext<'_>,
        firms: &[FirmId],
        month: MonthStamp,
    ) -> BTreeMap<FirmId, f64> {
        let leaders = industry_leader_returns(ctx.prices, ctx.fundamentals, month);
        firms
            .iter()
            .filter_map(|f| {
                let code = industry_of(ctx.fundamentals, f, month)?;
                leaders.get(&code).map(|v| (f.clone(), *v))
            })
            .collect()
    }
}

pub struct Market;

impl Signal for Market {
    fn name(&self) -> &'static str {
        "market"
    }
    fn description(&self) -> &'static str {
        "the market portfolio, held unhedged"
    }
    fn kind(&self) -> SignalKind {
        SignalKind::Benchmark
    }
    fn value(&self, _: &SignalContext<'_>, _: &FirmId, _: MonthStamp) -> Option<f64> {
        None
    }
}

impl SignalRegistry {
    /// Registry holding all built-in strategies.
    pub fn with_builtins() -> Self {
        let mut r = SignalRegistry::new();
        r.register(Market)
            .register(LowVol)
            .register(BookToMarket)
            .register(NetRepurchase)
            .register(Momentum)
            .register(IndustryLeader)
            .register(ReturnOnAssets)
            .register(ReturnOnEquity)
            .register(OcfToAssets);
        r
    }
}
