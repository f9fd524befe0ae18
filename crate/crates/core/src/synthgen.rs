//! Seeded synthetic firm panels with known ground truth.
//!
//! Monthly firm returns follow
//!
//! ```text
//! r[i,t+1] = beta_i * r_mkt[t+1] + quality_premium * rank(q[i,t]) + idio_vol * e[i,t+1]
//! ```
//!
//! where `rank(q[i,t])` is the cross-sectional rank of point-in-time
//! operating cash flow over assets, the same quantity the `ocf_at` strategy
//! trades. Analysts publish consensus targets implying
//!
//! ```text
//! FR[i,t] = optimism + analyst_quality_loading * rank(q[i,t]) + 12 * beta_i * E[r_mkt] + u_i + noise
//! ```
//!
//! with `u_i` a persistent firm-level error of SD `cluster_error_sd`.
//!
//! Every firm draws from its own ChaCha8 stream (stream id = firm index + 1),
//! the market from stream 0, so a firm's shocks do not depend on how many
//! other firms are generated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::panel::{
    add_calendar_months, Dataset, FirmId, FundamentalRecord, FundamentalStore, MonthStamp, PriceObs,
    PricePanel, TargetStore,
};
use crate::signals::{quality_ocf, rank_normalize};

const MARKET_STREAM: u64 = 0;
const DAILY_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_firms: usize,
    pub n_months: usize,
    pub seed: u64,
    /// Monthly return per unit of quality rank.
    pub quality_premium: f64,
    /// Forecast 12-month return per unit of quality rank.
    pub analyst_quality_loading: f64,
    /// Mean forecast bias.
    pub optimism: f64,
    pub market_mean: f64,
    pub market_vol: f64,
    pub idio_vol: f64,
    pub firm_beta_range: (f64, f64),
    /// SD of the persistent firm-level forecast error.
    pub cluster_error_sd: f64,
    /// SD of the month-by-month forecast error.
    pub analyst_noise_sd: f64,
    /// Year-on-year autocorrelation of latent quality.
    pub quality_persistence: f64,
    pub n_industries: u16,
    pub start: MonthStamp,
    /// Years of accounts generated before the first return month.
    pub history_years: i32,
    pub daily_returns: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_firms: 500,
            n_months: 240,
            seed: 1,
            quality_premium: 0.004,
            analyst_quality_loading: 0.0,
            optimism: 0.08,
            market_mean: 0.007,
            market_vol: 0.045,
            idio_vol: 0.08,
            firm_beta_range: (0.5, 1.5),
            cluster_error_sd: 0.05,
            analyst_noise_sd: 0.10,
            quality_persistence: 0.9,
            n_industries: 12,
            start: MonthStamp::new(1990, 1).expect("valid"),
            history_years: 3,
            daily_returns: false,
        }
    }
}

/// Σ w² for n evenly spaced ranks on [-0.5, 0.5]: n(n+1) / (12(n-1)).
pub fn rank_weight_sum_of_squares(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n = n as f64;
    n * (n + 1.0) / (12.0 * (n - 1.0))
}

/// Premium giving the rank-weighted quality strategy an annualised Sharpe
/// ratio of `sharpe` when `n_ranked` firms are traded: the premium earns
/// p Σw² against idiosyncratic risk idio_vol sqrt(Σw²), hedged back to zero
/// market exposure.
pub fn premium_for_sharpe(sharpe: f64, n_ranked: usize, idio_vol: f64) -> f64 {
    sharpe / 12f64.sqrt() * idio_vol / rank_weight_sum_of_squares(n_ranked).sqrt()
}

/// Inverse of [`premium_for_sharpe`].
pub fn theoretical_sharpe(premium: f64, n_ranked: usize, idio_vol: f64) -> f64 {
    premium * rank_weight_sum_of_squares(n_ranked).sqrt() / idio_vol * 12f64.sqrt()
}

impl GeneratorConfig {
    /// Sets `quality_premium` from the closed form for a target Sharpe ratio.
    pub fn with_target_sharpe(mut self, sharpe: f64) -> Self {
        self.quality_premium = premium_for_sharpe(sharpe, self.n_firms, self.idio_vol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_firms < 2 {
            return bad(format!("n_firms must be at least 2, got {}", self.n_firms));
        }
        if self.n_months < 48 {
            return bad(format!("n_months must be at least 48, got {}", self.n_months));
        }
        for (name, v) in [
            ("market_vol", self.market_vol),
            ("idio_vol", self.idio_vol),
            ("cluster_error_sd", self.cluster_error_sd),
            ("analyst_noise_sd", self.analyst_noise_sd),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        let (lo, hi) = self.firm_beta_range;
        if !(lo <= hi) {
            return bad(format!("firm_beta_range lower bound {lo} exceeds upper {hi}"));
        }
        if !(-1.0..1.0).contains(&self.quality_persistence) {
            return bad("quality_persistence must lie in (-1, 1)".into());
        }
        if self.n_industries == 0 {
            return bad("n_industries must be positive".into());
        }
        if self.history_years < 2 {
            return bad("history_years must be at least 2".into());
        }
        Ok(())
    }

    pub fn last_month(&self) -> MonthStamp {
        self.start.add_months(self.n_months as i64 - 1)
    }

    /// Parses a flat `key = value` file; `#` starts a comment. Keys not
    /// present keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = GeneratorConfig::default();
        let mut target_sharpe = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            // applied last so it sees the final firm count and volatility
            if key == "target_sharpe" {
                let s: f64 = value
                    .parse()
                    .map_err(|_| Error::Config(format!("line {}: bad value `{value}` for {key}", lineno + 1)))?;
                target_sharpe = Some(s);
                continue;
            }
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        if let Some(s) = target_sharpe {
            cfg = cfg.with_target_sharpe(s);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn parse<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value `{v}` for {key}"))
        }
        match key {
            "n_firms" => self.n_firms = parse(key, value)?,
            "n_months" => self.n_months = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "quality_premium" => self.quality_premium = parse(key, value)?,
            "analyst_quality_loading" => self.analyst_quality_loading = parse(key, value)?,
            "optimism" => self.optimism = parse(key, value)?,
            "market_mean" => self.market_mean = parse(key, value)?,
            "market_vol" => self.market_vol = parse(key, value)?,
            "idio_vol" => self.idio_vol = parse(key, value)?,
            "firm_beta_range" => {
                let (lo, hi) = value
                    .split_once(',')
                    .ok_or_else(|| format!("firm_beta_range expects `lo,hi`, got `{value}`"))?;
                self.firm_beta_range = (parse(key, lo.trim())?, parse(key, hi.trim())?);
            }
            "cluster_error_sd" => self.cluster_error_sd = parse(key, value)?,
            "analyst_noise_sd" => self.analyst_noise_sd = parse(key, value)?,
            "quality_persistence" => self.quality_persistence = parse(key, value)?,
            "n_industries" => self.n_industries = parse(key, value)?,
            "start" => self.start = value.parse().map_err(|e: Error| e.to_string())?,
            "history_years" => self.history_years = parse(key, value)?,
            "daily_returns" => self.daily_returns = parse(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Renders the configuration in the key = value format.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_firms = {}", self.n_firms);
        let _ = writeln!(s, "n_months = {}", self.n_months);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "quality_premium = {}", self.quality_premium);
        let _ = writeln!(s, "analyst_quality_loading = {}", self.analyst_quality_loading);
        let _ = writeln!(s, "optimism = {}", self.optimism);
        let _ = writeln!(s, "market_mean = {}", self.market_mean);
        let _ = writeln!(s, "market_vol = {}", self.market_vol);
        let _ = writeln!(s, "idio_vol = {}", self.idio_vol);
        let _ = writeln!(s, "firm_beta_range = {},{}", self.firm_beta_range.0, self.firm_beta_range.1);
        let _ = writeln!(s, "cluster_error_sd = {}", self.cluster_error_sd);
        let _ = writeln!(s, "analyst_noise_sd = {}", self.analyst_noise_sd);
        let _ = writeln!(s, "quality_persistence = {}", self.quality_persistence);
        let _ = writeln!(s, "n_industries = {}", self.n_industries);
        let _ = writeln!(s, "start = {}", self.start);
        let _ = writeln!(s, "history_years = {}", self.history_years);
        let _ = writeln!(s, "daily_returns = {}", self.daily_returns);
        s
    }
}

/// Parameters and conditional expectations the generator knows exactly.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    pub firm_beta: BTreeMap<FirmId, f64>,
    /// Generator quality rank at each month end over all firms with accounts.
    pub quality_rank: BTreeMap<MonthStamp, BTreeMap<FirmId, f64>>,
    /// E[12-month realised return | generator state] per (firm, month).
    pub rational_expectation: BTreeMap<(FirmId, MonthStamp), f64>,
    /// Systematic forecast bias FR - ER, excluding mean-zero analyst noise.
    pub bias: BTreeMap<(FirmId, MonthStamp), f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub config: GeneratorConfig,
    pub data: Dataset,
    pub truth: GroundTruth,
}

struct FirmDraws {
    id: FirmId,
    beta: f64,
    records: Vec<FundamentalRecord>,
    initial_price: f64,
    return_shocks: Vec<f64>,
    analyst_firm_error: f64,
    analyst_shocks: Vec<f64>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn firm_id(index: usize) -> FirmId {
    FirmId::new(format!("F{index:05}"))
}

fn month_end(year: i32, month: u32) -> NaiveDate {
    MonthStamp::new(year, month).expect("valid").last_day()
}

fn draw_firm(cfg: &GeneratorConfig, index: usize) -> FirmDraws {
    let mut rng = stream(cfg.seed, index as u64 + 1);
    let id = firm_id(index);
    let (lo, hi) = cfg.firm_beta_range;
    let beta = lo + (hi - lo) * rng.random::<f64>();
    let industry = 10 + rng.random_range(0..cfg.n_industries);
    let fye_month = [3u32, 6, 9, 12][rng.random_range(0..4)];
    let publication_lag = rng.random_range(1..=3u32);

    let first_year = cfg.start.year() - cfg.history_years;
    let last_year = cfg.last_month().year();
    let rho = cfg.quality_persistence;
    let innov = (1.0 - rho * rho).sqrt();
    let mut q = normal(&mut rng);
    let mut assets = (6.5 + 0.8 * normal(&mut rng)).exp();
    let mut shares = (3.0 + 0.5 * normal(&mut rng)).exp();
    let mut records = Vec::new();
    for year in first_year..=last_year {
        if year > first_year {
            q = rho * q + innov * normal(&mut rng);
            assets *= (0.05 + 0.10 * normal(&mut rng)).exp();
            shares *= (0.01 + 0.05 * normal(&mut rng)).exp();
        }
        let roa = 0.07 + 0.04 * q + 0.02 * normal(&mut rng);
        let equity_share = 0.35 + 0.10 * rng.random::<f64>();
        let roe = roa / equity_share + 0.02 * normal(&mut rng);
        let book_equity = assets * equity_share;
        let fye = month_end(year, fye_month);
        records.push(FundamentalRecord {
            firm: id.clone(),
            fiscal_year_end: fye,
            available_from: add_calendar_months(fye, publication_lag),
            ocf: (0.06 + 0.05 * q) * assets,
            total_assets: assets,
            ebit: roa * assets,
            net_income: roe * book_equity,
            common_equity: book_equity,
            book_equity,
            shares_outstanding_adjusted: shares,
            industry_2digit: Some(industry),
        });
    }
    let last_day = cfg.last_month().last_day();
    records.retain(|r| r.fiscal_year_end <= last_day);

    let initial_price = (3.0 + 0.5 * normal(&mut rng)).exp();
    let return_shocks = (0..cfg.n_months).map(|_| normal(&mut rng)).collect();
    let analyst_firm_error = cfg.cluster_error_sd * normal(&mut rng);
    let analyst_shocks = (0..cfg.n_months).map(|_| normal(&mut rng)).collect();
    FirmDraws {
        id,
        beta,
        records,
        initial_price,
        return_shocks,
        analyst_firm_error,
        analyst_shocks,
    }
}

fn weekdays(month: MonthStamp) -> Vec<NaiveDate> {
    month
        .first_day()
        .iter_days()
        .take_while(|d| d.month() == month.month())
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

/// Generates a full dataset and its ground truth; deterministic in the seed.
pub fn generate(cfg: &GeneratorConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let months: Vec<MonthStamp> = (0..cfg.n_months).map(|k| cfg.start.add_months(k as i64)).collect();

    let mut mrng = stream(cfg.seed, MARKET_STREAM);
    let market: Vec<f64> = months
        .iter()
        .map(|_| cfg.market_mean + cfg.market_vol * normal(&mut mrng))
        .collect();

    let firms: Vec<FirmDraws> = (0..cfg.n_firms).into_par_iter().map(|i| draw_firm(cfg, i)).collect();
    let fundamentals = FundamentalStore::from_records(firms.iter().flat_map(|f| f.records.iter().cloned()))?;

    // generator ranks at every formation month, including the one before the first return
    let rank_months: Vec<MonthStamp> = std::iter::once(cfg.start.pred()).chain(months.iter().copied()).collect();
    let ranks: BTreeMap<MonthStamp, BTreeMap<FirmId, f64>> = rank_months
        .par_iter()
        .map(|&m| {
            let values: BTreeMap<FirmId, f64> = firms
                .iter()
                .filter_map(|f| {
                    fundamentals
                        .point_in_time(&f.id, m)
                        .and_then(quality_ocf)
                        .map(|v| (f.id.clone(), v))
                })
                .collect();
            (m, rank_normalize(&values).unwrap_or_default())
        })
        .collect();
    let rank_of = |f: &FirmId, m: MonthStamp| ranks.get(&m).and_then(|r| r.get(f)).copied();

    let mut observations = Vec::with_capacity(cfg.n_firms * cfg.n_months);
    let mut targets = Vec::with_capacity(cfg.n_firms * cfg.n_months);
    let mut truth = GroundTruth {
        quality_rank: ranks.clone(),
        ..Default::default()
    };
    let mut daily_rows = cfg.daily_returns.then(Vec::new);
    let expected_market_12m = 12.0 * cfg.market_mean;

    for f in &firms {
        truth.firm_beta.insert(f.id.clone(), f.beta);
        let current_shares = |m: MonthStamp| {
            let cutoff = m.last_day();
            f.records
                .iter()
                .rev()
                .find(|r| r.fiscal_year_end <= cutoff)
                .or(f.records.first())
                .map(|r| r.shares_outstanding_adjusted)
                .unwrap_or(1.0)
        };
        let mut price = f.initial_price;
        let mut daily_rng = cfg.daily_returns.then(|| stream(cfg.seed, DAILY_STREAM_OFFSET + f.id_index()));
        let expected_monthly: Vec<f64> = months
            .iter()
            .map(|m| f.beta * cfg.market_mean + cfg.quality_premium * rank_of(&f.id, m.pred()).unwrap_or(0.0))
            .collect();
        for (k, &m) in months.iter().enumerate() {
            let premium = cfg.quality_premium * rank_of(&f.id, m.pred()).unwrap_or(0.0);
            let r = (f.beta * market[k] + premium + cfg.idio_vol * f.return_shocks[k]).max(-0.99);
            price *= 1.0 + r;
            observations.push((
                f.id.clone(),
                m,
                PriceObs {
                    price,
                    total_return: r,
                    market_cap: price * current_shares(m),
                },
            ));
            if let (Some(rows), Some(rng)) = (daily_rows.as_mut(), daily_rng.as_mut()) {
                let days = weekdays(m);
                let nd = days.len() as f64;
                for d in days {
                    let dr = r / nd + cfg.idio_vol / nd.sqrt() * normal(rng);
                    rows.push((f.id.clone(), d, dr));
                }
            }

            let q_rank = rank_of(&f.id, m).unwrap_or(0.0);
            let systematic = cfg.optimism + cfg.analyst_quality_loading * q_rank + f.beta * expected_market_12m;
            let fr = (systematic + f.analyst_firm_error + cfg.analyst_noise_sd * f.analyst_shocks[k]).max(-0.9);
            targets.push((f.id.clone(), m, price * (1.0 + fr)));

            if k + 12 < months.len() {
                let er = expected_monthly[k + 1..=k + 12].iter().fold(1.0, |acc, e| acc * (1.0 + e)) - 1.0;
                truth.rational_expectation.insert((f.id.clone(), m), er);
                truth.bias.insert((f.id.clone(), m), systematic - er);
            }
        }
    }

    let prices = PricePanel::from_parts(observations, months.iter().copied().zip(market), daily_rows)?;
    let targets = TargetStore::from_records(targets)?;
    Ok(SyntheticDataset {
        config: cfg.clone(),
        data: Dataset {
            prices,
            fundamentals,
            targets: Some(targets),
            report: Default::default(),
        },
        truth,
    })
}

impl FirmDraws {
    fn id_index(&self) -> u64 {
        self.id.as_str()[1..].parse().expect("generated id")
    }
}
