use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use super::ids::{add_calendar_months, FirmId, MonthStamp};
use super::report::LoadReport;
use crate::error::{Error, Result};

/// Minimum age of a fiscal year end before its accounts may be used.
pub const PUBLICATION_LAG_MONTHS: u32 = 6;

/// Default gap between fiscal year end and publication when the source omits it.
pub const DEFAULT_AVAILABILITY_LAG_MONTHS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceObs {
    pub price: f64,
    pub total_return: f64,
    pub market_cap: f64,
}

/// Firm x month prices, returns and capitalisations plus the market series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PricePanel {
    firms: BTreeMap<FirmId, BTreeMap<MonthStamp, PriceObs>>,
    market: BTreeMap<MonthStamp, f64>,
    daily: Option<BTreeMap<FirmId, Vec<(NaiveDate, f64)>>>,
}

impl PricePanel {
    /// Assembles a panel, enforcing key uniqueness and market coverage.
    pub fn from_parts(
        observations: impl IntoIterator<Item = (FirmId, MonthStamp, PriceObs)>,
        market: impl IntoIterator<Item = (MonthStamp, f64)>,
        daily: Option<Vec<(FirmId, NaiveDate, f64)>>,
    ) -> Result<Self> {
        let mut firms: BTreeMap<FirmId, BTreeMap<MonthStamp, PriceObs>> = BTreeMap::new();
        for (firm, month, obs) in observations {
            if !(obs.price > 0.0) {
                return Err(Error::Validation(format!(
                    "non-positive price for ({firm}, {month})"
                )));
            }
            let series = firms.entry(firm.clone()).or_default();
            if series.insert(month, obs).is_some() {
                return Err(Error::DuplicateKey {
                    file: "prices.csv".into(),
                    key: format!("({firm}, {month})"),
                });
            }
        }
        let mut mkt = BTreeMap::new();
        for (month, r) in market {
            if mkt.insert(month, r).is_some() {
                return Err(Error::DuplicateKey {
                    file: "market.csv".into(),
                    key: month.to_string(),
                });
            }
        }
        for series in firms.values() {
            for month in series.keys() {
                if !mkt.contains_key(month) {
                    return Err(Error::MissingMarketMonth(month.to_string()));
                }
            }
        }
        let daily = match daily {
            None => None,
            Some(rows) => {
                let mut map: BTreeMap<FirmId, Vec<(NaiveDate, f64)>> = BTreeMap::new();
                for (firm, date, r) in rows {
                    map.entry(firm).or_default().push((date, r));
                }
                for (firm, rows) in map.iter_mut() {
                    rows.sort_by_key(|(d, _)| *d);
                    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
                        return Err(Error::DuplicateKey {
                            file: "daily.csv".into(),
                            key: format!("({firm}, {})", w[0].0),
                        });
                    }
                }
                Some(map)
            }
        };
        Ok(PricePanel {
            firms,
            market: mkt,
            daily,
        })
    }

    pub fn firms(&self) -> impl Iterator<Item = &FirmId> {
        self.firms.keys()
    }

    pub fn n_firms(&self) -> usize {
        self.firms.len()
    }

    pub fn n_observations(&self) -> usize {
        self.firms.values().map(BTreeMap::len).sum()
    }

    pub fn obs(&self, firm: &FirmId, month: MonthStamp) -> Option<&PriceObs> {
        self.firms.get(firm)?.get(&month)
    }

    pub fn firm_series(&self, firm: &FirmId) -> Option<&BTreeMap<MonthStamp, PriceObs>> {
        self.firms.get(firm)
    }

    pub fn firm_return(&self, firm: &FirmId, month: MonthStamp) -> Option<f64> {
        self.obs(firm, month).map(|o| o.total_return)
    }

    pub fn market_return(&self, month: MonthStamp) -> Option<f64> {
        self.market.get(&month).copied()
    }

    pub fn market_series(&self) -> &BTreeMap<MonthStamp, f64> {
        &self.market
    }

    /// Months with a market return, ascending.
    pub fn months(&self) -> Vec<MonthStamp> {
        self.market.keys().copied().collect()
    }

    pub fn first_month(&self) -> Option<MonthStamp> {
        self.market.keys().next().copied()
    }

    pub fn last_month(&self) -> Option<MonthStamp> {
        self.market.keys().next_back().copied()
    }

    pub fn has_daily(&self) -> bool {
        self.daily.is_some()
    }

    pub fn daily(&self) -> Option<&BTreeMap<FirmId, Vec<(NaiveDate, f64)>>> {
        self.daily.as_ref()
    }

    /// Daily returns of `firm` dated within `[from, to]`.
    pub fn daily_returns(&self, firm: &FirmId, from: NaiveDate, to: NaiveDate) -> &[(NaiveDate, f64)] {
        let Some(rows) = self.daily.as_ref().and_then(|d| d.get(firm)) else {
            return &[];
        };
        let lo = rows.partition_point(|(d, _)| *d < from);
        let hi = rows.partition_point(|(d, _)| *d <= to);
        &rows[lo..hi.max(lo)]
    }

    /// Copy of the panel with everything dated after `month` removed.
    pub fn truncated_after(&self, month: MonthStamp) -> PricePanel {
        let last = month.last_day();
        PricePanel {
            firms: self
                .firms
                .iter()
                .map(|(f, s)| (f.clone(), s.range(..=month).map(|(m, o)| (*m, *o)).collect()))
                .filter(|(_, s): &(FirmId, BTreeMap<MonthStamp, PriceObs>)| !s.is_empty())
                .collect(),
            market: self.market.range(..=month).map(|(m, r)| (*m, *r)).collect(),
            daily: self.daily.as_ref().map(|d| {
                d.iter()
                    .map(|(f, rows)| {
                        (
                            f.clone(),
                            rows.iter().copied().filter(|(dt, _)| *dt <= last).collect::<Vec<_>>(),
                        )
                    })
                    .filter(|(_, rows)| !rows.is_empty())
                    .collect()
            }),
        }
    }
}

/// One fiscal year of accounting items for one firm.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalRecord {
    pub firm: FirmId,
    pub fiscal_year_end: NaiveDate,
    pub available_from: NaiveDate,
    pub ocf: f64,
    pub total_assets: f64,
    pub ebit: f64,
    pub net_income: f64,
    pub common_equity: f64,
    pub book_equity: f64,
    pub shares_outstanding_adjusted: f64,
    pub industry_2digit: Option<u16>,
}

impl FundamentalRecord {
    /// The accounts may be used at month end `as_of`: the fiscal year closed at
    /// least six calendar months earlier and the report had been published.
    pub fn usable_at(&self, as_of: MonthStamp) -> bool {
        let cutoff = as_of.last_day();
        add_calendar_months(self.fiscal_year_end, PUBLICATION_LAG_MONTHS) <= cutoff
            && self.available_from <= cutoff
    }
}

/// Annual records per firm, sorted by fiscal year end.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FundamentalStore {
    by_firm: BTreeMap<FirmId, Vec<FundamentalRecord>>,
}

impl FundamentalStore {
    pub fn from_records(records: impl IntoIterator<Item = FundamentalRecord>) -> Result<Self> {
        let mut by_firm: BTreeMap<FirmId, Vec<FundamentalRecord>> = BTreeMap::new();
        for r in records {
            if r.available_from < r.fiscal_year_end {
                return Err(Error::Validation(format!(
                    "{}: available_from {} precedes fiscal_year_end {}",
                    r.firm, r.available_from, r.fiscal_year_end
                )));
            }
            by_firm.entry(r.firm.clone()).or_default().push(r);
        }
        for (firm, recs) in by_firm.iter_mut() {
            recs.sort_by_key(|r| r.fiscal_year_end);
            if let Some(w) = recs.windows(2).find(|w| w[0].fiscal_year_end == w[1].fiscal_year_end) {
                return Err(Error::DuplicateKey {
                    file: "fundamentals.csv".into(),
                    key: format!("({firm}, {})", w[0].fiscal_year_end),
                });
            }
        }
        Ok(FundamentalStore { by_firm })
    }

    pub fn is_empty(&self) -> bool {
        self.by_firm.is_empty()
    }

    pub fn len(&self) -> usize {
        self.by_firm.values().map(Vec::len).sum()
    }

    pub fn records(&self) -> impl Iterator<Item = &FundamentalRecord> {
        self.by_firm.values().flatten()
    }

    pub fn firm_records(&self, firm: &FirmId) -> &[FundamentalRecord] {
        self.by_firm.get(firm).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Latest accounts usable at `as_of`. When the last fiscal year closed
    /// less than six months ago this is the penultimate year.
    pub fn point_in_time(&self, firm: &FirmId, as_of: MonthStamp) -> Option<&FundamentalRecord> {
        self.usable(firm, as_of).next_back()
    }

    /// The point-in-time record and the usable record preceding it.
    pub fn point_in_time_pair(
        &self,
        firm: &FirmId,
        as_of: MonthStamp,
    ) -> Option<(&FundamentalRecord, &FundamentalRecord)> {
        let mut it = self.usable(firm, as_of).rev();
        let current = it.next()?;
        let previous = it.next()?;
        Some((current, previous))
    }

    fn usable(
        &self,
        firm: &FirmId,
        as_of: MonthStamp,
    ) -> impl DoubleEndedIterator<Item = &FundamentalRecord> {
        self.firm_records(firm)
            .iter()
            .filter(move |r| r.usable_at(as_of))
    }

    pub fn truncated_after(&self, month: MonthStamp) -> FundamentalStore {
        let last = month.last_day();
        FundamentalStore {
            by_firm: self
                .by_firm
                .iter()
                .map(|(f, recs)| {
                    (
                        f.clone(),
                        recs.iter()
                            .filter(|r| r.fiscal_year_end <= last && r.available_from <= last)
                            .cloned()
                            .collect::<Vec<_>>(),
                    )
                })
                .filter(|(_, recs)| !recs.is_empty())
                .collect(),
        }
    }
}

/// Monthly consensus target prices keyed by (firm, month).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetStore {
    targets: BTreeMap<(FirmId, MonthStamp), f64>,
}

impl TargetStore {
    pub fn from_records(records: impl IntoIterator<Item = (FirmId, MonthStamp, f64)>) -> Result<Self> {
        let mut targets = BTreeMap::new();
        for (firm, month, target) in records {
            if !(target > 0.0) {
                return Err(Error::Validation(format!(
                    "non-positive target for ({firm}, {month})"
                )));
            }
            let key = (firm, month);
            if targets.contains_key(&key) {
                return Err(Error::DuplicateKey {
                    file: "targets.csv".into(),
                    key: format!("({}, {})", key.0, key.1),
                });
            }
            targets.insert(key, target);
        }
        Ok(TargetStore { targets })
    }

    pub fn get(&self, firm: &FirmId, month: MonthStamp) -> Option<f64> {
        self.targets.get(&(firm.clone(), month)).copied()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FirmId, MonthStamp, f64)> {
        self.targets.iter().map(|((f, m), t)| (f, *m, *t))
    }

    pub fn months(&self) -> BTreeSet<MonthStamp> {
        self.targets.keys().map(|(_, m)| *m).collect()
    }

    pub fn truncated_after(&self, month: MonthStamp) -> TargetStore {
        TargetStore {
            targets: self
                .targets
                .iter()
                .filter(|((_, m), _)| *m <= month)
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }
}

/// Everything one analysis run reads.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub prices: PricePanel,
    pub fundamentals: FundamentalStore,
    pub targets: Option<TargetStore>,
    pub report: LoadReport,
}

impl Dataset {
    /// All inputs with anything dated after `month` deleted.
    pub fn truncated_after(&self, month: MonthStamp) -> Dataset {
        Dataset {
            prices: self.prices.truncated_after(month),
            fundamentals: self.fundamentals.truncated_after(month),
            targets: self.targets.as_ref().map(|t| t.truncated_after(month)),
            report: self.report.clone(),
        }
    }
}
