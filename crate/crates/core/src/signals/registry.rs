use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::rank::rank_normalize;
use crate::error::{Error, Result};
use crate::panel::{FirmId, FundamentalStore, MonthStamp, PricePanel};

/// Default number of firms, by lagged market cap, admitted to the universe.
pub const DEFAULT_UNIVERSE_SIZE: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// Ranked across firms and traded as a hedged long-short portfolio.
    CrossSectional,
    /// The market itself, held outright.
    Benchmark,
}

/// Read-only view of the panels a signal is evaluated on.
#[derive(Clone, Copy)]
pub struct SignalContext<'a> {
    pub prices: &'a PricePanel,
    pub fundamentals: &'a FundamentalStore,
    pub universe_size: usize,
}

impl<'a> SignalContext<'a> {
    pub fn new(prices: &'a PricePanel, fundamentals: &'a FundamentalStore) -> Self {
        SignalContext {
            prices,
            fundamentals,
            universe_size: DEFAULT_UNIVERSE_SIZE,
        }
    }

    pub fn with_universe_size(mut self, n: usize) -> Self {
        self.universe_size = n;
        self
    }

    /// The largest firms by market cap at month t-1, ties broken by id.
    pub fn universe(&self, month: MonthStamp) -> Vec<FirmId> {
        let prev = month.pred();
        let mut firms: Vec<(&FirmId, f64)> = self
            .prices
            .firms()
            .filter_map(|f| self.prices.obs(f, prev).map(|o| (f, o.market_cap)))
            .collect();
        firms.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        firms.truncate(self.universe_size);
        let mut out: Vec<FirmId> = firms.into_iter().map(|(f, _)| f.clone()).collect();
        out.sort();
        out
    }
}

/// A cross-sectional anomaly signal. Implementations must only read data
/// dated at or before the evaluation month.
pub trait Signal: Send + Sync {
    /// Registry key, as accepted on the command line.
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn kind(&self) -> SignalKind {
        SignalKind::CrossSectional
    }

    /// Raw signal for one firm at month end, `None` when undefined.
    fn value(&self, ctx: &SignalContext<'_>, firm: &FirmId, month: MonthStamp) -> Option<f64>;

    /// Raw values over a set of firms. Override when the cross-section
    /// shares work across firms.
    fn cross_section(
        &self,
        ctx: &SignalContext<'_>,
        firms: &[FirmId],
        month: MonthStamp,
    ) -> BTreeMap<FirmId, f64> {
        firms
            .iter()
            .filter_map(|f| self.value(ctx, f, month).map(|v| (f.clone(), v)))
            .filter(|(_, v)| v.is_finite())
            .collect()
    }

    /// A note when the signal runs in a degraded mode on this data.
    fn degradation(&self, _ctx: &SignalContext<'_>) -> Option<String> {
        None
    }
}

/// One month's raw values and their rank transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame {
    pub month: MonthStamp,
    pub values: BTreeMap<FirmId, f64>,
    pub ranks: BTreeMap<FirmId, f64>,
}

impl SignalFrame {
    pub fn from_values(month: MonthStamp, values: BTreeMap<FirmId, f64>) -> Result<Self> {
        let ranks = rank_normalize(&values)?;
        Ok(SignalFrame {
            month,
            values,
            ranks,
        })
    }

    /// A frame whose ranks are set directly, bypassing the rank transform.
    pub fn with_weights(month: MonthStamp, weights: BTreeMap<FirmId, f64>) -> Self {
        SignalFrame {
            month,
            values: weights.clone(),
            ranks: weights,
        }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Signal frame for the universe at `month`; `None` if no firm has a value.
pub fn compute_frame(signal: &dyn Signal, ctx: &SignalContext<'_>, month: MonthStamp) -> Option<SignalFrame> {
    let universe = ctx.universe(month);
    let values = signal.cross_section(ctx, &universe, month);
    SignalFrame::from_values(month, values).ok()
}

/// Frames for every month of the market series, evaluated in parallel.
pub fn compute_frames(signal: &dyn Signal, ctx: &SignalContext<'_>) -> Vec<SignalFrame> {
    let months = ctx.prices.months();
    let frames: Vec<Option<SignalFrame>> = months
        .par_iter()
        .map(|m| compute_frame(signal, ctx, *m))
        .collect();
    frames.into_iter().flatten().collect()
}

/// Signals registered by name, in registration order.
#[derive(Clone, Default)]
pub struct SignalRegistry {
    entries: Vec<Arc<dyn Signal>>,
}

impl SignalRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a signal, replacing any previous entry with the same name.
    pub fn register(&mut self, signal: impl Signal + 'static) -> &mut Self {
        let signal: Arc<dyn Signal> = Arc::new(signal);
        match self.entries.iter_mut().find(|s| s.name() == signal.name()) {
            Some(slot) => *slot = signal,
            None => self.entries.push(signal),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Signal>> {
        self.entries
            .iter()
            .find(|s| s.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownSignal(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn Signal>> {
        self.entries.iter()
    }

    /// Resolves a list of names, failing on the first unknown one.
    pub fn select(&self, names: &[impl AsRef<str>]) -> Result<Vec<Arc<dyn Signal>>> {
        names.iter().map(|n| self.get(n.as_ref())).collect()
    }
}
