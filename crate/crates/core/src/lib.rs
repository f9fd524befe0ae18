//! Backtests of rank-weighted market-neutral anomaly strategies and panel
//! regressions of analyst forecast mistakes on firm quality.
//!
//! Data flows from [`panel`] (CSV ingestion, point-in-time fundamentals)
//! through [`signals`] (the strategy registry and rank transform) into
//! [`portfolio`] (rolling-beta hedged returns) and [`riskstats`]. The
//! [`econometrics`] module builds the forecast-bias panel and runs month
//! fixed-effect regressions with firm-clustered errors. [`synthgen`]
//! produces datasets with known ground truth.

pub mod econometrics;
pub mod error;
pub mod moments;
pub mod panel;
pub mod portfolio;
pub mod riskstats;
pub mod signals;
pub mod synthgen;

pub use error::{Error, Result};
