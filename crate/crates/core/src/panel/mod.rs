//! Firm-month panel storage, CSV ingestion and point-in-time queries.

mod export;
mod ids;
mod ingest;
mod report;
mod store;

pub use export::{export_dir, write_daily, write_fundamentals, write_market, write_prices, write_targets};
pub use ids::{add_calendar_months, FirmId, MonthStamp};
pub use ingest::{
    ingest_fundamentals, ingest_prices, ingest_targets, load_dir, read_daily, read_market,
    read_prices, DAILY_FILE, FUNDAMENTALS_FILE, MARKET_FILE, PRICES_FILE, TARGETS_FILE,
};
pub use report::{FileReport, LoadReport};
pub use store::{
    Dataset, FundamentalRecord, FundamentalStore, PriceObs, PricePanel, TargetStore,
    DEFAULT_AVAILABILITY_LAG_MONTHS, PUBLICATION_LAG_MONTHS,
};
