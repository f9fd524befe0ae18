//! Cross-sectional signals and the rank transform shared by portfolios and
//! regressions.
//!
//! Each strategy implements [`Signal`] and is looked up by name in a
//! [`SignalRegistry`]; [`SignalRegistry::with_builtins`] provides the nine
//! standard ones.

mod builtin;
mod rank;
mod registry;

pub use builtin::{
    book_to_market, industry_leader, industry_leader_returns, low_vol, momentum, net_repurchase,
    quality_ocf, quality_roa, quality_roe, BookToMarket, IndustryLeader, LowVol, Market, Momentum,
    NetRepurchase, OcfToAssets, ReturnOnAssets, ReturnOnEquity, MIN_DAILY_OBS, MIN_INDUSTRY_FIRMS,
    MONTHLY_VOL_WINDOW,
};
pub use rank::rank_normalize;
pub use registry::{
    compute_frame, compute_frames, Signal, SignalContext, SignalFrame, SignalKind, SignalRegistry,
    DEFAULT_UNIVERSE_SIZE,
};
