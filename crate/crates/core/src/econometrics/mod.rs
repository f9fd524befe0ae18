//! Analyst forecast-bias panel and month fixed-effect regressions with
//! firm-clustered standard errors.

mod bias;
mod ols;
mod table2;

pub use bias::{
    build_bias_panel, forecast_return, mistake, realized_return_12m, BiasObservation, BiasPanelOptions,
    HORIZON_MONTHS,
};
pub use ols::{fit_within, FeFit, PanelDesign};
pub use table2::{
    panel_ols, render_table2, run_table2, table2_specs, write_regression_report, Dependent,
    RegressionResult, RegressionSpec, Regressor, Stars, Table2, CRIT_1PCT, CRIT_5PCT,
};
