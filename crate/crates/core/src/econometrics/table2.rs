use std::fmt::{self, Write as _};
use std::io::Write;

use super::bias::BiasObservation;
use super::ols::{fit_within, PanelDesign};
use crate::error::{Error, Result};
use crate::panel::{FirmId, MonthStamp};

pub const CRIT_5PCT: f64 = 1.960;
pub const CRIT_1PCT: f64 = 2.576;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependent {
    Mistake,
    Forecast,
    Realized,
}

impl Dependent {
    pub fn name(self) -> &'static str {
        match self {
            Dependent::Mistake => "mistake",
            Dependent::Forecast => "forecast",
            Dependent::Realized => "realized",
        }
    }

    fn of(self, o: &BiasObservation) -> f64 {
        match self {
            Dependent::Mistake => o.mistake,
            Dependent::Forecast => o.forecast_return,
            Dependent::Realized => o.realized_return,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regressor {
    Quality,
    BookToMarket,
    Volatility,
}

impl Regressor {
    pub fn name(self) -> &'static str {
        match self {
            Regressor::Quality => "quality",
            Regressor::BookToMarket => "btm",
            Regressor::Volatility => "vol",
        }
    }

    fn of(self, o: &BiasObservation) -> f64 {
        match self {
            Regressor::Quality => o.quality_rank,
            Regressor::BookToMarket => o.btm_rank,
            Regressor::Volatility => o.vol_rank,
        }
    }
}

/// A month fixed-effect regression with firm-clustered errors.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSpec {
    pub dependent: Dependent,
    pub regressors: Vec<Regressor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stars {
    None,
    FivePercent,
    OnePercent,
}

impl Stars {
    pub fn from_t(t: f64) -> Stars {
        let a = t.abs();
        if a >= CRIT_1PCT {
            Stars::OnePercent
        } else if a >= CRIT_5PCT {
            Stars::FivePercent
        } else {
            Stars::None
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stars::None => "",
            Stars::FivePercent => "**",
            Stars::OnePercent => "***",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub spec: RegressionSpec,
    pub coefficients: Vec<f64>,
    pub clustered_se: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub stars: Vec<Stars>,
    pub n_obs: usize,
    pub n_clusters: usize,
    pub n_months: usize,
    pub r_squared_within: f64,
}

impl RegressionResult {
    pub fn coefficient(&self, r: Regressor) -> Option<f64> {
        self.index(r).map(|i| self.coefficients[i])
    }

    pub fn t_stat(&self, r: Regressor) -> Option<f64> {
        self.index(r).map(|i| self.t_stats[i])
    }

    pub fn se(&self, r: Regressor) -> Option<f64> {
        self.index(r).map(|i| self.clustered_se[i])
    }

    fn index(&self, r: Regressor) -> Option<usize> {
        self.spec.regressors.iter().position(|x| *x == r)
    }
}

/// OLS of the chosen dependent on the rank regressors with month effects
/// absorbed by demeaning and standard errors clustered by firm.
pub fn panel_ols(spec: &RegressionSpec, data: &[BiasObservation]) -> Result<RegressionResult> {
    let k = spec.regressors.len();
    let mut design: PanelDesign<MonthStamp, FirmId> = PanelDesign::new(k);
    let mut row = vec![0.0; k];
    for o in data {
        for (slot, r) in row.iter_mut().zip(&spec.regressors) {
            *slot = r.of(o);
        }
        design.push(o.month, o.firm.clone(), spec.dependent.of(o), &row);
    }
    let fit = fit_within(&design)?;
    let clustered_se = fit.standard_errors();
    let t_stats: Vec<f64> = fit
        .coefficients
        .iter()
        .zip(&clustered_se)
        .map(|(b, se)| if *se > 0.0 { b / se } else { f64::NAN })
        .collect();
    let stars = t_stats.iter().map(|t| Stars::from_t(*t)).collect();
    Ok(RegressionResult {
        spec: spec.clone(),
        coefficients: fit.coefficients,
        clustered_se,
        t_stats,
        stars,
        n_obs: fit.n_obs,
        n_clusters: fit.n_clusters,
        n_months: fit.n_groups,
        r_squared_within: fit.r_squared_within,
    })
}

/// The six regressions: {mistake, forecast, realized} x {quality alone,
/// quality with book-to-market and volatility}.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2 {
    pub columns: Vec<RegressionResult>,
}

pub fn table2_specs() -> Vec<RegressionSpec> {
    let short = vec![Regressor::Quality];
    let long = vec![Regressor::Quality, Regressor::BookToMarket, Regressor::Volatility];
    [Dependent::Mistake, Dependent::Forecast, Dependent::Realized]
        .into_iter()
        .flat_map(|d| {
            [
                RegressionSpec {
                    dependent: d,
                    regressors: short.clone(),
                },
                RegressionSpec {
                    dependent: d,
                    regressors: long.clone(),
                },
            ]
        })
        .collect()
}

pub fn run_table2(data: &[BiasObservation]) -> Result<Table2> {
    if data.is_empty() {
        return Err(Error::EmptyCrossSection);
    }
    let columns = table2_specs()
        .iter()
        .map(|s| panel_ols(s, data))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table2 { columns })
}

impl Table2 {
    pub fn column(&self, dependent: Dependent, with_controls: bool) -> &RegressionResult {
        self.columns
            .iter()
            .find(|c| c.spec.dependent == dependent && (c.spec.regressors.len() > 1) == with_controls)
            .expect("all six columns present")
    }

    /// coef(mistake) - coef(forecast) + coef(realized), per column pair and
    /// regressor; zero up to rounding since mistake = forecast - realized.
    pub fn consistency_residuals(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for controls in [false, true] {
            let m = self.column(Dependent::Mistake, controls);
            let f = self.column(Dependent::Forecast, controls);
            let r = self.column(Dependent::Realized, controls);
            for i in 0..m.coefficients.len() {
                out.push(m.coefficients[i] - f.coefficients[i] + r.coefficients[i]);
            }
        }
        out
    }
}

pub const REGRESSION_HEADER: [&str; 10] = [
    "column",
    "dependent",
    "regressor",
    "coefficient",
    "clustered_se",
    "t_stat",
    "stars",
    "n_obs",
    "n_clusters",
    "r_squared_within",
];

pub fn write_regression_report<W: Write>(table: &Table2, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| Error::Validation(format!("csv write failed: {e}"));
    w.write_record(REGRESSION_HEADER).map_err(err)?;
    for (c, col) in table.columns.iter().enumerate() {
        for (i, r) in col.spec.regressors.iter().enumerate() {
            w.write_record([
                (c + 1).to_string(),
                col.spec.dependent.name().to_string(),
                r.name().to_string(),
                col.coefficients[i].to_string(),
                col.clustered_se[i].to_string(),
                col.t_stats[i].to_string(),
                col.stars[i].to_string(),
                col.n_obs.to_string(),
                col.n_clusters.to_string(),
                col.r_squared_within.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

/// Plain-text rendering with coefficients over bracketed SEs.
pub fn render_table2(table: &Table2) -> String {
    let width = 14;
    let mut s = String::new();
    let _ = writeln!(s, "{:<14}{:^28}|{:^28}|{:^28}", "", "Mistake", "Forecast", "Realized");
    let _ = write!(s, "{:<14}", "");
    for c in 1..=table.columns.len() {
        let _ = write!(s, "{:>width$}", format!("({c})"));
    }
    s.push('\n');
    for reg in [Regressor::Quality, Regressor::BookToMarket, Regressor::Volatility] {
        let _ = write!(s, "{:<14}", reg.name());
        for col in &table.columns {
            let cell = match col.index(reg) {
                Some(i) => format!("{:.4}{}", col.coefficients[i], col.stars[i]),
                None => String::new(),
            };
            let _ = write!(s, "{cell:>width$}");
        }
        s.push('\n');
        let _ = write!(s, "{:<14}", "");
        for col in &table.columns {
            let cell = match col.index(reg) {
                Some(i) => format!("({:.4})", col.clustered_se[i]),
                None => String::new(),
            };
            let _ = write!(s, "{cell:>width$}");
        }
        s.push('\n');
    }
    let rows: [(&str, Box<dyn Fn(&RegressionResult) -> String>); 5] = [
        ("Observations", Box::new(|c| c.n_obs.to_string())),
        ("Firms", Box::new(|c| c.n_clusters.to_string())),
        ("R2 within", Box::new(|c| format!("{:.4}", c.r_squared_within))),
        ("Month FE", Box::new(|_| "YES".into())),
        ("Cluster", Box::new(|_| "Firm".into())),
    ];
    for (label, f) in rows.iter() {
        let _ = write!(s, "{label:<14}");
        for col in &table.columns {
            let _ = write!(s, "{:>width$}", f(col));
        }
        s.push('\n');
    }
    s
}
