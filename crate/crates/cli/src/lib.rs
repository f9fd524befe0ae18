//! Batch commands behind the `qualitas` binary.
//!
//! Each `cmd_*` function is a pure function of its input files and
//! configuration; the binary only parses flags and maps [`Failure`] to an
//! exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qualitas::econometrics::{build_bias_panel, render_table2, run_table2, write_regression_report, BiasPanelOptions};
use qualitas::panel::{export_dir, load_dir, Dataset, TARGETS_FILE};
use qualitas::portfolio::{benchmark_strategy, hedged_strategy, write_strategy_returns, StrategyResult};
use qualitas::riskstats::{risk_report, write_stats_report, RiskReport};
use qualitas::signals::{compute_frames, SignalContext, SignalKind, SignalRegistry, DEFAULT_UNIVERSE_SIZE};
use qualitas::synthgen::{generate, GeneratorConfig};
use qualitas::Error;

pub const STRATEGY_FILE: &str = "strategy_returns.csv";
pub const STATS_FILE: &str = "stats_report.csv";
pub const REGRESSION_FILE: &str = "regression_report.csv";
pub const REGRESSION_TABLE_FILE: &str = "regression_table.txt";
pub const LOAD_REPORT_FILE: &str = "load_report.txt";
pub const RUN_NOTES_FILE: &str = "run_notes.txt";
pub const REPORT_FILE: &str = "report.txt";
pub const GENERATOR_CONFIG_FILE: &str = "generator.cfg";

pub const QUALITY_SIGNALS: [&str; 3] = ["ocf_at", "roa", "roe"];
/// Months of live returns required beyond the beta burn-in.
pub const MIN_LIVE_MONTHS: usize = 12;

pub const EXIT_DEGENERATE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;

/// A command failure carrying its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DEGENERATE,
            message: message.into(),
        }
    }

    fn with_context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::UnknownSignal(_) | Error::Config(_) | Error::WouldOverwrite(_) => EXIT_USAGE,
            Error::EmptyCrossSection
            | Error::ZeroVariance(_)
            | Error::InsufficientData(_)
            | Error::RankDeficient
            | Error::TooFewClusters(_) => EXIT_DEGENERATE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;

/// Settings shared by the analysis commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub universe_size: usize,
    pub beta_window: usize,
    pub signals: Vec<String>,
    pub clip_quantile: Option<f64>,
    pub quality: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: PathBuf::from("data"),
            output_dir: PathBuf::from("out"),
            universe_size: DEFAULT_UNIVERSE_SIZE,
            beta_window: qualitas::portfolio::DEFAULT_BETA_WINDOW,
            signals: SignalRegistry::with_builtins().names().iter().map(|s| s.to_string()).collect(),
            clip_quantile: None,
            quality: "ocf_at".into(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CmdResult<()> {
        if self.beta_window < 12 {
            return Err(Failure::usage(format!("beta window must be at least 12 months, got {}", self.beta_window)));
        }
        if self.signals.is_empty() {
            return Err(Failure::usage("no signals requested"));
        }
        if self.universe_size == 0 {
            return Err(Failure::usage("universe size must be positive"));
        }
        if let Some(q) = self.clip_quantile {
            if !(0.0..0.1).contains(&q) {
                return Err(Failure::usage(format!("clip quantile must lie in [0, 0.1), got {q}")));
            }
        }
        if !QUALITY_SIGNALS.contains(&self.quality.as_str()) {
            return Err(Failure::usage(format!(
                "quality measure must be one of {}, got `{}`",
                QUALITY_SIGNALS.join(", "),
                self.quality
            )));
        }
        Ok(())
    }

    /// Applies `key = value` lines (`universe_size`, `beta_window`,
    /// `signals`, `clip_quantile`, `quality`, `data_dir`, `output_dir`).
    pub fn apply_kv_str(&mut self, text: &str) -> CmdResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: String| Failure::usage(format!("config line {}: {m}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("bad value `{v}` for {key}")));
            match key {
                "data_dir" => self.data_dir = value.into(),
                "output_dir" => self.output_dir = value.into(),
                "universe_size" => self.universe_size = num(value)?,
                "beta_window" => self.beta_window = num(value)?,
                "signals" => self.signals = split_list(value),
                "clip_quantile" => {
                    self.clip_quantile = Some(value.parse().map_err(|_| bad(format!("bad value `{value}` for {key}")))?)
                }
                "quality" => self.quality = value.into(),
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        Ok(())
    }
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CmdResult<()> {
    fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn create_dir(dir: &Path) -> CmdResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("cannot create {}: {e}", dir.display()),
    })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> qualitas::Result<()>) -> CmdResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Generates a synthetic dataset into `out`, along with the configuration
/// that produced it.
pub fn cmd_simulate(cfg: &GeneratorConfig, out: &Path, force: bool) -> CmdResult<String> {
    let synth = generate(cfg)?;
    export_dir(&synth.data, out, force)?;
    write_file(&out.join(GENERATOR_CONFIG_FILE), cfg.to_kv_string())?;
    Ok(format!(
        "wrote {} firms x {} months to {}\n",
        cfg.n_firms,
        cfg.n_months,
        out.display()
    ))
}

fn load(run: &RunConfig) -> CmdResult<Dataset> {
    let data = load_dir(&run.data_dir)?;
    create_dir(&run.output_dir)?;
    write_file(&run.output_dir.join(LOAD_REPORT_FILE), data.report.to_string())?;
    Ok(data)
}

/// Loads and validates the data directory, writing the load diagnostics.
pub fn cmd_ingest(run: &RunConfig) -> CmdResult<String> {
    let data = load(run)?;
    let p = &data.prices;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} firms, {} firm-months, {} fundamental records, {} targets",
        p.n_firms(),
        p.n_observations(),
        data.fundamentals.len(),
        data.targets.as_ref().map_or(0, |t| t.len())
    );
    if let (Some(a), Some(b)) = (p.first_month(), p.last_month()) {
        let _ = writeln!(s, "months {a} to {b}, daily returns {}", if p.has_daily() { "present" } else { "absent" });
    }
    s.push_str(&data.report.to_string());
    Ok(s)
}

/// Per-signal backtest output.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub names: Vec<String>,
    pub strategies: Vec<StrategyResult>,
    pub reports: Vec<RiskReport>,
    pub notes: Vec<String>,
}

/// Runs every requested signal through the hedged backtest and risk report.
pub fn run_backtest(data: &Dataset, run: &RunConfig) -> CmdResult<Backtest> {
    run.validate()?;
    let registry = SignalRegistry::with_builtins();
    let signals = registry.select(&run.signals)?;
    let n_months = data.prices.months().len();
    let needed = run.beta_window + MIN_LIVE_MONTHS;
    if n_months < needed {
        return Err(Failure::degenerate(format!(
            "dataset has {n_months} months; a {}-month beta window needs at least {needed}",
            run.beta_window
        )));
    }
    let ctx = SignalContext::new(&data.prices, &data.fundamentals).with_universe_size(run.universe_size);
    let mut out = Backtest {
        names: Vec::new(),
        strategies: Vec::new(),
        reports: Vec::new(),
        notes: Vec::new(),
    };
    for signal in signals {
        let name = signal.name();
        let failed = |e: Error| Failure::from(e).with_context(name);
        let (strategy, frames) = match signal.kind() {
            SignalKind::Benchmark => (benchmark_strategy(&data.prices, run.beta_window), None),
            SignalKind::CrossSectional => {
                let frames = compute_frames(signal.as_ref(), &ctx);
                if frames.is_empty() {
                    return Err(Failure::degenerate(format!("{name}: signal is undefined in every month")));
                }
                (hedged_strategy(&frames, &data.prices, run.beta_window).map_err(failed)?, Some(frames))
            }
        };
        let live = strategy.hedged();
        let returns: Vec<f64> = live.iter().map(|(_, r)| *r).collect();
        let market: Vec<f64> = live
            .iter()
            .map(|(m, _)| data.prices.market_return(*m).expect("strategy months have market returns"))
            .collect();
        let report = risk_report(&returns, &market, frames.as_deref()).map_err(failed)?;
        if let Some(note) = signal.degradation(&ctx) {
            out.notes.push(note);
        }
        out.names.push(name.to_string());
        out.strategies.push(strategy);
        out.reports.push(report);
    }
    Ok(out)
}

/// Writes `strategy_returns.csv`, `stats_report.csv` and run notes.
pub fn cmd_backtest(run: &RunConfig) -> CmdResult<String> {
    run.validate()?;
    SignalRegistry::with_builtins().select(&run.signals)?;
    let data = load(run)?;
    let bt = run_backtest(&data, run)?;
    let pairs: Vec<(&str, &StrategyResult)> = bt.names.iter().map(String::as_str).zip(&bt.strategies).collect();
    write_file(
        &run.output_dir.join(STRATEGY_FILE),
        csv_bytes(|b| write_strategy_returns(&pairs, b))?,
    )?;
    let rows: Vec<(&str, &RiskReport)> = bt.names.iter().map(String::as_str).zip(&bt.reports).collect();
    let stats = csv_bytes(|b| write_stats_report(&rows, b))?;
    write_file(&run.output_dir.join(STATS_FILE), &stats)?;
    let mut notes = String::new();
    for n in &bt.notes {
        let _ = writeln!(notes, "{n}");
    }
    write_file(&run.output_dir.join(RUN_NOTES_FILE), &notes)?;
    Ok(format!("{}{notes}", render_csv(&String::from_utf8_lossy(&stats))))
}

/// Writes `regression_report.csv` and its text rendering.
pub fn cmd_regress(run: &RunConfig) -> CmdResult<String> {
    run.validate()?;
    let data = load(run)?;
    if data.targets.is_none() {
        return Err(Error::MissingFile(run.data_dir.join(TARGETS_FILE)).into());
    }
    let registry = SignalRegistry::with_builtins();
    let quality = registry.get(&run.quality)?;
    let options = BiasPanelOptions {
        universe_size: run.universe_size,
        clip_quantile: run.clip_quantile,
    };
    let panel = build_bias_panel(&data, quality.as_ref(), &options)?;
    if panel.is_empty() {
        return Err(Failure::degenerate("no firm-month has a target, a price and a full 12-month return path"));
    }
    let table = run_table2(&panel)?;
    write_file(
        &run.output_dir.join(REGRESSION_FILE),
        csv_bytes(|b| write_regression_report(&table, b))?,
    )?;
    let rendered = render_table2(&table);
    write_file(&run.output_dir.join(REGRESSION_TABLE_FILE), &rendered)?;
    Ok(rendered)
}

/// Aligns a CSV document into space-padded columns.
pub fn render_csv(text: &str) -> String {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let rows: Vec<Vec<String>> = reader
        .records()
        .filter_map(|r| r.ok())
        .map(|r| r.iter().map(String::from).collect())
        .collect();
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncol)
        .map(|j| rows.iter().filter_map(|r| r.get(j)).map(|c| c.len()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = widths[j]) } else { format!("{c:>w$}", w = widths[j]) })
            .collect();
        let _ = writeln!(s, "{}", line.join("  ").trim_end());
    }
    s
}

/// Summarises whatever the analysis commands left in the output directory.
pub fn cmd_report(run: &RunConfig) -> CmdResult<String> {
    let dir = &run.output_dir;
    let read = |name: &str| fs::read_to_string(dir.join(name)).ok();
    let stats = read(STATS_FILE);
    let table = read(REGRESSION_TABLE_FILE);
    if stats.is_none() && table.is_none() {
        return Err(Failure::degenerate(format!("nothing to report in {}", dir.display())));
    }
    let mut s = String::new();
    if let Some(stats) = stats {
        s.push_str("Risk-return profile of hedged strategies\n\n");
        s.push_str(&render_csv(&stats));
        s.push('\n');
    }
    if let Some(notes) = read(RUN_NOTES_FILE).filter(|n| !n.is_empty()) {
        s.push_str("Notes\n");
        s.push_str(&notes);
        s.push('\n');
    }
    if let Some(table) = table {
        s.push_str("Forecast, realised and mistake regressions on quality rank\n\n");
        s.push_str(&table);
        s.push('\n');
    }
    if let Some(load) = read(LOAD_REPORT_FILE) {
        s.push_str("Load diagnostics\n");
        s.push_str(&load);
    }
    write_file(&dir.join(REPORT_FILE), &s)?;
    Ok(s)
}
