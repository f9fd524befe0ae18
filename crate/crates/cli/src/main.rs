use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qualitas::synthgen::GeneratorConfig;
use qualitas_cli::{
    cmd_backtest, cmd_ingest, cmd_regress, cmd_report, cmd_simulate, split_list, CmdResult, Failure, RunConfig,
};

#[derive(Parser)]
#[command(name = "qualitas", version, about = "Hedged anomaly backtests and analyst forecast-bias regressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Directory holding the input CSV tables
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of largest firms traded each month
    #[arg(long, global = true)]
    universe_size: Option<usize>,
    /// Months of history in the rolling hedge beta
    #[arg(long, global = true)]
    beta_window: Option<usize>,
    /// Symmetric quantile trimmed from each tail of the forecast mistakes
    #[arg(long, global = true)]
    clip_quantile: Option<f64>,
    /// Comma-separated signal names
    #[arg(long, global = true)]
    signals: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset
    Simulate {
        #[arg(long)]
        seed: Option<u64>,
        /// Overwrite existing tables
        #[arg(long)]
        force: bool,
    },
    /// Load and validate a data directory
    Ingest,
    /// Backtest hedged strategies and report their risk profile
    Backtest,
    /// Regress forecast, realised and mistake returns on quality rank
    Regress {
        /// Quality measure: ocf_at, roa or roe
        #[arg(long)]
        quality: Option<String>,
    },
    /// Summarise the outputs of earlier commands
    Report,
}

fn read_config(path: &PathBuf) -> CmdResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn run_config(g: &Global) -> CmdResult<RunConfig> {
    let mut run = RunConfig::default();
    if let Some(path) = &g.config {
        run.apply_kv_str(&read_config(path)?)?;
    }
    if let Some(d) = &g.data_dir {
        run.data_dir = d.clone();
    }
    if let Some(o) = &g.out {
        run.output_dir = o.clone();
    }
    if let Some(n) = g.universe_size {
        run.universe_size = n;
    }
    if let Some(w) = g.beta_window {
        run.beta_window = w;
    }
    if let Some(q) = g.clip_quantile {
        run.clip_quantile = Some(q);
    }
    if let Some(s) = &g.signals {
        run.signals = split_list(s);
    }
    Ok(run)
}

fn dispatch(cli: &Cli) -> CmdResult<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate { seed, force } => {
            let mut cfg = match &g.config {
                Some(path) => GeneratorConfig::from_kv_str(&read_config(path)?)?,
                None => GeneratorConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let out = g
                .out
                .clone()
                .or_else(|| g.data_dir.clone())
                .ok_or_else(|| Failure::usage("simulate needs --out"))?;
            cmd_simulate(&cfg, &out, *force)
        }
        Command::Ingest => cmd_ingest(&run_config(g)?),
        Command::Backtest => cmd_backtest(&run_config(g)?),
        Command::Regress { quality } => {
            let mut run = run_config(g)?;
            if let Some(q) = quality {
                run.quality = q.clone();
            }
            cmd_regress(&run)
        }
        Command::Report => cmd_report(&run_config(g)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
