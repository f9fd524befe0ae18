//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS or FAIL line.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use qualitas::econometrics::{
    build_bias_panel, fit_within, panel_ols, run_table2, BiasObservation, BiasPanelOptions, Dependent, PanelDesign,
    RegressionSpec, Regressor, Table2,
};
use qualitas::panel::{Dataset, FirmId, MonthStamp, PriceObs, PricePanel};
use qualitas::portfolio::{
    benchmark_strategy, hedged_strategy, rank_portfolio_return, rolling_beta, write_strategy_returns, StrategyResult,
};
use qualitas::riskstats::{beta_full, persistence, sharpe, skew_proxy, tail_prob};
use qualitas::signals::{
    compute_frames, low_vol, momentum, rank_normalize, OcfToAssets, SignalContext, SignalFrame, SignalKind,
    SignalRegistry,
};
use qualitas::synthgen::{generate, theoretical_sharpe, GeneratorConfig, SyntheticDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Seed shared by the single-dataset criteria.
const FIXED_SEED: u64 = 2026;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    check(elapsed < limit, format!("{detail}; {:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn quality_only(dep: Dependent) -> RegressionSpec {
    RegressionSpec {
        dependent: dep,
        regressors: vec![Regressor::Quality],
    }
}

// 1. panel estimator against an explicit dummy-variable regression

fn random_micro_panel(rng: &mut ChaCha8Rng) -> oracle::MicroPanel {
    // two firms force equal and opposite cluster scores, so their sandwich
    // is identically zero
    let n_firms = rng.random_range(3..=5usize);
    let n_months = rng.random_range(2..=6usize);
    let k = rng.random_range(1..=3usize);
    let mut p = oracle::MicroPanel {
        month: vec![],
        firm: vec![],
        y: vec![],
        x: vec![],
    };
    for m in 0..n_months {
        for f in 0..n_firms {
            if rng.random::<f64>() < 0.15 {
                continue;
            }
            p.month.push(m);
            p.firm.push(f);
            p.x.push((0..k).map(|_| rng.sample(StandardNormal)).collect());
            let noise: f64 = rng.sample(StandardNormal);
            p.y.push(0.3 * p.x.last().unwrap()[0] + 0.1 * m as f64 + noise);
        }
    }
    p
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(FIXED_SEED);
    let (mut tested, mut worst, mut attempts) = (0, 0.0f64, 0);
    while tested < 25 && attempts < 10_000 {
        attempts += 1;
        let p = random_micro_panel(&mut rng);
        let k = p.x.first().map_or(0, Vec::len);
        let mut months = p.month.clone();
        months.sort();
        months.dedup();
        let mut firms = p.firm.clone();
        firms.sort();
        firms.dedup();
        // keep designs with residual degrees of freedom and two clusters
        if k == 0 || firms.len() < 3 || p.y.len() < k + months.len() + 2 {
            continue;
        }
        let Some(o) = oracle::dummy_ols(&p) else { continue };
        let mut d: PanelDesign<usize, usize> = PanelDesign::new(k);
        for i in 0..p.y.len() {
            d.push(p.month[i], p.firm[i], p.y[i], &p.x[i]);
        }
        let fit = match fit_within(&d) {
            Ok(f) => f,
            Err(e) => return Err(format!("panel {tested}: estimator failed where the oracle did not: {e}")),
        };
        let se = fit.standard_errors();
        for j in 0..k {
            for (a, b) in [(fit.coefficients[j], o.coef[j]), (se[j], o.se[j])] {
                let rel = (a - b).abs() / b.abs().max(1e-300);
                worst = worst.max(rel);
            }
        }
        tested += 1;
    }
    let elapsed = t0.elapsed();
    if tested < 20 {
        return Err(format!("only {tested} usable micro-panels"));
    }
    check(worst <= 1e-8, format!("{tested} micro-panels, max relative error {worst:.2e}"))
        .and_then(|d| within(elapsed, Duration::from_secs(5), d))
}

// 2 and 4. slope recovery against the generator's truth

/// Within-month least-squares slope of the generator's bias on the
/// regression's quality rank, over the regression sample.
fn truth_slope(panel: &[BiasObservation], s: &SyntheticDataset) -> f64 {
    let mut by_month: BTreeMap<MonthStamp, Vec<(f64, f64)>> = BTreeMap::new();
    for o in panel {
        let b = s.truth.bias[&(o.firm.clone(), o.month)];
        by_month.entry(o.month).or_default().push((o.quality_rank, b));
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for rows in by_month.values() {
        let n = rows.len() as f64;
        let mq = rows.iter().map(|r| r.0).sum::<f64>() / n;
        let mb = rows.iter().map(|r| r.1).sum::<f64>() / n;
        for (q, b) in rows {
            sxy += (q - mq) * (b - mb);
            sxx += (q - mq) * (q - mq);
        }
    }
    sxy / sxx
}

fn bias_config(seed: u64, sharpe: f64) -> GeneratorConfig {
    GeneratorConfig {
        n_firms: 500,
        n_months: 120,
        seed,
        analyst_quality_loading: 0.0,
        ..Default::default()
    }
    .with_target_sharpe(sharpe)
}

struct CoverageRun {
    covered: bool,
    consistency: f64,
}

fn criterion_2() -> (Outcome, Vec<f64>) {
    let t0 = Instant::now();
    let seeds: Vec<u64> = (0..200).collect();
    let runs: Vec<Result<CoverageRun, String>> = seeds
        .par_iter()
        .map(|&seed| {
            let s = generate(&bias_config(seed, 1.2)).map_err(|e| e.to_string())?;
            let panel = build_bias_panel(&s.data, &OcfToAssets, &BiasPanelOptions::default()).map_err(|e| e.to_string())?;
            let truth = truth_slope(&panel, &s);
            let cols: Vec<_> = [Dependent::Mistake, Dependent::Forecast, Dependent::Realized]
                .iter()
                .map(|d| panel_ols(&quality_only(*d), &panel))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let (m, f, r) = (&cols[0], &cols[1], &cols[2]);
            Ok(CoverageRun {
                covered: (m.coefficients[0] - truth).abs() <= 2.0 * m.clustered_se[0],
                consistency: (m.coefficients[0] - f.coefficients[0] + r.coefficients[0]).abs(),
            })
        })
        .collect();
    let elapsed = t0.elapsed();
    let mut residuals = Vec::new();
    let mut covered = 0;
    for r in runs {
        match r {
            Ok(run) => {
                covered += run.covered as usize;
                residuals.push(run.consistency);
            }
            Err(e) => return (Err(format!("run failed: {e}")), residuals),
        }
    }
    let share = covered as f64 / seeds.len() as f64;
    let out = check(share >= 0.93, format!("{covered}/{} seeds within 2 clustered SE ({:.1}%)", seeds.len(), 100.0 * share))
        .and_then(|d| within(elapsed, Duration::from_secs(300), d));
    (out, residuals)
}

// 3 and 4. the sign pattern across the six columns

fn criterion_3() -> (Outcome, Vec<Table2>) {
    let seeds: Vec<u64> = (1000..1050).collect();
    let tables: Vec<Result<Table2, String>> = seeds
        .par_iter()
        .map(|&seed| {
            let s = generate(&bias_config(seed, 3.0)).map_err(|e| e.to_string())?;
            let panel = build_bias_panel(&s.data, &OcfToAssets, &BiasPanelOptions::default()).map_err(|e| e.to_string())?;
            run_table2(&panel).map_err(|e| e.to_string())
        })
        .collect();
    let mut ok = Vec::new();
    for t in tables {
        match t {
            Ok(t) => ok.push(t),
            Err(e) => return (Err(format!("run failed: {e}")), ok),
        }
    }
    let hits = ok
        .iter()
        .filter(|t| {
            let tq = |d| t.column(d, false).t_stat(Regressor::Quality).unwrap();
            tq(Dependent::Forecast).abs() < 2.0 && tq(Dependent::Realized) > 2.0 && tq(Dependent::Mistake) < -2.0
        })
        .count();
    let share = hits as f64 / seeds.len() as f64;
    (
        check(share >= 0.9, format!("{hits}/{} seeds show the forecast/realized/mistake pattern", seeds.len())),
        ok,
    )
}

fn criterion_4(tables: &[Table2], quality_only_residuals: &[f64]) -> Outcome {
    let mut worst = quality_only_residuals.iter().cloned().fold(0.0f64, f64::max);
    let mut runs = quality_only_residuals.len() + tables.len();
    for t in tables {
        for r in t.consistency_residuals() {
            worst = worst.max(r.abs());
        }
    }
    // trimmed samples as well
    let s = generate(&bias_config(FIXED_SEED, 1.2)).map_err(|e| e.to_string())?;
    for q in [0.0, 0.01, 0.05] {
        let opts = BiasPanelOptions {
            clip_quantile: Some(q),
            ..Default::default()
        };
        let panel = build_bias_panel(&s.data, &OcfToAssets, &opts).map_err(|e| e.to_string())?;
        let t = run_table2(&panel).map_err(|e| e.to_string())?;
        for r in t.consistency_residuals() {
            worst = worst.max(r.abs());
        }
        runs += 1;
    }
    check(worst <= 1e-10, format!("{runs} runs, max |mistake - forecast + realized| = {worst:.2e}"))
}

// 5. truncation

fn strategy_csv(name: &str, r: &StrategyResult, cut: MonthStamp) -> Vec<u8> {
    let kept = StrategyResult {
        rows: r.rows.iter().filter(|x| x.month <= cut).copied().collect(),
    };
    let mut buf = Vec::new();
    write_strategy_returns(&[(name, &kept)], &mut buf).unwrap();
    buf
}

fn frame_bits(frames: &[SignalFrame], cut: MonthStamp) -> Vec<(MonthStamp, Vec<(FirmId, u64, u64)>)> {
    frames
        .iter()
        .filter(|f| f.month <= cut)
        .map(|f| {
            (
                f.month,
                f.values
                    .iter()
                    .map(|(id, v)| (id.clone(), v.to_bits(), f.ranks[id].to_bits()))
                    .collect(),
            )
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    for daily in [false, true] {
        let s = generate(&GeneratorConfig {
            n_firms: 120,
            n_months: 84,
            seed: FIXED_SEED,
            n_industries: 5,
            daily_returns: daily,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let data = &s.data;
        let months = data.prices.months();
        let ctx = SignalContext::new(&data.prices, &data.fundamentals);
        let registry = SignalRegistry::with_builtins();
        let full: Vec<_> = registry
            .iter()
            .map(|sig| {
                let frames = compute_frames(sig.as_ref(), &ctx);
                let strat = match sig.kind() {
                    SignalKind::Benchmark => benchmark_strategy(&data.prices, 24),
                    SignalKind::CrossSectional => hedged_strategy(&frames, &data.prices, 24).unwrap(),
                };
                (frames, strat)
            })
            .collect();
        for cut in [months[30], months[50], months[70], months[83]] {
            let short: Dataset = data.truncated_after(cut);
            let cctx = SignalContext::new(&short.prices, &short.fundamentals);
            for (sig, (frames, strat)) in registry.iter().zip(&full) {
                let cf = compute_frames(sig.as_ref(), &cctx);
                if frame_bits(frames, cut) != frame_bits(&cf, cut) {
                    return Err(format!("{} frames differ at cut {cut} (daily {daily})", sig.name()));
                }
                let cs = match sig.kind() {
                    SignalKind::Benchmark => benchmark_strategy(&short.prices, 24),
                    SignalKind::CrossSectional => hedged_strategy(&cf, &short.prices, 24).map_err(|e| e.to_string())?,
                };
                if strategy_csv(sig.name(), strat, cut) != strategy_csv(sig.name(), &cs, cut) {
                    return Err(format!("{} strategy differs at cut {cut} (daily {daily})", sig.name()));
                }
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} signal/cut combinations byte-identical, with and without daily returns"
    ))
}

// 6 and 7. hedged OCF strategy on the calibrated 240-month panel

struct Calibrated {
    beta: f64,
    sharpe: f64,
    theory: f64,
    beta_range: (f64, f64),
    elapsed: Duration,
}

fn calibrated_run() -> Result<Calibrated, String> {
    let t0 = Instant::now();
    let cfg = GeneratorConfig {
        n_firms: 500,
        n_months: 240,
        seed: FIXED_SEED,
        firm_beta_range: (0.5, 1.5),
        ..Default::default()
    }
    .with_target_sharpe(1.2);
    let s = generate(&cfg).map_err(|e| e.to_string())?;
    let ctx = SignalContext::new(&s.data.prices, &s.data.fundamentals);
    let frames = compute_frames(&OcfToAssets, &ctx);
    let strat = hedged_strategy(&frames, &s.data.prices, 24).map_err(|e| e.to_string())?;
    let live = strat.hedged();
    let r: Vec<f64> = live.iter().map(|x| x.1).collect();
    let m: Vec<f64> = live.iter().map(|x| s.data.prices.market_return(x.0).unwrap()).collect();
    let betas = s.truth.firm_beta.values();
    let lo = betas.clone().cloned().fold(f64::INFINITY, f64::min);
    let hi = betas.cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Calibrated {
        beta: beta_full(&r, &m).map_err(|e| e.to_string())?,
        sharpe: sharpe(&r).map_err(|e| e.to_string())?,
        theory: theoretical_sharpe(cfg.quality_premium, cfg.n_firms, cfg.idio_vol),
        beta_range: (lo, hi),
        elapsed: t0.elapsed(),
    })
}

fn criterion_6(c: &Calibrated) -> Outcome {
    let (lo, hi) = c.beta_range;
    if !(lo >= 0.5 && hi <= 1.5) {
        return Err(format!("firm betas spread over [{lo:.3}, {hi:.3}]"));
    }
    check(
        c.beta.abs() < 0.05,
        format!("hedged beta {:.4} with firm betas in [{lo:.3}, {hi:.3}]", c.beta),
    )
}

fn criterion_7(c: &Calibrated) -> Outcome {
    check(
        (0.9..=1.5).contains(&c.sharpe),
        format!("backtested Sharpe {:.3} (theoretical {:.3})", c.sharpe, c.theory),
    )
    .and_then(|d| within(c.elapsed, Duration::from_secs(30), d))
}

// 8. statistics unit checks

fn single_firm_panel(returns: &[f64], daily: Option<Vec<(NaiveDate, f64)>>) -> PricePanel {
    let start = MonthStamp::new(2010, 1).unwrap();
    let mut price = 10.0;
    let obs: Vec<_> = returns
        .iter()
        .enumerate()
        .map(|(k, r)| {
            price *= 1.0 + r;
            (
                FirmId::new("A"),
                start.add_months(k as i64),
                PriceObs {
                    price,
                    total_return: *r,
                    market_cap: price,
                },
            )
        })
        .collect();
    let market = (0..returns.len()).map(|k| (start.add_months(k as i64), 0.0));
    let daily = daily.map(|d| d.into_iter().map(|(date, r)| (FirmId::new("A"), date, r)).collect());
    PricePanel::from_parts(obs, market, daily).unwrap()
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut n = 0;
    let mut expect = |name: &str, ok: bool| {
        n += 1;
        if !ok {
            failures.push(name.to_string());
        }
    };
    let ids = |vals: &[f64]| -> BTreeMap<FirmId, f64> {
        vals.iter().enumerate().map(|(i, v)| (FirmId::new(format!("f{i:02}")), *v)).collect()
    };

    // rank weights
    let mut rng = ChaCha8Rng::seed_from_u64(FIXED_SEED);
    let mut sums_ok = true;
    for _ in 0..200 {
        let n = rng.random_range(1..60usize);
        let v: Vec<f64> = (0..n).map(|_| (rng.random_range(0..12) as f64) * 0.5).collect();
        let r = rank_normalize(&ids(&v)).unwrap();
        sums_ok &= r.values().sum::<f64>().abs() < 1e-12;
    }
    expect("rank weights sum to zero", sums_ok);
    let r = rank_normalize(&ids(&[10.0, 20.0, 30.0, 40.0])).unwrap();
    let grid: Vec<f64> = r.values().copied().collect();
    expect(
        "four-point rank grid",
        grid.iter().zip([-0.5, -1.0 / 6.0, 1.0 / 6.0, 0.5]).all(|(a, b)| (a - b).abs() < 1e-15),
    );

    // skew proxy
    expect("skew zero on symmetric series", skew_proxy(&[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap() == 0.0);
    let skewed = [-1.0, 0.0, 0.0, 0.0, 0.0, 5.0];
    let m: f64 = 4.0 / 6.0;
    let sd = (skewed.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 5.0).sqrt();
    expect("skew on {-1,0,0,0,0,5}", (skew_proxy(&skewed).unwrap() - m / sd).abs() < 1e-14);

    // persistence
    let start = MonthStamp::new(2000, 1).unwrap();
    let frozen: Vec<SignalFrame> = (0..12)
        .map(|t| SignalFrame::from_values(start.add_months(t), ids(&[3.0, 1.0, 4.0, 1.5, 9.0, 2.6])).unwrap())
        .collect();
    expect("persistence 1 on frozen signal", (persistence(&frozen).unwrap() - 1.0).abs() < 1e-12);

    // tail probability
    let mut rng = ChaCha8Rng::seed_from_u64(FIXED_SEED + 1);
    let g: Vec<f64> = (0..1_000_000).map(|_| rng.sample(StandardNormal)).collect();
    expect("gaussian tail probability", (tail_prob(&g).unwrap() - 0.022750131948179).abs() < 0.001);
    let mut one = vec![0.0; 100];
    one.iter_mut().enumerate().for_each(|(i, x)| *x = if i % 2 == 0 { 0.01 } else { -0.01 });
    one[0] = -1.0;
    expect("single extreme point", tail_prob(&one).unwrap() == 0.01);

    // sharpe
    let a = 0.02 * (23.0f64 / 24.0).sqrt();
    let s: Vec<f64> = (0..24).map(|k| 0.01 + if k % 2 == 0 { a } else { -a }).collect();
    expect("sharpe 0.5 * sqrt(12)", (sharpe(&s).unwrap() - 0.5 * 12f64.sqrt()).abs() < 1e-12);

    // signals
    let panel = single_firm_panel(&[0.01; 14], None);
    let mom = momentum(&panel, &FirmId::new("A"), MonthStamp::new(2011, 1).unwrap()).unwrap();
    expect("momentum 1.01^11 - 1", (mom - (1.01f64.powi(11) - 1.0)).abs() < 1e-12);
    let days: Vec<NaiveDate> = NaiveDate::from_ymd_opt(2010, 1, 1)
        .unwrap()
        .iter_days()
        .take_while(|d| *d < NaiveDate::from_ymd_opt(2010, 4, 1).unwrap())
        .collect();
    let nd = days.len() as f64;
    let daily: Vec<(NaiveDate, f64)> = days
        .iter()
        .enumerate()
        .map(|(i, d)| (*d, if i % 2 == 0 { 0.01 } else { -0.01 }))
        .collect();
    let panel = single_firm_panel(&[0.0; 4], Some(daily));
    let lv = low_vol(&panel, &FirmId::new("A"), MonthStamp::new(2010, 4).unwrap()).unwrap();
    // alternating +-0.01 over an odd count has mean 0.01/n, so use the exact SD
    let vals: Vec<f64> = (0..days.len()).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
    let mv = vals.iter().sum::<f64>() / nd;
    let exact = (vals.iter().map(|v| (v - mv).powi(2)).sum::<f64>() / (nd - 1.0)).sqrt();
    expect("low-vol closed form", (lv + exact).abs() < 1e-15);
    if days.len() % 2 == 0 {
        expect("low-vol even count", (lv + 0.01 * (nd / (nd - 1.0)).sqrt()).abs() < 1e-15);
    }

    // portfolio
    let w = ids(&[0.5, 0.0, -0.5]);
    let rets = ids(&[0.01, 0.99, 0.03]);
    expect("three-firm portfolio", (rank_portfolio_return(&w, &rets).unwrap() + 0.01).abs() < 1e-15);
    let mkt: Vec<f64> = (0..30).map(|k| ((k * 7 % 11) as f64 - 5.0) / 100.0).collect();
    let half: Vec<f64> = mkt.iter().map(|m| 0.5 * m + 0.003).collect();
    let b = rolling_beta(&half, &mkt, 24).unwrap();
    expect("rolling beta 0.5", b[24..].iter().all(|x| (x.unwrap() - 0.5).abs() < 1e-12));
    let b = rolling_beta(&mkt, &mkt, 24).unwrap();
    expect("rolling beta 1", b[24..].iter().all(|x| (x.unwrap() - 1.0).abs() < 1e-12));

    // econometrics
    let mut d: PanelDesign<u32, u32> = PanelDesign::new(2);
    for i in 0..30u32 {
        let x = [((i * 13 % 7) as f64) - 3.0, ((i * 5 % 9) as f64) * 0.1];
        d.push(i % 5, i % 6, (i % 5) as f64 * 2.0, &x);
    }
    let fit = fit_within(&d).unwrap();
    expect("month-constant outcome has zero slopes", fit.coefficients.iter().all(|c| c.abs() < 1e-12));

    if failures.is_empty() {
        Ok(format!("{n} exact checks passed"))
    } else {
        Err(format!("{} of {n} checks failed: {}", failures.len(), failures.join("; ")))
    }
}

// 9. determinism through the binary

fn run_cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qualitas"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in ["data", "out"] {
        for e in std::fs::read_dir(dir.join(sub)).unwrap() {
            let p = e.unwrap().path();
            files.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), std::fs::read(&p).unwrap()));
        }
    }
    files.sort();
    files
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut snaps = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        std::fs::write(
            dir.join("sim.cfg"),
            "n_firms = 150\nn_months = 96\ndaily_returns = true\ntarget_sharpe = 1.2\n",
        )
        .map_err(|e| e.to_string())?;
        run_cli(&["simulate", "--config", "sim.cfg", "--seed", "9", "--out", "data"], &dir)?;
        run_cli(&["backtest", "--data-dir", "data", "--out", "out"], &dir)?;
        run_cli(&["regress", "--data-dir", "data", "--out", "out"], &dir)?;
        run_cli(&["report", "--out", "out"], &dir)?;
        snaps.push(snapshot(&dir));
    }
    let n = snaps[0].len();
    let names: Vec<&str> = snaps[0].iter().map(|(n, _)| n.as_str()).collect();
    check(
        snaps[0] == snaps[1] && n >= 10,
        format!("{n} files byte-identical across two runs ({})", names.join(", ")),
    )
}

fn main() {
    // optional criterion numbers select a subset, e.g. `-- 1 5`
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: u32| only.is_empty() || only.contains(&n);
    let t0 = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    if wanted(1) {
        results.push((1, "sandwich oracle equivalence", criterion_1()));
    }
    let mut residuals = Vec::new();
    if wanted(2) || wanted(4) {
        let (c2, r) = criterion_2();
        residuals = r;
        if wanted(2) {
            results.push((2, "estimator coverage", c2));
        }
    }
    let mut tables = Vec::new();
    if wanted(3) || wanted(4) {
        let (c3, t) = criterion_3();
        tables = t;
        if wanted(3) {
            results.push((3, "forecast/realized/mistake signature", c3));
        }
    }
    if wanted(4) {
        results.push((4, "column consistency", criterion_4(&tables, &residuals)));
    }
    if wanted(5) {
        results.push((5, "no look-ahead under truncation", criterion_5()));
    }
    if wanted(6) || wanted(7) {
        let run = calibrated_run();
        if wanted(6) {
            results.push((6, "hedge quality", run.as_ref().map_err(Clone::clone).and_then(criterion_6)));
        }
        if wanted(7) {
            results.push((7, "Sharpe calibration", run.as_ref().map_err(Clone::clone).and_then(criterion_7)));
        }
    }
    if wanted(8) {
        results.push((8, "statistics unit checks", criterion_8()));
    }
    if wanted(9) {
        results.push((9, "command-line determinism", criterion_9()));
    }

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("PASS [{n}] {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL [{n}] {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
