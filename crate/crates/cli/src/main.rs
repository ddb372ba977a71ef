use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use zeno_transfer::acceptance;
use zeno_transfer::continuum::compare_fictitious;
use zeno_transfer::experiments::config::ScheduleSpec;
use zeno_transfer::experiments::{
    run_config, simulate, write_outputs, CurveSet, ExperimentConfig, Row, RunOutput, Scenario, Scheme,
};
use zeno_transfer::measurement::MeasurementMode;
use zeno_transfer::model::SystemParams;
use zeno_transfer::Error;

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "zeno-transfer", version, about = "Electron transfer between two dots through a finite-band continuum")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Global {
    /// JSON experiment config; presets are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's output.dir, else `out`).
    #[arg(long, global = true, env = "ZENO_TRANSFER_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Bandwidth Λ in units of Γ.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Swept y = Λ/Γ_d values, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    /// Interval between projective checks.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Check mode: `nonselective` or `null`.
    #[arg(long, global = true)]
    mode: Option<MeasurementMode>,
    /// Base scenario when no config is given.
    #[arg(long, global = true)]
    scenario: Option<Scenario>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single trajectory: continuous monitoring, or frequent checks with --tau.
    Simulate,
    /// Dataset of a figure preset: fig2a..fig2d, fig3b, fig4a, fig4b.
    Figure { id: Scenario },
    /// Continuous curves for each --y, overlaid with frequent checks at τ = 4/Γ_d.
    Sweep,
    /// Compare the fictitious well against a discretized continuum.
    OracleValidate {
        #[arg(long, default_value_t = 16000)]
        n: usize,
        /// Half-width of the discretized band (default 40Λ).
        #[arg(long)]
        w: Option<f64>,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
    /// Run the acceptance suite.
    Check,
}

fn base_config(g: &Global, fallback: Scenario) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(g.scenario.unwrap_or(fallback)),
    };
    if let Some(lambda) = g.lambda {
        let s = cfg.system;
        cfg.system = SystemParams::new(s.e1, s.e2, s.e_r, s.gamma1, s.gamma2, lambda)
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    if let Some(y) = &g.y {
        cfg.sweep = y.clone();
    }
    match (g.tau, g.mode) {
        (Some(tau), mode) => {
            cfg.schedule = Some(ScheduleSpec { tau, mode: mode.unwrap_or(MeasurementMode::Nonselective) })
        }
        (None, Some(mode)) => match cfg.schedule.as_mut() {
            Some(s) => s.mode = mode,
            None => return Err(Error::Config("--mode needs --tau or a schedule in the config".into())),
        },
        (None, None) => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(g: &Global, cfg: &ExperimentConfig) -> PathBuf {
    g.out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn emit(dir: &Path, stem: &str, out: &RunOutput) -> Result<(), Error> {
    let files = write_outputs(dir, stem, out)?;
    println!("{}", files.csv.display());
    println!("{}", files.script.display());
    if let Some(s) = files.summary {
        println!("{}", s.display());
    }
    Ok(())
}

fn oracle_validate(g: &Global, n: usize, w: Option<f64>, tmax: f64, threshold: f64) -> Result<bool, Error> {
    let sys = SystemParams::symmetric(g.lambda.unwrap_or(5.0))?;
    let w = w.unwrap_or(40.0 * sys.lambda);
    let cmp = compare_fictitious(&sys, n, w, tmax)?;

    let mut curves = CurveSet::new("oracle", "t", "case");
    let case = format!("N={n} W={w}");
    let oracle_rows = (0..cmp.oracle.times.len())
        .map(|k| Row::from_dots(cmp.oracle.times[k], cmp.oracle.p1[k], cmp.oracle.p2[k]))
        .collect();
    let well_rows = cmp.oracle.times.iter().zip(&cmp.fictitious).map(|(&t, r)| Row::from_state(t, r)).collect();
    curves.push(case.clone(), Scheme::Oracle, oracle_rows);
    curves.push(case, Scheme::Continuous, well_rows);
    let passed = cmp.sup_deviation() < threshold;
    let summary = json!({
        "lambda": sys.lambda,
        "modes": n,
        "half_width": w,
        "t_max": tmax,
        "sup_p1": cmp.sup_p1,
        "sup_p2": cmp.sup_p2,
        "sup_dots": cmp.sup_dots,
        "threshold": threshold,
        "passed": passed,
    });
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    write_outputs(&dir, "oracle", &RunOutput { curves, summary: Some(summary) })?;
    println!(
        "sup|dP1| = {:.3e} (threshold {threshold:.1e}) at N = {n}, W = {w}, t_max = {tmax}: {}",
        cmp.sup_p1,
        if passed { "ok" } else { "FAILED" }
    );
    Ok(passed)
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(n) = cli.global.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Simulate => {
            let cfg = base_config(g, Scenario::Custom)?;
            emit(&out_dir(g, &cfg), &cfg.stem(), &simulate(&cfg)?)?;
        }
        Command::Figure { id } => {
            let mut cfg = base_config(&Global { scenario: Some(id), ..g.clone() }, id)?;
            if cfg.scenario != id {
                return Err(Error::Config(format!("config describes {}, not {}", cfg.scenario.id(), id.id())));
            }
            cfg.schedule = None;
            emit(&out_dir(g, &cfg), &cfg.stem(), &run_config(&cfg)?)?;
        }
        Command::Sweep => {
            let mut cfg = base_config(g, Scenario::Custom)?;
            cfg.scenario = Scenario::Custom;
            emit(&out_dir(g, &cfg), &cfg.stem(), &run_config(&cfg)?)?;
        }
        Command::OracleValidate { n, w, tmax, threshold } => return oracle_validate(g, n, w, tmax, threshold),
        Command::Check => {
            let reports = acceptance::run_all();
            for r in &reports {
                println!("{r}");
            }
            return Ok(reports.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                ref e if e.is_numerical() => 3,
                Error::Io(_) | Error::Csv(_) => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
