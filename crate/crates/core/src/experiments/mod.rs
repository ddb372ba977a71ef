//! Reproducible datasets behind every figure, plus custom sweeps and single
//! trajectories driven by an [`ExperimentConfig`].
//!
//! Curves go to CSV (`<abscissa>,<label>,scheme,P1,P2,PR,Pleaked`), scalar
//! summaries to JSON. No randomness is involved anywhere, and parallel work
//! is merged back in config order, so reruns are byte-identical.

pub mod config;
pub mod curves;
pub mod figures;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analytic::{tau_from_gamma_d, Regime};
use crate::dynamics::{build_liouvillian, uniform_grid};
use crate::error::Result;
use crate::measurement::{frequent_state_at, run_frequent, MeasurementMode, MeasurementSchedule};
use crate::model::{DetectorParams, SystemParams};

pub use config::{ExperimentConfig, InitialState, OutputSpec, Scenario, ScheduleSpec, TimeGrid};
pub use curves::{CurveSet, Row, Scheme, Series};
pub use figures::{
    collapse_metric, run_fig2, run_fig3b, run_fig4, scaling_study, CollapseMetric, Fig2Variant,
    Fig4Result, Fig4Variant, ReturnPeak,
};

/// Sup-norm agreement expected between overlaid continuous and frequent
/// curves under `τ = 4/Γ_d`.
pub const OVERLAY_TOLERANCE: f64 = 2e-2;
/// Bandwidths used for the scaling-collapse summary of `fig2a`.
pub const COLLAPSE_LAMBDAS: [f64; 3] = [5.0, 20.0, 100.0];

/// Curves plus an optional JSON summary.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curves: CurveSet,
    pub summary: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
struct OverlayCheck {
    label: String,
    sup_p1: f64,
    consistent: bool,
}

fn overlay_checks(curves: &CurveSet) -> Vec<OverlayCheck> {
    let mut out = Vec::new();
    for s in curves.series.iter().filter(|s| s.scheme == Scheme::Continuous) {
        if let Some(f) = curves.find(&s.label, Scheme::Frequent) {
            let sup = s
                .rows
                .iter()
                .zip(&f.rows)
                .map(|(a, b)| (a.p1 - b.p1).abs())
                .fold(0.0, f64::max);
            out.push(OverlayCheck {
                label: s.label.clone(),
                sup_p1: sup,
                consistent: sup <= OVERLAY_TOLERANCE,
            });
        }
    }
    out
}

fn grid(cfg: &ExperimentConfig) -> Vec<f64> {
    uniform_grid(cfg.time_grid.t_max, cfg.time_grid.points)
}

/// Run a scenario.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let lambda = cfg.system.lambda;
    let out = match cfg.scenario {
        Scenario::Fig2a | Scenario::Fig2b | Scenario::Fig2c | Scenario::Fig2d => {
            let variant = cfg.scenario.fig2_variant().expect("fig2 scenario");
            let times = grid(cfg);
            let curves = run_fig2(variant, &cfg.sweep, lambda, &times)?;
            let summary = match variant {
                Fig2Variant::A => Some(json!({ "scaling": scaling_study(&cfg.sweep, &COLLAPSE_LAMBDAS, &times)? })),
                Fig2Variant::B => {
                    let crossings: Vec<_> = cfg
                        .sweep
                        .iter()
                        .enumerate()
                        .flat_map(|(i, a)| cfg.sweep[i + 1..].iter().map(move |b| (*a, *b)))
                        .map(|(a, b)| {
                            let sa = curves.find(&curves::label(a), Scheme::Continuous).expect("series");
                            let sb = curves.find(&curves::label(b), Scheme::Continuous).expect("series");
                            Ok(json!({ "y_a": a, "y_b": b, "first_crossing_t": figures::first_crossing(sa, sb)? }))
                        })
                        .collect::<Result<_>>()?;
                    Some(json!({ "crossings": crossings }))
                }
                _ => None,
            };
            RunOutput { curves, summary }
        }
        Scenario::Fig3b => {
            let curves = run_fig3b(cfg.time_grid.t_max, &cfg.sweep, lambda)?;
            let summary = json!({ "t0": cfg.time_grid.t_max, "overlay": overlay_checks(&curves) });
            RunOutput { curves, summary: Some(summary) }
        }
        Scenario::Fig4a | Scenario::Fig4b => {
            let variant = if cfg.scenario == Scenario::Fig4a { Fig4Variant::A } else { Fig4Variant::B };
            let result = run_fig4(variant, &cfg.sweep, &grid(cfg))?;
            let summary = (variant == Fig4Variant::A).then(|| json!({ "peaks": result.peaks }));
            RunOutput { curves: result.curves, summary }
        }
        Scenario::Custom => run_sweep(cfg)?,
    };
    out.curves.validate()?;
    Ok(out)
}

/// Continuous curves for every `y` in `cfg.sweep`, each overlaid with the
/// frequent-check scheme at `τ = 4/Γ_d`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let times = grid(cfg);
    let sys = cfg.system;
    let rho0 = cfg.initial.density_matrix();
    let free = build_liouvillian(&sys, &DetectorParams::OFF)?;
    let per_y: Vec<(Vec<Row>, Vec<Row>)> = cfg
        .sweep
        .par_iter()
        .map(|&y| {
            let gamma_d = sys.lambda / y;
            let det = DetectorParams::from_asymmetry(gamma_d, cfg.delta)?;
            let traj = build_liouvillian(&sys, &det)?.evolve(&rho0, &times)?;
            let cont = times.iter().zip(&traj).map(|(&t, r)| Row::from_state(t, r)).collect();
            let tau = tau_from_gamma_d(gamma_d, Regime::SmallX)?;
            let freq = times
                .iter()
                .map(|&t| Ok(Row::from_state(t, &frequent_state_at(&rho0, &free, tau, t)?)))
                .collect::<Result<_>>()?;
            Ok((cont, freq))
        })
        .collect::<Result<_>>()?;
    let mut curves = CurveSet::new(cfg.stem(), "t", "y");
    for (&y, (cont, freq)) in cfg.sweep.iter().zip(per_y) {
        curves.push(curves::label(y), Scheme::Continuous, cont);
        curves.push(curves::label(y), Scheme::Frequent, freq);
    }
    let summary = json!({ "overlay": overlay_checks(&curves) });
    Ok(RunOutput { curves, summary: Some(summary) })
}

/// A single trajectory: frequent checks when `cfg.schedule` is set, otherwise
/// continuous monitoring with `cfg.detector` (detector off when absent).
pub fn simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let sys: SystemParams = cfg.system;
    let rho0 = cfg.initial.density_matrix();
    let mut curves = CurveSet::new(cfg.stem(), "t", "case");
    let summary = match cfg.schedule {
        Some(spec) => {
            let sched = MeasurementSchedule::covering(spec.tau, cfg.time_grid.t_max, spec.mode)?;
            let run = run_frequent(&rho0, &sys, &sched)?;
            let rows = run.times.iter().zip(&run.states).map(|(&t, r)| Row::from_state(t, r)).collect();
            let case = match spec.mode {
                MeasurementMode::Nonselective => format!("tau={}", spec.tau),
                MeasurementMode::NullConditioned => format!("tau={} null", spec.tau),
            };
            curves.push(case, Scheme::Frequent, rows);
            json!({
                "tau": spec.tau,
                "x": sys.lambda * spec.tau,
                "mode": spec.mode,
                "null_probability": run.null_probability,
                "final_state": run.states.last(),
            })
        }
        None => {
            let det = cfg.detector.unwrap_or(DetectorParams::OFF);
            let times = grid(cfg);
            let traj = build_liouvillian(&sys, &det)?.evolve(&rho0, &times)?;
            let rows = times.iter().zip(&traj).map(|(&t, r)| Row::from_state(t, r)).collect();
            curves.push(format!("gd1={} gd2={}", det.gamma_d1, det.gamma_d2), Scheme::Continuous, rows);
            json!({ "detector": det, "final_state": traj.last() })
        }
    };
    curves.validate()?;
    Ok(RunOutput { curves, summary: Some(summary) })
}

/// Files produced for one run.
#[derive(Debug, Clone)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub script: PathBuf,
    pub summary: Option<PathBuf>,
}

/// Write `<stem>.csv`, `<stem>.gp` and, when present, `<stem>.json` into `dir`.
pub fn write_outputs(dir: &Path, stem: &str, out: &RunOutput) -> Result<WrittenFiles> {
    std::fs::create_dir_all(dir)?;
    let csv_name = format!("{stem}.csv");
    let csv = dir.join(&csv_name);
    std::fs::write(&csv, out.curves.to_csv_bytes()?)?;
    let script = dir.join(format!("{stem}.gp"));
    std::fs::write(&script, out.curves.plot_script(&csv_name))?;
    let summary = match &out.summary {
        Some(value) => {
            let path = dir.join(format!("{stem}.json"));
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            std::fs::write(&path, text)?;
            Some(path)
        }
        None => None,
    };
    Ok(WrittenFiles { csv, script, summary })
}
