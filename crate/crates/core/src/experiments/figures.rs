//! Preset scenarios: population curves under continuous monitoring, the
//! detector-strength sweep at a fixed readout time, and the return of
//! probability from the fictitious well.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{alpha_continuous, p1_survival, tau_from_gamma_d, Regime};
use crate::dynamics::{build_liouvillian, uniform_grid};
use crate::error::{Error, Result};
use crate::measurement::frequent_state_at;
use crate::model::{DensityMatrix, DetectorParams, Level, SystemParams};

use super::curves::{label, CurveSet, Row, Scheme, Series};

pub const DEFAULT_LAMBDA: f64 = 5.0;
pub const DEFAULT_GRID_POINTS: usize = 401;
pub const FIG2_Y_VALUES: [f64; 3] = [1.0, 0.1, 0.01];
pub const FIG2_HORIZON: f64 = 20.0;
/// Misaligned levels `E₁,₂ = ±0.05Γ`.
pub const MISALIGNED_LEVELS: (f64, f64) = (0.05, -0.05);
/// Detector asymmetry `δ` in `Γ_d1,2 = Γ_d(1 ± δ√(Γ/Γ_d))`.
pub const ASYMMETRY_DELTA: f64 = 0.2;
pub const FIG3B_READOUT_TIME: f64 = 20.0;
pub const FIG3B_GRID: (f64, f64, usize) = (0.05, 20.0, 25);
pub const FIG4_LAMBDAS: [f64; 3] = [5.0, 10.0, 20.0];
pub const FIG4A_HORIZON: f64 = 2.0;
pub const FIG4B_HORIZON: f64 = 5.0;
/// Reference check interval for reading off the returned population.
pub const RETURN_REFERENCE_TAU: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fig2Variant {
    A,
    B,
    C,
    D,
}

impl Fig2Variant {
    pub fn misaligned(self) -> bool {
        matches!(self, Fig2Variant::B | Fig2Variant::D)
    }

    pub fn asymmetric(self) -> bool {
        matches!(self, Fig2Variant::C | Fig2Variant::D)
    }

    pub fn system(self, lambda: f64) -> Result<SystemParams> {
        let base = SystemParams::symmetric(lambda)?;
        if self.misaligned() {
            base.with_levels(MISALIGNED_LEVELS.0, MISALIGNED_LEVELS.1)
        } else {
            Ok(base)
        }
    }

    /// Detector at `Γ_d = Λ/y`.
    pub fn detector(self, lambda: f64, y: f64) -> Result<DetectorParams> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("y must be positive, got {y}")));
        }
        let gamma_d = lambda / y;
        let delta = if self.asymmetric() { ASYMMETRY_DELTA } else { 0.0 };
        DetectorParams::from_asymmetry(gamma_d, delta)
    }
}

fn continuous_rows(
    rho0: &DensityMatrix,
    sys: &SystemParams,
    det: &DetectorParams,
    times: &[f64],
) -> Result<Vec<Row>> {
    let traj = build_liouvillian(sys, det)?.evolve(rho0, times)?;
    Ok(times.iter().zip(&traj).map(|(&t, rho)| Row::from_state(t, rho)).collect())
}

/// Limit-law rows: dark component kept, bright component decaying at `αΓ`,
/// so `P₁ = ¼(e^{−αΓt} + 1)²` and `P₂ = ¼(e^{−αΓt} − 1)²`.
pub fn analytic_rows(alpha: f64, times: &[f64]) -> Result<Vec<Row>> {
    times
        .iter()
        .map(|&t| {
            let p1 = p1_survival(t, 1.0, alpha)?;
            let e = (-alpha * t).exp();
            Ok(Row::from_dots(t, p1, 0.25 * (1.0 - e) * (1.0 - e)))
        })
        .collect()
}

/// Continuous-monitoring curves `P(t)` for each `y` starting from `|1⟩`,
/// plus the limit law for variant (a).
pub fn run_fig2(variant: Fig2Variant, y_values: &[f64], lambda: f64, times: &[f64]) -> Result<CurveSet> {
    let sys = variant.system(lambda)?;
    let rho0 = DensityMatrix::basis(Level::Dot1);
    let computed: Vec<Vec<Row>> = y_values
        .par_iter()
        .map(|&y| continuous_rows(&rho0, &sys, &variant.detector(lambda, y)?, times))
        .collect::<Result<_>>()?;

    let name = format!("fig2{}", serde_json::to_value(variant)?.as_str().unwrap_or("?"));
    let mut curves = CurveSet::new(name, "t", "y");
    for (&y, rows) in y_values.iter().zip(computed) {
        curves.push(label(y), Scheme::Continuous, rows);
    }
    if variant == Fig2Variant::A {
        for &y in y_values {
            curves.push(label(y), Scheme::Analytic, analytic_rows(alpha_continuous(y)?, times)?);
        }
    }
    Ok(curves)
}

/// Logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn fig3b_grid() -> Vec<f64> {
    log_grid(FIG3B_GRID.0, FIG3B_GRID.1, FIG3B_GRID.2)
}

/// `P₁,₂(t₀)` against `Γ_d/Λ` for aligned and misaligned levels, under
/// continuous monitoring and under frequent checks with `τ = 4/Γ_d`.
pub fn run_fig3b(t0: f64, gd_over_lambda: &[f64], lambda: f64) -> Result<CurveSet> {
    let mut curves = CurveSet::new("fig3b", "gd_over_lambda", "levels");
    let rho0 = DensityMatrix::basis(Level::Dot1);
    for (name, levels) in [("aligned", (0.0, 0.0)), ("misaligned", MISALIGNED_LEVELS)] {
        let sys = SystemParams::symmetric(lambda)?.with_levels(levels.0, levels.1)?;
        let free = build_liouvillian(&sys, &DetectorParams::OFF)?;
        let pairs: Vec<(Row, Row)> = gd_over_lambda
            .par_iter()
            .map(|&ratio| {
                let gamma_d = ratio * lambda;
                let det = DetectorParams::symmetric(gamma_d)?;
                let cont = build_liouvillian(&sys, &det)?.evolve(&rho0, &[t0])?[0];
                let tau = tau_from_gamma_d(gamma_d, Regime::SmallX)?;
                let freq = frequent_state_at(&rho0, &free, tau, t0)?;
                Ok((Row::from_state(ratio, &cont), Row::from_state(ratio, &freq)))
            })
            .collect::<Result<_>>()?;
        let (cont, freq): (Vec<Row>, Vec<Row>) = pairs.into_iter().unzip();
        curves.push(name, Scheme::Continuous, cont);
        curves.push(name, Scheme::Frequent, freq);
        if name == "aligned" {
            let rows = gd_over_lambda
                .iter()
                .map(|&ratio| {
                    let alpha = alpha_continuous(1.0 / ratio)?;
                    let mut r = analytic_rows(alpha, &[t0])?[0];
                    r.x = ratio;
                    Ok(r)
                })
                .collect::<Result<_>>()?;
            curves.push(name, Scheme::Analytic, rows);
        }
    }
    Ok(curves)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fig4Variant {
    /// Start in the well, watch `P₁` build up and decay.
    A,
    /// Start in dot 1, watch `P₁` and `P_R`.
    B,
}

/// Maximum of `P₁(t)` after starting in the well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnPeak {
    pub lambda: f64,
    pub t_peak: f64,
    pub p1_peak: f64,
    /// `P₁` at [`RETURN_REFERENCE_TAU`].
    pub p1_at_reference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig4Result {
    pub curves: CurveSet,
    pub peaks: Vec<ReturnPeak>,
}

pub fn run_fig4(variant: Fig4Variant, lambdas: &[f64], times: &[f64]) -> Result<Fig4Result> {
    let (name, start) = match variant {
        Fig4Variant::A => ("fig4a", Level::Well),
        Fig4Variant::B => ("fig4b", Level::Dot1),
    };
    let rho0 = DensityMatrix::basis(start);
    let results: Vec<(Vec<Row>, Option<ReturnPeak>)> = lambdas
        .par_iter()
        .map(|&lambda| {
            let sys = SystemParams::symmetric(lambda)?;
            let rows = continuous_rows(&rho0, &sys, &DetectorParams::OFF, times)?;
            let peak = match variant {
                Fig4Variant::A => Some(return_peak(&sys, &rows)?),
                Fig4Variant::B => None,
            };
            Ok((rows, peak))
        })
        .collect::<Result<_>>()?;

    let mut curves = CurveSet::new(name, "t", "lambda");
    let mut peaks = Vec::new();
    for (&lambda, (rows, peak)) in lambdas.iter().zip(results) {
        curves.push(label(lambda), Scheme::Continuous, rows);
        peaks.extend(peak);
    }
    Ok(Fig4Result { curves, peaks })
}

fn return_peak(sys: &SystemParams, rows: &[Row]) -> Result<ReturnPeak> {
    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.p1).collect();
    let t_peak = refine_peak(&xs, &ys)?;
    let l = build_liouvillian(sys, &DetectorParams::OFF)?;
    let rho0 = DensityMatrix::basis(Level::Well);
    // The two sample times need not be ascending, so evaluate them separately.
    let p1_peak = l.evolve(&rho0, &[t_peak])?[0].population(Level::Dot1);
    let p1_at_reference = l.evolve(&rho0, &[RETURN_REFERENCE_TAU])?[0].population(Level::Dot1);
    Ok(ReturnPeak {
        lambda: sys.lambda,
        t_peak,
        p1_peak,
        p1_at_reference,
    })
}

/// Grid argmax refined by the vertex of the parabola through the three
/// neighbouring samples.
pub fn refine_peak(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Alignment("peak search needs >= 3 matching samples".into()));
    }
    let k = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    if k == 0 || k == ys.len() - 1 {
        return Ok(xs[k]);
    }
    let (x0, x1, x2) = (xs[k - 1], xs[k], xs[k + 1]);
    let (y0, y1, y2) = (ys[k - 1], ys[k], ys[k + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if a >= 0.0 {
        return Ok(x1);
    }
    Ok((-b / (2.0 * a)).clamp(x0, x2))
}

/// How tightly curves at a common scaling variable but different `Λ` collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseMetric {
    /// Largest pairwise sup-norm distance of `P₁` within the family.
    pub max_pairwise: f64,
    /// Sup-norm distance of the last (widest-band) curve from the limit law.
    pub limit_deviation: Option<f64>,
}

/// `family` must share one abscissa; pass `alpha` to also measure the last
/// curve against `¼(e^{−αΓt} + 1)²`.
pub fn collapse_metric(family: &[&Series], alpha: Option<f64>) -> Result<CollapseMetric> {
    if family.len() < 2 {
        return Err(Error::Alignment("collapse needs at least two curves".into()));
    }
    let grid = family[0].abscissa();
    for s in &family[1..] {
        if s.abscissa() != grid {
            return Err(Error::Alignment(format!(
                "series {} does not share the grid of series {}",
                s.label, family[0].label
            )));
        }
    }
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let p1s: Vec<Vec<f64>> = family.iter().map(|s| s.p1()).collect();
    let mut max_pairwise: f64 = 0.0;
    for i in 0..p1s.len() {
        for j in i + 1..p1s.len() {
            max_pairwise = max_pairwise.max(sup(&p1s[i], &p1s[j]));
        }
    }
    let limit_deviation = match alpha {
        Some(alpha) => {
            let law: Vec<f64> = grid
                .iter()
                .map(|&t| p1_survival(t, 1.0, alpha))
                .collect::<Result<_>>()?;
            Some(sup(p1s.last().expect("non-empty"), &law))
        }
        None => None,
    };
    Ok(CollapseMetric {
        max_pairwise,
        limit_deviation,
    })
}

/// Per-`y` collapse of the aligned, symmetric-detector curves over a set of
/// bandwidths.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingEntry {
    pub y: f64,
    pub lambdas: Vec<f64>,
    /// Sup deviation of each `Λ` curve from the limit law, in `lambdas` order.
    pub limit_deviations: Vec<f64>,
    pub collapse: CollapseMetric,
}

pub fn scaling_study(y_values: &[f64], lambdas: &[f64], times: &[f64]) -> Result<Vec<ScalingEntry>> {
    y_values
        .iter()
        .map(|&y| {
            let alpha = alpha_continuous(y)?;
            let series: Vec<Series> = lambdas
                .par_iter()
                .map(|&lambda| {
                    let sys = Fig2Variant::A.system(lambda)?;
                    let det = Fig2Variant::A.detector(lambda, y)?;
                    Ok(Series {
                        label: label(lambda),
                        scheme: Scheme::Continuous,
                        rows: continuous_rows(&DensityMatrix::basis(Level::Dot1), &sys, &det, times)?,
                    })
                })
                .collect::<Result<_>>()?;
            let limit_deviations = series
                .iter()
                .map(|s| Ok(collapse_metric(&[s, s], Some(alpha))?.limit_deviation.unwrap_or(0.0)))
                .collect::<Result<_>>()?;
            let refs: Vec<&Series> = series.iter().collect();
            Ok(ScalingEntry {
                y,
                lambdas: lambdas.to_vec(),
                limit_deviations,
                collapse: collapse_metric(&refs, Some(alpha))?,
            })
        })
        .collect()
}

/// First grid time after `t = 0` at which `a − b` changes sign, if any.
pub fn first_crossing(a: &Series, b: &Series) -> Result<Option<f64>> {
    if a.abscissa() != b.abscissa() {
        return Err(Error::Alignment("crossing needs a shared grid".into()));
    }
    let diffs: Vec<(f64, f64)> = a
        .rows
        .iter()
        .zip(&b.rows)
        .filter(|(r, _)| r.x > 0.0)
        .map(|(r, s)| (r.x, r.p1 - s.p1))
        .collect();
    Ok(diffs
        .windows(2)
        .find(|w| w[0].1 != 0.0 && w[0].1.signum() != w[1].1.signum())
        .map(|w| w[1].0))
}

pub fn default_grid(horizon: f64) -> Vec<f64> {
    uniform_grid(horizon, DEFAULT_GRID_POINTS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn preset_constants() {
        let a = Fig2Variant::A;
        let sys = a.system(5.0).unwrap();
        assert_eq!((sys.e1, sys.e2), (0.0, 0.0));
        let det = a.detector(5.0, 0.1).unwrap();
        assert_eq!((det.gamma_d1, det.gamma_d2), (50.0, 50.0));

        let b = Fig2Variant::B.system(5.0).unwrap();
        assert_eq!((b.e1, b.e2), (0.05, -0.05));
        let det = Fig2Variant::B.detector(5.0, 1.0).unwrap();
        assert_eq!(det.gamma_d1, det.gamma_d2);

        let det = Fig2Variant::C.detector(5.0, 1.0).unwrap();
        let gd: f64 = 5.0;
        assert_abs_diff_eq!(det.gamma_d1, gd * (1.0 + 0.2 * (1.0 / gd).sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(det.gamma_d2, gd * (1.0 - 0.2 * (1.0 / gd).sqrt()), epsilon = 1e-15);
        let d = Fig2Variant::D;
        assert!(d.misaligned() && d.asymmetric());

        assert_eq!(FIG2_Y_VALUES, [1.0, 0.1, 0.01]);
        assert_eq!(ASYMMETRY_DELTA, 0.2);
        assert_eq!(MISALIGNED_LEVELS, (0.05, -0.05));
        assert_eq!(FIG3B_READOUT_TIME, 20.0);
        assert_eq!(DEFAULT_LAMBDA, 5.0);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = fig3b_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[24], 20.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let r0 = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r0).abs() < 1e-12));
    }

    #[test]
    fn parabolic_refinement_recovers_vertex() {
        let xs: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -(x - 0.437f64).powi(2)).collect();
        assert_abs_diff_eq!(refine_peak(&xs, &ys).unwrap(), 0.437, epsilon = 1e-12);
    }

    #[test]
    fn identical_curves_collapse_to_zero() {
        let times = uniform_grid(5.0, 11);
        let rows = analytic_rows(0.5, &times).unwrap();
        let s = Series { label: "x".into(), scheme: Scheme::Analytic, rows };
        let m = collapse_metric(&[&s, &s.clone()], Some(0.5)).unwrap();
        assert_eq!(m.max_pairwise, 0.0);
        assert_eq!(m.limit_deviation, Some(0.0));
    }

    #[test]
    fn collapse_rejects_mismatched_grids() {
        let a = Series { label: "a".into(), scheme: Scheme::Analytic, rows: analytic_rows(0.5, &uniform_grid(5.0, 11)).unwrap() };
        let b = Series { label: "b".into(), scheme: Scheme::Analytic, rows: analytic_rows(0.5, &uniform_grid(5.0, 12)).unwrap() };
        assert!(matches!(collapse_metric(&[&a, &b], None), Err(Error::Alignment(_))));
        assert!(collapse_metric(&[&a], None).is_err());
    }

    #[test]
    fn analytic_rows_sum_below_one() {
        for r in analytic_rows(0.7, &uniform_grid(10.0, 21)).unwrap() {
            assert!(r.p1 + r.p2 <= 1.0 + 1e-15);
            assert!(r.leaked >= -1e-15);
        }
    }

    #[test]
    fn crossing_detection() {
        let t = uniform_grid(4.0, 5);
        let mk = |p: &[f64]| Series {
            label: "s".into(),
            scheme: Scheme::Continuous,
            rows: t.iter().zip(p).map(|(&x, &p1)| Row::from_dots(x, p1, 0.0)).collect(),
        };
        let a = mk(&[1.0, 0.9, 0.8, 0.7, 0.6]);
        let b = mk(&[1.0, 0.8, 0.85, 0.9, 0.9]);
        assert_eq!(first_crossing(&a, &b).unwrap(), Some(2.0));
        assert_eq!(first_crossing(&a, &a.clone()).unwrap(), None);
    }
}
