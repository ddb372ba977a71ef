//! Brute-force check of the fictitious-well construction.
//!
//! The original problem couples both dots to a continuum with Lorentzian
//! spectral density `Ω_jr Ω_j'r ρ(E_r) = Λ² √(Γ_j Γ_j') / (2π[(E_r − E_R)² + Λ²])`.
//! Here that continuum is replaced by `N` discrete modes on a uniform grid of
//! half-width `W` around `E_R` (midpoint sampling) and the closed
//! `(N+2)`-level Schrödinger equation is integrated directly. The result is
//! compared with the three-level fictitious-well evolution.
//!
//! A discretized continuum revives after `2π/dE`, so every horizon is checked
//! against that recurrence time.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{build_liouvillian, uniform_grid};
use crate::error::{Error, Result};
use crate::krylov::LanczosPropagator;
use crate::model::{DensityMatrix, DetectorParams, Level, SystemParams, C64};

/// Largest tolerated drift of the oracle's total probability.
pub const NORM_DRIFT_TOL: f64 = 1e-6;
/// Grid points used by [`compare_fictitious`].
pub const COMPARISON_POINTS: usize = 201;

/// `Γ_j Λ² / (2π[(E − E_R)² + Λ²])`.
pub fn lorentzian_density(gamma_j: f64, lambda: f64, e_r: f64, energy: f64) -> f64 {
    let de = energy - e_r;
    gamma_j * lambda * lambda / (2.0 * PI * (de * de + lambda * lambda))
}

#[derive(Debug, Clone)]
pub struct DiscretizedReservoir {
    pub center: f64,
    pub half_width: f64,
    pub spacing: f64,
    pub energies: Vec<f64>,
    pub omega1: Vec<f64>,
    pub omega2: Vec<f64>,
}

impl DiscretizedReservoir {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Revival time `2π/dE` of the discrete spectrum.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    /// `Σ_r Ω_jr²` for dot `j ∈ {1, 2}`.
    pub fn coupling_sum(&self, dot: usize) -> f64 {
        let om = if dot == 1 { &self.omega1 } else { &self.omega2 };
        om.iter().map(|o| o * o).sum()
    }

    pub fn check_horizon(&self, t_max: f64) -> Result<()> {
        let recurrence = self.recurrence_time();
        if t_max >= recurrence {
            return Err(Error::RecurrenceViolation { t_max, recurrence });
        }
        Ok(())
    }
}

pub fn build_reservoir(sys: &SystemParams, n: usize, half_width: f64) -> Result<DiscretizedReservoir> {
    sys.validate()?;
    if n < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 modes, got {n}")));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::InvalidParams(format!("half-width must be positive, got {half_width}")));
    }
    let spacing = 2.0 * half_width / n as f64;
    let energies: Vec<f64> = (0..n)
        .map(|r| sys.e_r - half_width + spacing * (r as f64 + 0.5))
        .collect();
    let couple = |gamma: f64| -> Vec<f64> {
        energies
            .iter()
            .map(|&e| (spacing * lorentzian_density(gamma, sys.lambda, sys.e_r, e)).sqrt())
            .collect()
    };
    Ok(DiscretizedReservoir {
        center: sys.e_r,
        half_width,
        spacing,
        omega1: couple(sys.gamma1),
        omega2: couple(sys.gamma2),
        energies,
    })
}

/// Amplitudes of the closed problem: both dots plus every reservoir mode.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub b1: C64,
    pub b2: C64,
    pub br: Vec<C64>,
}

impl AmplitudeState {
    /// Electron in the dots, reservoir empty.
    pub fn in_dots(b1: C64, b2: C64, modes: usize) -> Self {
        AmplitudeState {
            b1,
            b2,
            br: vec![C64::new(0.0, 0.0); modes],
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.b1.norm_sqr() + self.b2.norm_sqr() + self.br.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    fn to_flat(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.br.len() + 2);
        v.push(self.b1);
        v.push(self.b2);
        v.extend_from_slice(&self.br);
        v
    }
}

/// Sampled dot populations of the closed evolution.
#[derive(Debug, Clone, Serialize)]
pub struct OracleTrajectory {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub norm: Vec<f64>,
}

/// Integrate `i dψ/dt = Hψ` for the dots coupled to the discrete reservoir.
pub fn schrodinger_evolve(
    psi0: &AmplitudeState,
    sys: &SystemParams,
    res: &DiscretizedReservoir,
    times: &[f64],
) -> Result<OracleTrajectory> {
    crate::dynamics::check_grid(times)?;
    if psi0.br.len() != res.len() {
        return Err(Error::InvalidState(format!(
            "state has {} reservoir amplitudes, reservoir has {} modes",
            psi0.br.len(),
            res.len()
        )));
    }
    let n0 = psi0.norm_squared();
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("initial norm^2 = {n0}, expected 1")));
    }
    res.check_horizon(*times.last().expect("non-empty grid"))?;

    let (e1, e2) = (sys.e1, sys.e2);
    let apply = |x: &[C64], y: &mut [C64]| {
        let (dots, modes) = x.split_at(2);
        let (ydots, ymodes) = y.split_at_mut(2);
        let mut s1 = C64::new(0.0, 0.0);
        let mut s2 = C64::new(0.0, 0.0);
        for (r, ((&xr, yr), &er)) in modes.iter().zip(ymodes.iter_mut()).zip(&res.energies).enumerate() {
            let (o1, o2) = (res.omega1[r], res.omega2[r]);
            *yr = xr * er + dots[0] * o1 + dots[1] * o2;
            s1 += xr * o1;
            s2 += xr * o2;
        }
        ydots[0] = dots[0] * e1 + s1;
        ydots[1] = dots[1] * e2 + s2;
    };

    let propagator = LanczosPropagator::default();
    let mut psi = psi0.to_flat();
    let mut out = OracleTrajectory {
        times: times.to_vec(),
        p1: Vec::with_capacity(times.len()),
        p2: Vec::with_capacity(times.len()),
        norm: Vec::with_capacity(times.len()),
    };
    let mut now = 0.0;
    for &t in times {
        propagator.propagate(apply, &mut psi, t - now)?;
        now = t;
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_DRIFT_TOL {
            return Err(Error::IntegratorFailure {
                time: t,
                drift: norm - 1.0,
            });
        }
        out.p1.push(psi[0].norm_sqr());
        out.p2.push(psi[1].norm_sqr());
        out.norm.push(norm);
    }
    Ok(out)
}

/// Oracle versus fictitious-well populations on a shared grid.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub modes: usize,
    pub half_width: f64,
    pub t_max: f64,
    pub sup_p1: f64,
    pub sup_p2: f64,
    /// Sup deviation of `P₁ + P₂`.
    pub sup_dots: f64,
    #[serde(skip)]
    pub oracle: OracleTrajectory,
    #[serde(skip)]
    pub fictitious: Vec<DensityMatrix>,
}

impl OracleComparison {
    pub fn sup_deviation(&self) -> f64 {
        self.sup_p1
    }
}

/// Sup deviation of `P₁(t)` between the discretized continuum and the
/// fictitious-well model, starting from `|1⟩`.
pub fn compare_fictitious(sys: &SystemParams, n: usize, half_width: f64, t_max: f64) -> Result<OracleComparison> {
    compare_fictitious_from(
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        sys,
        n,
        half_width,
        t_max,
        COMPARISON_POINTS,
    )
}

/// As [`compare_fictitious`] for an arbitrary normalized dot superposition.
pub fn compare_fictitious_from(
    dots: [C64; 2],
    sys: &SystemParams,
    n: usize,
    half_width: f64,
    t_max: f64,
    points: usize,
) -> Result<OracleComparison> {
    if !(t_max > 0.0) || points < 2 {
        return Err(Error::Domain(format!("need t_max > 0 and >= 2 points (t_max = {t_max})")));
    }
    let res = build_reservoir(sys, n, half_width)?;
    res.check_horizon(t_max)?;
    let times = uniform_grid(t_max, points);

    let psi0 = AmplitudeState::in_dots(dots[0], dots[1], n);
    let oracle = schrodinger_evolve(&psi0, sys, &res, &times)?;

    let rho0 = DensityMatrix::pure_state([dots[0], dots[1], C64::new(0.0, 0.0)])?;
    let fictitious = build_liouvillian(sys, &DetectorParams::OFF)?.evolve(&rho0, &times)?;

    let mut sup_p1: f64 = 0.0;
    let mut sup_p2: f64 = 0.0;
    let mut sup_dots: f64 = 0.0;
    for (k, rho) in fictitious.iter().enumerate() {
        let (f1, f2) = (rho.population(Level::Dot1), rho.population(Level::Dot2));
        sup_p1 = sup_p1.max((oracle.p1[k] - f1).abs());
        sup_p2 = sup_p2.max((oracle.p2[k] - f2).abs());
        sup_dots = sup_dots.max((oracle.p1[k] + oracle.p2[k] - f1 - f2).abs());
    }
    Ok(OracleComparison {
        modes: n,
        half_width,
        t_max,
        sup_p1,
        sup_p2,
        sup_dots,
        oracle,
        fictitious,
    })
}
