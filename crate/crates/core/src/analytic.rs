//! Closed-form results valid in the scaling limit `Λ → ∞` at fixed scaling
//! variable, for aligned levels and symmetric couplings.
//!
//! Under continuous monitoring the survival probability of dot 1 is
//! `P₁(t) = ¼ (e^{−αΓt} + 1)²` with `α = 2y/(1 + 2y)`, `y = Λ/Γ_d`. Under
//! projective checks every `τ` the same law holds with
//! `α′ = 1 − (1 − e^{−x})/x`, `x = Λτ`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Which identification between `τ` and `Γ_d⁻¹` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `x < 2`: `τ = 4/Γ_d`.
    SmallX,
    /// `x > 5`: `τ = 2/Γ_d`.
    LargeX,
}

pub const SMALL_X_MAX: f64 = 2.0;
pub const LARGE_X_MIN: f64 = 5.0;

impl Regime {
    /// Classify `x = Λτ`. Between the two thresholds neither identification
    /// is preferred and `None` is returned.
    pub fn classify(x: f64) -> Option<Regime> {
        if x < SMALL_X_MAX {
            Some(Regime::SmallX)
        } else if x > LARGE_X_MIN {
            Some(Regime::LargeX)
        } else {
            None
        }
    }
}

/// A point in the scaling plane: `y = Λ/Γ_d`, `x = Λτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub y: f64,
    pub x: f64,
    pub tau: f64,
    pub regime: Option<Regime>,
}

impl ScalingPoint {
    /// Scaling variables for bandwidth `lambda` and detector rate `gamma_d`,
    /// with `τ` taken from the identification of `regime`.
    pub fn from_detector(lambda: f64, gamma_d: f64, regime: Regime) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        let tau = tau_from_gamma_d(gamma_d, regime)?;
        let x = lambda * tau;
        Ok(ScalingPoint {
            y: lambda / gamma_d,
            x,
            tau,
            regime: Regime::classify(x),
        })
    }
}

/// `α(y) = 2y / (1 + 2y)`.
pub fn alpha_continuous(y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("y must be non-negative, got {y}")));
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    Ok(2.0 * y / (1.0 + 2.0 * y))
}

/// `α′(x) = 1 − (1 − e^{−x})/x`, continued to 0 at `x = 0`.
pub fn alpha_frequent(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    // 1 − (1 − e^{−x})/x = (x − 1 + e^{−x})/x; expm1 keeps small x accurate.
    Ok((x + (-x).exp_m1()) / x)
}

/// `P₁(t) = ¼ (e^{−αΓt} + 1)²`.
pub fn p1_survival(t: f64, gamma: f64, alpha: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be non-negative, got {t}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let e = (-alpha * gamma * t).exp();
    Ok(0.25 * (e + 1.0) * (e + 1.0))
}

/// Measurement rate of a point contact: `Γ_d = V_d (√T − √T′)² / 2π`.
pub fn detector_rate(vd: f64, t: f64, t_prime: f64) -> Result<f64> {
    for (name, v) in [("Vd", vd), ("T", t), ("T'", t_prime)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite and non-negative, got {v}")));
        }
    }
    let diff = t.sqrt() - t_prime.sqrt();
    Ok(vd * diff * diff / (2.0 * PI))
}

/// Measurement interval matched to a detector rate: `4/Γ_d` for small `x`,
/// `2/Γ_d` for large `x`.
pub fn tau_from_gamma_d(gamma_d: f64, regime: Regime) -> Result<f64> {
    if !(gamma_d > 0.0) || !gamma_d.is_finite() {
        return Err(Error::Domain(format!("gamma_d must be positive, got {gamma_d}")));
    }
    Ok(match regime {
        Regime::SmallX => 4.0 / gamma_d,
        Regime::LargeX => 2.0 / gamma_d,
    })
}

/// Both identifications at once, tagged; the caller decides between them.
pub fn tau_candidates(gamma_d: f64) -> Result<[(Regime, f64); 2]> {
    Ok([
        (Regime::SmallX, tau_from_gamma_d(gamma_d, Regime::SmallX)?),
        (Regime::LargeX, tau_from_gamma_d(gamma_d, Regime::LargeX)?),
    ])
}
