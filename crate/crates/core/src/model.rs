//! Parameter records and the truncated density matrix.
//!
//! Everything is expressed in units where the dot-continuum coupling rate
//! `Γ` is one and `ħ = 1`, so times are in `Γ⁻¹`. The state space kept
//! explicitly is `{|1⟩, |2⟩, |R⟩}` (two dots and the fictitious well) and
//! that index order is used everywhere, including serialized output.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix3c = Matrix3<C64>;

/// Largest tolerated `|ρ − ρ†|` element.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Slack on `trace(ρ) ≤ 1` and on input norms.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a valid state.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Basis states of the truncated space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Dot1,
    Dot2,
    Well,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Dot1, Level::Dot2, Level::Well];

    pub fn index(self) -> usize {
        match self {
            Level::Dot1 => 0,
            Level::Dot2 => 1,
            Level::Well => 2,
        }
    }
}

/// Physical configuration of the double dot and the Lorentzian continuum.
///
/// `lambda` is the bandwidth of the continuum. In the fictitious-well
/// picture the dots couple to the well with `Ω̄_j = √(Γ_j Λ / 2)` and the well
/// leaks into a wide-band reservoir at rate `2Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub e1: f64,
    pub e2: f64,
    pub e_r: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda: f64,
}

impl SystemParams {
    pub fn new(e1: f64, e2: f64, e_r: f64, gamma1: f64, gamma2: f64, lambda: f64) -> Result<Self> {
        let params = SystemParams {
            e1,
            e2,
            e_r,
            gamma1,
            gamma2,
            lambda,
        };
        params.validate()?;
        Ok(params)
    }

    /// Aligned levels at the band centre, `Γ₁ = Γ₂ = 1`.
    pub fn symmetric(lambda: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 0.0, 1.0, 1.0, lambda)
    }

    /// Same configuration with the dot levels moved to `e1`, `e2`.
    pub fn with_levels(self, e1: f64, e2: f64) -> Result<Self> {
        Self::new(e1, e2, self.e_r, self.gamma1, self.gamma2, self.lambda)
    }

    /// Zero couplings are allowed (isolated dots); the bandwidth must be positive.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.e1, self.e2, self.e_r, self.gamma1, self.gamma2, self.lambda]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite system parameter".into()));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "coupling rates must be non-negative (gamma1 = {}, gamma2 = {})",
                self.gamma1, self.gamma2
            )));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "bandwidth must be positive (lambda = {})",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn omega_bar1(&self) -> f64 {
        (self.gamma1 * self.lambda / 2.0).sqrt()
    }

    pub fn omega_bar2(&self) -> f64 {
        (self.gamma2 * self.lambda / 2.0).sqrt()
    }

    /// Hermitian part of the fictitious-well Hamiltonian on `{1, 2, R}`.
    pub fn hamiltonian(&self) -> Matrix3c {
        let (o1, o2) = (self.omega_bar1(), self.omega_bar2());
        Matrix3::new(
            self.e1, 0.0, o1, //
            0.0, self.e2, o2, //
            o1, o2, self.e_r,
        )
        .map(C64::from)
    }
}

/// Dephasing rates induced by the point-contact detector.
///
/// `gamma_d1` and `gamma_d2` are the rates associated with the detector
/// distinguishing the electron in dot 1 (resp. dot 2) from the well.
/// Both zero means the detector is off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub gamma_d1: f64,
    pub gamma_d2: f64,
}

impl DetectorParams {
    pub const OFF: DetectorParams = DetectorParams {
        gamma_d1: 0.0,
        gamma_d2: 0.0,
    };

    pub fn new(gamma_d1: f64, gamma_d2: f64) -> Result<Self> {
        let det = DetectorParams { gamma_d1, gamma_d2 };
        det.validate()?;
        Ok(det)
    }

    /// Detector coupled equally to both dots.
    pub fn symmetric(gamma_d: f64) -> Result<Self> {
        Self::new(gamma_d, gamma_d)
    }

    /// Asymmetric coupling `Γ_d1,2 = Γ_d (1 ± δ √(Γ/Γ_d))` with `Γ = 1`, so
    /// that `√Γ_d1 − √Γ_d2 ≈ δ` independently of `Γ_d`.
    pub fn from_asymmetry(gamma_d: f64, delta: f64) -> Result<Self> {
        if !(gamma_d > 0.0) {
            if gamma_d == 0.0 && delta == 0.0 {
                return Ok(Self::OFF);
            }
            return Err(Error::InvalidParams(format!(
                "mean detector rate must be positive (gamma_d = {gamma_d})"
            )));
        }
        let d = delta * (1.0 / gamma_d).sqrt();
        Self::new(gamma_d * (1.0 + d), gamma_d * (1.0 - d))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.gamma_d1) || !ok(self.gamma_d2) {
            return Err(Error::InvalidParams(format!(
                "detector rates must be finite and non-negative (gamma_d1 = {}, gamma_d2 = {})",
                self.gamma_d1, self.gamma_d2
            )));
        }
        Ok(())
    }

    pub fn is_off(&self) -> bool {
        self.gamma_d1 == 0.0 && self.gamma_d2 == 0.0
    }

    /// Dephasing rate of the dot-dot coherence, `(√Γ_d1 − √Γ_d2)² / 2`.
    pub fn dot_dephasing(&self) -> f64 {
        let diff = self.gamma_d1.sqrt() - self.gamma_d2.sqrt();
        diff * diff / 2.0
    }
}

/// Populations read off a density matrix. `leaked` is the weight already
/// lost to the wide-band reservoir, `1 − trace(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Occupations {
    pub p1: f64,
    pub p2: f64,
    pub pr: f64,
    pub leaked: f64,
}

/// Density matrix on `{|1⟩, |2⟩, |R⟩}`.
///
/// The trace may be below one: the missing weight has leaked into the
/// wide-band reservoir behind the fictitious well.
#[derive(Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    rho: Matrix3c,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity.
    pub fn from_matrix(rho: Matrix3c) -> Result<Self> {
        let dm = DensityMatrix { rho };
        dm.check(POSITIVITY_TOL)?;
        Ok(dm)
    }

    pub(crate) fn from_matrix_unchecked(rho: Matrix3c) -> Self {
        DensityMatrix { rho }
    }

    /// `|level⟩⟨level|`.
    pub fn basis(level: Level) -> Self {
        let mut rho = Matrix3c::zeros();
        rho[(level.index(), level.index())] = C64::new(1.0, 0.0);
        DensityMatrix { rho }
    }

    /// Outer product `v v†` of truncated amplitudes `(b₁, b₂, b_R)`.
    pub fn pure_state(amplitudes: [C64; 3]) -> Result<Self> {
        let v = Vector3::from(amplitudes);
        let norm2 = v.norm_squared();
        if !norm2.is_finite() || norm2 == 0.0 {
            return Err(Error::InvalidState("amplitudes have zero norm".into()));
        }
        if norm2 > 1.0 + TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "amplitude norm^2 = {norm2} exceeds one"
            )));
        }
        Ok(DensityMatrix {
            rho: v * v.adjoint(),
        })
    }

    /// `(|1⟩ − |2⟩)/√2`, decoupled from the well when `E₁ = E₂` and `Γ₁ = Γ₂`.
    pub fn dark_state() -> Self {
        let a = C64::new(FRAC_1_SQRT_2, 0.0);
        Self::pure_state([a, -a, C64::new(0.0, 0.0)]).expect("normalized")
    }

    pub fn matrix(&self) -> &Matrix3c {
        &self.rho
    }

    pub fn get(&self, i: Level, j: Level) -> C64 {
        self.rho[(i.index(), j.index())]
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn population(&self, level: Level) -> f64 {
        self.get(level, level).re
    }

    pub fn occupations(&self) -> Occupations {
        let p1 = self.population(Level::Dot1);
        let p2 = self.population(Level::Dot2);
        let pr = self.population(Level::Well);
        Occupations {
            p1,
            p2,
            pr,
            leaked: 1.0 - (p1 + p2 + pr),
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let h = (self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        let ev = h.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2]];
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_modulus(&(self.rho - self.rho.adjoint()))
    }

    /// Checks the state invariants with the given positivity tolerance.
    pub fn check(&self, positivity_tol: f64) -> Result<()> {
        if self.rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite matrix element".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |rho - rho^dag| = {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(Error::InvalidState(format!("trace {tr} outside [0, 1]")));
        }
        let min_ev = self.eigenvalues()[0];
        if min_ev < -positivity_tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(())
    }

    /// Replace `ρ` with `(ρ + ρ†)/2`.
    pub(crate) fn symmetrized(rho: Matrix3c) -> Self {
        DensityMatrix {
            rho: (rho + rho.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// Express the state in `{|1̃⟩, |2̃⟩, |R⟩}` with
    /// `|1̃⟩ = (|1⟩ − |2⟩)/√2` (dark) and `|2̃⟩ = (|1⟩ + |2⟩)/√2` (bright).
    pub fn to_dark_bright(&self) -> Self {
        let t = dark_bright_rotation();
        DensityMatrix {
            rho: t * self.rho * t.adjoint(),
        }
    }

    /// Inverse of [`to_dark_bright`](Self::to_dark_bright).
    pub fn from_dark_bright(&self) -> Self {
        let t = dark_bright_rotation();
        DensityMatrix {
            rho: t.adjoint() * self.rho * t,
        }
    }

    /// Row-major `(re, im)` pairs.
    pub fn to_pairs(&self) -> [[f64; 2]; 9] {
        let mut out = [[0.0; 2]; 9];
        for i in 0..3 {
            for j in 0..3 {
                let z = self.rho[(i, j)];
                out[3 * i + j] = [z.re, z.im];
            }
        }
        out
    }
}

/// Largest `|z|` over the entries of a complex matrix.
pub fn max_modulus<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, C>>(
    m: &nalgebra::Matrix<C64, R, C, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rows are `⟨1̃|`, `⟨2̃|`, `⟨R|` in the original basis.
fn dark_bright_rotation() -> Matrix3c {
    let s = FRAC_1_SQRT_2;
    Matrix3::new(
        s, -s, 0.0, //
        s, s, 0.0, //
        0.0, 0.0, 1.0,
    )
    .map(C64::from)
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMatrix")
            .field("pairs", &self.to_pairs())
            .finish()
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(9))?;
        for pair in self.to_pairs() {
            seq.serialize_element(&pair)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        if pairs.len() != 9 {
            return Err(serde::de::Error::invalid_length(pairs.len(), &"9 (re, im) pairs"));
        }
        let rho = Matrix3c::from_fn(|i, j| {
            let [re, im] = pairs[3 * i + j];
            C64::new(re, im)
        });
        DensityMatrix::from_matrix(rho).map_err(serde::de::Error::custom)
    }
}
