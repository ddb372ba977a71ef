//! Linear generator of the truncated density-matrix dynamics and its exact
//! propagation.
//!
//! The free dynamics on `{|1⟩, |2⟩, |R⟩}` is a pure-state evolution under the
//! non-Hermitian Hamiltonian `H_eff = H − iΛ|R⟩⟨R|`: the well leaks into the
//! wide-band reservoir and nothing returns from there. The point-contact
//! detector adds pure dephasing of every coherence:
//!
//! * `ρ₁₂` at `(√Γ_d1 − √Γ_d2)² / 2`,
//! * `ρ₁R` at `Γ_d1 / 2` and `ρ₂R` at `Γ_d2 / 2`,
//!
//! with the conjugate elements damped at the same rates. Populations are
//! untouched by the detector, so `d trace(ρ)/dt = −2Λ ρ_RR` always.
//!
//! Density matrices are vectorized row-major: `vec(ρ)[3i + j] = ρ_ij`.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::model::{DensityMatrix, DetectorParams, Matrix3c, SystemParams, C64};

pub type Matrix9c = SMatrix<C64, 9, 9>;
pub type Vector9c = SVector<C64, 9>;

/// Positivity slack accepted along propagated trajectories.
pub const TRAJECTORY_POSITIVITY_TOL: f64 = 1e-8;

pub fn vectorize(rho: &Matrix3c) -> Vector9c {
    Vector9c::from_fn(|k, _| rho[(k / 3, k % 3)])
}

pub fn unvectorize(v: &Vector9c) -> Matrix3c {
    Matrix3c::from_fn(|i, j| v[3 * i + j])
}

/// Generator `L` with `d vec(ρ)/dt = L vec(ρ)`.
pub struct Liouvillian {
    sys: SystemParams,
    det: DetectorParams,
    generator: Matrix9c,
    cache: Mutex<HashMap<u64, Matrix9c>>,
}

impl Clone for Liouvillian {
    fn clone(&self) -> Self {
        Liouvillian {
            sys: self.sys,
            det: self.det,
            generator: self.generator,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for Liouvillian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Liouvillian")
            .field("sys", &self.sys)
            .field("det", &self.det)
            .finish_non_exhaustive()
    }
}

pub fn build_liouvillian(sys: &SystemParams, det: &DetectorParams) -> Result<Liouvillian> {
    sys.validate()?;
    det.validate()?;

    let mut h_eff = sys.hamiltonian();
    h_eff[(2, 2)] -= C64::new(0.0, sys.lambda);

    // vec(Hρ) = (H ⊗ I) vec(ρ),  vec(ρH†) = (I ⊗ H̄) vec(ρ)  (row-major)
    let mut generator = Matrix9c::zeros();
    let minus_i = C64::new(0.0, -1.0);
    for i in 0..3 {
        for j in 0..3 {
            let row = 3 * i + j;
            for k in 0..3 {
                generator[(row, 3 * k + j)] += minus_i * h_eff[(i, k)];
                generator[(row, 3 * i + k)] -= minus_i * h_eff[(j, k)].conj();
            }
        }
    }

    let dephasing = dephasing_rates(det);
    for i in 0..3 {
        for j in 0..3 {
            generator[(3 * i + j, 3 * i + j)] -= C64::from(dephasing[i][j]);
        }
    }

    Ok(Liouvillian {
        sys: *sys,
        det: *det,
        generator,
        cache: Mutex::new(HashMap::new()),
    })
}

fn dephasing_rates(det: &DetectorParams) -> [[f64; 3]; 3] {
    let d12 = det.dot_dephasing();
    let d1r = det.gamma_d1 / 2.0;
    let d2r = det.gamma_d2 / 2.0;
    [[0.0, d12, d1r], [d12, 0.0, d2r], [d1r, d2r, 0.0]]
}

impl Liouvillian {
    pub fn system(&self) -> &SystemParams {
        &self.sys
    }

    pub fn detector(&self) -> &DetectorParams {
        &self.det
    }

    pub fn generator(&self) -> &Matrix9c {
        &self.generator
    }

    /// Instantaneous `dρ/dt`.
    pub fn rhs(&self, rho: &Matrix3c) -> Matrix3c {
        unvectorize(&(self.generator * vectorize(rho)))
    }

    /// `exp(L·dt)`, memoized per step size.
    pub fn propagator(&self, dt: f64) -> Result<Matrix9c> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("propagation step must be >= 0 (dt = {dt})")));
        }
        let key = dt.to_bits();
        if let Some(u) = self.cache.lock().expect("propagator cache poisoned").get(&key) {
            return Ok(*u);
        }
        let u = self.exponential(dt);
        self.cache
            .lock()
            .expect("propagator cache poisoned")
            .insert(key, u);
        Ok(u)
    }

    fn exponential(&self, dt: f64) -> Matrix9c {
        if dt == 0.0 {
            return Matrix9c::identity();
        }
        (self.generator * C64::from(dt)).exp()
    }

    /// Apply a superoperator (e.g. a cached propagator) to `ρ` and symmetrize.
    pub fn apply(u: &Matrix9c, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::symmetrized(unvectorize(&(u * vectorize(rho.matrix()))))
    }

    /// `ρ(t_k) = exp(L t_k) ρ₀` on an ascending grid, each point computed
    /// directly from `ρ₀`.
    pub fn evolve(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
        check_grid(times)?;
        let v0 = vectorize(rho0.matrix());
        times
            .iter()
            .map(|&t| {
                let u = self.exponential(t);
                let rho = DensityMatrix::symmetrized(unvectorize(&(u * v0)));
                rho.check(TRAJECTORY_POSITIVITY_TOL)
                    .map_err(|e| Error::NumericalFailure {
                        time: t,
                        reason: e.to_string(),
                    })?;
                Ok(rho)
            })
            .collect()
    }
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::Domain("empty time grid".into())),
        Some(&t0) if !(t0 >= 0.0) => {
            return Err(Error::Domain(format!("time grid starts at {t0} < 0")))
        }
        _ => {}
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("non-finite time in grid".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("time grid is not strictly ascending".into()));
    }
    Ok(())
}

/// Convenience wrapper: build the generator and evolve in one go.
pub fn evolve(
    rho0: &DensityMatrix,
    sys: &SystemParams,
    det: &DetectorParams,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    build_liouvillian(sys, det)?.evolve(rho0, times)
}

/// `n` uniform points from 0 to `t_max` inclusive.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}
