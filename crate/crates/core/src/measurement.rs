//! Frequent projective checks of the fictitious well.
//!
//! Every `τ` the state evolves freely (detector off) and is then projected
//! onto "electron in the dots" (`M₀ = diag(1,1,0)`) or "electron in the well"
//! (`M_R = diag(0,0,1)`). The non-selective state after a check is
//! `M₀ρM₀† + M_RρM_R†`; it keeps every population and drops the dot-well
//! coherences. The well component is not discarded, so an electron that has
//! been registered in the well can still return to the dots later.
//!
//! Weight already in the wide-band reservoir is not an outcome of the check;
//! it shows up as `1 − trace(ρ)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{build_liouvillian, Liouvillian, Matrix9c};
use crate::error::{Error, Result};
use crate::model::{DensityMatrix, DetectorParams, Matrix3c, SystemParams, C64};

/// Traces at or below this are treated as empty.
pub const EMPTY_TRACE: f64 = 1e-300;

/// The two-outcome projective check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausPair {
    pub m0: Matrix3c,
    pub mr: Matrix3c,
}

impl Default for KrausPair {
    fn default() -> Self {
        Self::new()
    }
}

impl KrausPair {
    pub fn new() -> Self {
        let one = C64::new(1.0, 0.0);
        let mut m0 = Matrix3c::zeros();
        m0[(0, 0)] = one;
        m0[(1, 1)] = one;
        let mut mr = Matrix3c::zeros();
        mr[(2, 2)] = one;
        KrausPair { m0, mr }
    }

    /// POVM element for "in the dots".
    pub fn e0(&self) -> Matrix3c {
        self.m0.adjoint() * self.m0
    }

    /// POVM element for "in the well".
    pub fn er(&self) -> Matrix3c {
        self.mr.adjoint() * self.mr
    }

    /// `M₀ρM₀† + M_RρM_R†`.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let r = rho.matrix();
        DensityMatrix::from_matrix_unchecked(
            self.m0 * r * self.m0.adjoint() + self.mr * r * self.mr.adjoint(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementMode {
    /// Statistical mixture over both outcomes.
    Nonselective,
    /// Keep only the "in the dots" outcome and renormalize each step.
    NullConditioned,
}

impl std::str::FromStr for MeasurementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonselective" | "non-selective" => Ok(MeasurementMode::Nonselective),
            "null" | "null-conditioned" => Ok(MeasurementMode::NullConditioned),
            other => Err(Error::Config(format!("unknown measurement mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSchedule {
    pub tau: f64,
    pub n_steps: usize,
    pub mode: MeasurementMode,
}

impl MeasurementSchedule {
    pub fn new(tau: f64, n_steps: usize, mode: MeasurementMode) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParams(format!("tau must be positive, got {tau}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParams("n_steps must be at least 1".into()));
        }
        Ok(MeasurementSchedule { tau, n_steps, mode })
    }

    /// Enough steps of length `tau` to reach `t_max` (rounded to nearest).
    pub fn covering(tau: f64, t_max: f64, mode: MeasurementMode) -> Result<Self> {
        let n = (t_max / tau).round().max(1.0) as usize;
        Self::new(tau, n, mode)
    }
}

/// Outcome of a single check. A branch with zero probability carries no state.
#[derive(Debug, Clone, PartialEq)]
pub struct Branches {
    pub p0: f64,
    pub rho0: Option<DensityMatrix>,
    pub pr: f64,
    pub rho_r: Option<DensityMatrix>,
}

pub fn measure_branches(rho: &DensityMatrix) -> Result<Branches> {
    if rho.trace() <= EMPTY_TRACE {
        return Err(Error::EmptyState);
    }
    let k = KrausPair::new();
    let r = rho.matrix();
    let p0 = (k.e0() * r).trace().re;
    let pr = (k.er() * r).trace().re;
    let branch = |m: &Matrix3c, p: f64| {
        (p > EMPTY_TRACE).then(|| {
            DensityMatrix::from_matrix_unchecked(m * r * m.adjoint() * C64::from(1.0 / p))
        })
    };
    Ok(Branches {
        p0,
        rho0: branch(&k.m0, p0),
        pr,
        rho_r: branch(&k.mr, pr),
    })
}

/// One free-evolution step by `u` followed by the non-selective check.
pub fn step_nonselective(rho: &DensityMatrix, u: &Matrix9c) -> DensityMatrix {
    KrausPair::new().apply(&Liouvillian::apply(u, rho))
}

/// States at `t = nτ`, `n = 0..=n_steps`, right after each check.
#[derive(Debug, Clone)]
pub struct FrequentRun {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Cumulative probability of an unbroken run of null results; only
    /// present in null-conditioned mode.
    pub null_probability: Option<Vec<f64>>,
}

pub fn run_frequent(
    rho0: &DensityMatrix,
    sys: &SystemParams,
    sched: &MeasurementSchedule,
) -> Result<FrequentRun> {
    let l = build_liouvillian(sys, &DetectorParams::OFF)?;
    run_frequent_with(rho0, &l, sched)
}

/// As [`run_frequent`] with a prebuilt free generator.
pub fn run_frequent_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    sched: &MeasurementSchedule,
) -> Result<FrequentRun> {
    let sched = MeasurementSchedule::new(sched.tau, sched.n_steps, sched.mode)?;
    rho0.check(crate::model::POSITIVITY_TOL)?;
    let u = l.propagator(sched.tau)?;
    let kraus = KrausPair::new();

    let mut times = Vec::with_capacity(sched.n_steps + 1);
    let mut states = Vec::with_capacity(sched.n_steps + 1);
    times.push(0.0);

    let null_probability = match sched.mode {
        MeasurementMode::Nonselective => {
            states.push(*rho0);
            let mut rho = *rho0;
            for n in 1..=sched.n_steps {
                rho = step_nonselective(&rho, &u);
                times.push(n as f64 * sched.tau);
                states.push(rho);
            }
            None
        }
        MeasurementMode::NullConditioned => {
            let tr = rho0.trace();
            if tr <= EMPTY_TRACE {
                return Err(Error::EmptyState);
            }
            let mut rho = DensityMatrix::from_matrix_unchecked(rho0.matrix() * C64::from(1.0 / tr));
            states.push(rho);
            let mut cumulative = vec![1.0];
            let mut survival = 1.0;
            for n in 1..=sched.n_steps {
                let evolved = Liouvillian::apply(&u, &rho);
                let projected = kraus.m0 * evolved.matrix() * kraus.m0.adjoint();
                let p0 = projected.trace().re;
                survival *= p0;
                if !(p0 > EMPTY_TRACE) || !(survival > EMPTY_TRACE) {
                    return Err(Error::SurvivalExtinction { step: n });
                }
                rho = DensityMatrix::symmetrized(projected * C64::from(1.0 / p0));
                times.push(n as f64 * sched.tau);
                states.push(rho);
                cumulative.push(survival);
            }
            Some(cumulative)
        }
    };

    for (t, rho) in times.iter().zip(&states) {
        rho.check(crate::dynamics::TRAJECTORY_POSITIVITY_TOL)
            .map_err(|e| Error::NumericalFailure {
                time: *t,
                reason: e.to_string(),
            })?;
    }

    Ok(FrequentRun {
        times,
        states,
        null_probability,
    })
}

/// Non-selective state at an arbitrary time `t`: `⌊t/τ⌋` evolve-and-check
/// steps, then free evolution over the remainder. A check at `t` itself would
/// leave the populations unchanged.
pub fn frequent_state_at(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    tau: f64,
    t: f64,
) -> Result<DensityMatrix> {
    if !(tau > 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(format!("need tau > 0 and t >= 0 (tau = {tau}, t = {t})")));
    }
    // Guard against t/τ landing a hair below an integer.
    let n = (t / tau * (1.0 + 1e-12)).floor() as usize;
    let remainder = (t - n as f64 * tau).max(0.0);
    let mut rho = *rho0;
    if n > 0 {
        let u = l.propagator(tau)?;
        for _ in 0..n {
            rho = step_nonselective(&rho, &u);
        }
    }
    if remainder > 0.0 {
        rho = Liouvillian::apply(&l.propagator(remainder)?, &rho);
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{alpha_frequent, p1_survival};
    use crate::model::{max_modulus, Level};
    use approx::assert_abs_diff_eq;

    #[test]
    fn kraus_completeness_and_projectors() {
        let k = KrausPair::new();
        assert_eq!(k.e0() + k.er(), Matrix3c::identity());
        for m in [k.m0, k.mr] {
            assert_eq!(m * m, m);
            assert_eq!(m.adjoint(), m);
        }
    }

    #[test]
    fn branches_of_basis_states() {
        let b = measure_branches(&DensityMatrix::basis(Level::Dot1)).unwrap();
        assert_eq!((b.p0, b.pr), (1.0, 0.0));
        assert_eq!(b.rho0, Some(DensityMatrix::basis(Level::Dot1)));
        assert!(b.rho_r.is_none());

        let b = measure_branches(&DensityMatrix::basis(Level::Well)).unwrap();
        assert_eq!((b.p0, b.pr), (0.0, 1.0));
        assert_eq!(b.rho_r, Some(DensityMatrix::basis(Level::Well)));
        assert!(b.rho0.is_none());
    }

    #[test]
    fn branches_of_leaky_mixture() {
        let mut m = Matrix3c::zeros();
        m[(0, 0)] = C64::from(0.3);
        m[(1, 1)] = C64::from(0.2);
        m[(2, 2)] = C64::from(0.4);
        let rho = DensityMatrix::from_matrix(m).unwrap();
        let b = measure_branches(&rho).unwrap();
        assert_abs_diff_eq!(b.p0, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.pr, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(b.p0 + b.pr, rho.trace(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.rho0.unwrap().trace(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_state_is_an_error() {
        let rho = DensityMatrix::from_matrix(Matrix3c::zeros()).unwrap();
        assert!(matches!(measure_branches(&rho), Err(Error::EmptyState)));
    }

    #[test]
    fn decoupled_step_is_identity() {
        let sys = SystemParams::new(0.0, 0.0, 0.0, 0.0, 0.0, 5.0).unwrap();
        let l = build_liouvillian(&sys, &DetectorParams::OFF).unwrap();
        let u = l.propagator(0.7).unwrap();
        let rho = DensityMatrix::basis(Level::Dot1);
        assert_eq!(step_nonselective(&rho, &u), rho);
    }

    #[test]
    fn check_is_idempotent() {
        let k = KrausPair::new();
        let rho = DensityMatrix::pure_state([C64::from(0.6), C64::new(0.0, 0.48), C64::from(0.64)])
            .unwrap();
        let once = k.apply(&rho);
        assert_eq!(k.apply(&once), once);
        assert_eq!(once.get(Level::Dot1, Level::Well), C64::from(0.0));
    }

    #[test]
    fn nonselective_step_is_branch_mixture() {
        let sys = SystemParams::symmetric(5.0).unwrap();
        let l = build_liouvillian(&sys, &DetectorParams::OFF).unwrap();
        let u = l.propagator(0.2).unwrap();
        let rho = DensityMatrix::basis(Level::Dot1);
        let stepped = step_nonselective(&rho, &u);

        let evolved = Liouvillian::apply(&u, &rho);
        let b = measure_branches(&evolved).unwrap();
        let mixture = b.rho0.unwrap().matrix() * C64::from(b.p0)
            + b.rho_r.unwrap().matrix() * C64::from(b.pr);
        assert!(max_modulus(&(stepped.matrix() - mixture)) < 1e-15);
        assert!(stepped.trace() <= rho.trace());
        assert_eq!(stepped.get(Level::Dot1, Level::Well), C64::from(0.0));
        assert_eq!(stepped.get(Level::Dot2, Level::Well), C64::from(0.0));
    }

    #[test]
    fn frequent_law_at_wide_band() {
        let lambda = 100.0;
        let sys = SystemParams::symmetric(lambda).unwrap();
        for &x in &[0.1, 1.0, 5.0] {
            let tau = x / lambda;
            let sched = MeasurementSchedule::covering(tau, 20.0, MeasurementMode::Nonselective).unwrap();
            let run = run_frequent(&DensityMatrix::basis(Level::Dot1), &sys, &sched).unwrap();
            let alpha = alpha_frequent(x).unwrap();
            let sup = run
                .times
                .iter()
                .zip(&run.states)
                .map(|(&t, rho)| (rho.population(Level::Dot1) - p1_survival(t, 1.0, alpha).unwrap()).abs())
                .fold(0.0, f64::max);
            assert!(sup <= 2e-2, "x = {x}: sup = {sup}");
        }
    }

    #[test]
    fn zeno_limit_freezes_decay() {
        let sys = SystemParams::symmetric(5.0).unwrap();
        let sched = MeasurementSchedule::new(1e-4, 50_000, MeasurementMode::Nonselective).unwrap();
        let run = run_frequent(&DensityMatrix::basis(Level::Dot1), &sys, &sched).unwrap();
        let worst = run
            .states
            .iter()
            .map(|r| (1.0 - r.population(Level::Dot1)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "worst deviation {worst}");
    }

    #[test]
    fn modes_agree_when_well_never_populated() {
        let sys = SystemParams::new(0.0, 0.0, 0.0, 0.0, 0.0, 5.0).unwrap();
        let rho0 = DensityMatrix::basis(Level::Dot1);
        let ns = run_frequent(&rho0, &sys, &MeasurementSchedule::new(0.1, 30, MeasurementMode::Nonselective).unwrap()).unwrap();
        let nc = run_frequent(&rho0, &sys, &MeasurementSchedule::new(0.1, 30, MeasurementMode::NullConditioned).unwrap()).unwrap();
        assert_eq!(ns.states, nc.states);
        assert!(nc.null_probability.unwrap().iter().all(|&p| p == 1.0));
        assert!(ns.null_probability.is_none());
    }

    #[test]
    fn null_conditioned_renormalizes() {
        let sys = SystemParams::symmetric(5.0).unwrap().with_levels(0.05, -0.05).unwrap();
        let sched = MeasurementSchedule::new(0.2, 40, MeasurementMode::NullConditioned).unwrap();
        let run = run_frequent(&DensityMatrix::basis(Level::Dot1), &sys, &sched).unwrap();
        let probs = run.null_probability.unwrap();
        assert_eq!(probs.len(), 41);
        assert!(probs.windows(2).all(|w| w[1] <= w[0]));
        for rho in &run.states {
            assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn null_conditioned_extinction() {
        let sys = SystemParams::symmetric(5.0).unwrap();
        // Starting in the well, the first null result has vanishing weight only
        // when the dots are unreachable; force it with zero couplings.
        let sys0 = SystemParams { gamma1: 0.0, gamma2: 0.0, ..sys };
        let sched = MeasurementSchedule::new(0.1, 3, MeasurementMode::NullConditioned).unwrap();
        let err = run_frequent(&DensityMatrix::basis(Level::Well), &sys0, &sched).unwrap_err();
        assert!(matches!(err, Error::SurvivalExtinction { step: 1 }));
    }

    #[test]
    fn nonselective_trace_never_increases() {
        let sys = SystemParams::symmetric(5.0).unwrap();
        let sched = MeasurementSchedule::new(0.3, 60, MeasurementMode::Nonselective).unwrap();
        let run = run_frequent(&DensityMatrix::basis(Level::Well), &sys, &sched).unwrap();
        assert!(run.states.windows(2).all(|w| w[1].trace() <= w[0].trace() + 1e-15));
    }

    #[test]
    fn state_at_multiple_of_tau_matches_run() {
        let sys = SystemParams::symmetric(5.0).unwrap();
        let l = build_liouvillian(&sys, &DetectorParams::OFF).unwrap();
        let rho0 = DensityMatrix::basis(Level::Dot1);
        let sched = MeasurementSchedule::new(0.25, 8, MeasurementMode::Nonselective).unwrap();
        let run = run_frequent_with(&rho0, &l, &sched).unwrap();
        let at = frequent_state_at(&rho0, &l, 0.25, 2.0).unwrap();
        assert!(max_modulus(&(at.matrix() - run.states[8].matrix())) < 1e-14);
    }

    #[test]
    fn schedule_validation() {
        assert!(MeasurementSchedule::new(0.0, 3, MeasurementMode::Nonselective).is_err());
        assert!(MeasurementSchedule::new(0.1, 0, MeasurementMode::Nonselective).is_err());
        assert_eq!("null".parse::<MeasurementMode>().unwrap(), MeasurementMode::NullConditioned);
        assert!("weak".parse::<MeasurementMode>().is_err());
    }
}
