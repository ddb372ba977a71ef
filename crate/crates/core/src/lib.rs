//! Single-electron transfer between two quantum dots through a
//! finite-bandwidth continuum, under continuous point-contact monitoring or
//! frequent projective checks of the continuum.
//!
//! The finite-band continuum is represented exactly by a *fictitious well*
//! `|R⟩` that leaks into a wide-band reservoir at rate `2Λ`. The electron's
//! state then lives in a three-level density matrix over `{|1⟩, |2⟩, |R⟩}`
//! whose trace drops as probability escapes for good. See the guide in
//! `book/` for a walk-through of the physics and the API.
//!
//! ```
//! use zeno_transfer::prelude::*;
//!
//! let sys = SystemParams::symmetric(100.0)?;
//! let det = DetectorParams::symmetric(100.0)?; // y = Λ/Γ_d = 1
//! let traj = evolve(&DensityMatrix::basis(Level::Dot1), &sys, &det, &[0.0, 3.0])?;
//! let limit = p1_survival(3.0, 1.0, alpha_continuous(1.0)?)?;
//! assert!((traj[1].population(Level::Dot1) - limit).abs() < 1e-2);
//! # Ok::<(), zeno_transfer::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analytic;
pub mod continuum;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod measurement;
pub mod model;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analytic::{
        alpha_continuous, alpha_frequent, detector_rate, p1_survival, tau_from_gamma_d, Regime,
    };
    pub use crate::continuum::{build_reservoir, compare_fictitious, schrodinger_evolve, AmplitudeState};
    pub use crate::dynamics::{build_liouvillian, evolve, uniform_grid, Liouvillian};
    pub use crate::error::{Error, Result};
    pub use crate::measurement::{
        measure_branches, run_frequent, step_nonselective, KrausPair, MeasurementMode,
        MeasurementSchedule,
    };
    pub use crate::model::{DensityMatrix, DetectorParams, Level, SystemParams, C64};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/limit-laws.md")]
    mod limit_laws {}
    #[doc = include_str!("../../../book/src/measurements.md")]
    mod measurements {}
    #[doc = include_str!("../../../book/src/continuum-oracle.md")]
    mod continuum_oracle {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
