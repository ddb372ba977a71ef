use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::MeasurementMode;
use crate::model::{DensityMatrix, DetectorParams, Level, SystemParams};

use super::figures::{
    fig3b_grid, Fig2Variant, DEFAULT_GRID_POINTS, DEFAULT_LAMBDA, FIG2_HORIZON, FIG2_Y_VALUES,
    FIG3B_READOUT_TIME, FIG4A_HORIZON, FIG4B_HORIZON, FIG4_LAMBDAS,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3b,
    Fig4a,
    Fig4b,
    Custom,
}

impl Scenario {
    pub const FIGURES: [Scenario; 7] = [
        Scenario::Fig2a,
        Scenario::Fig2b,
        Scenario::Fig2c,
        Scenario::Fig2d,
        Scenario::Fig3b,
        Scenario::Fig4a,
        Scenario::Fig4b,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scenario::Fig2a => "fig2a",
            Scenario::Fig2b => "fig2b",
            Scenario::Fig2c => "fig2c",
            Scenario::Fig2d => "fig2d",
            Scenario::Fig3b => "fig3b",
            Scenario::Fig4a => "fig4a",
            Scenario::Fig4b => "fig4b",
            Scenario::Custom => "custom",
        }
    }

    pub fn fig2_variant(self) -> Option<Fig2Variant> {
        match self {
            Scenario::Fig2a => Some(Fig2Variant::A),
            Scenario::Fig2b => Some(Fig2Variant::B),
            Scenario::Fig2c => Some(Fig2Variant::C),
            Scenario::Fig2d => Some(Fig2Variant::D),
            _ => None,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::FIGURES
            .iter()
            .chain(&[Scenario::Custom])
            .find(|sc| sc.id() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    /// Horizon in `Γ⁻¹`; for `fig3b` this is the readout time `t₀`.
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub tau: f64,
    pub mode: MeasurementMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Dot1,
    Dot2,
    Well,
    Dark,
}

impl InitialState {
    pub fn density_matrix(self) -> DensityMatrix {
        match self {
            InitialState::Dot1 => DensityMatrix::basis(Level::Dot1),
            InitialState::Dot2 => DensityMatrix::basis(Level::Dot2),
            InitialState::Well => DensityMatrix::basis(Level::Well),
            InitialState::Dark => DensityMatrix::dark_state(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

/// Versioned experiment description.
///
/// `sweep` holds the scenario's swept values: `y = Λ/Γ_d` for the `fig2*`
/// and `custom` scenarios, `Γ_d/Λ` for `fig3b`, bandwidths `Λ` for `fig4*`.
/// Figure scenarios take only `system.lambda` from `system`; level
/// alignment and detector asymmetry come from the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub system: SystemParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorParams>,
    /// Detector asymmetry `δ` applied to swept `y` values in `custom`.
    #[serde(default)]
    pub delta: f64,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub sweep: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Parameters of a figure scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let lambda_sys = |s: Result<SystemParams>| s.expect("preset parameters are valid");
        let (system, grid, sweep, initial) = match scenario {
            Scenario::Fig2a | Scenario::Fig2b | Scenario::Fig2c | Scenario::Fig2d => {
                let v = scenario.fig2_variant().expect("fig2 scenario");
                (
                    lambda_sys(v.system(DEFAULT_LAMBDA)),
                    TimeGrid { t_max: FIG2_HORIZON, points: DEFAULT_GRID_POINTS },
                    FIG2_Y_VALUES.to_vec(),
                    InitialState::Dot1,
                )
            }
            Scenario::Fig3b => (
                lambda_sys(SystemParams::symmetric(DEFAULT_LAMBDA)),
                TimeGrid { t_max: FIG3B_READOUT_TIME, points: 1 },
                fig3b_grid(),
                InitialState::Dot1,
            ),
            Scenario::Fig4a => (
                lambda_sys(SystemParams::symmetric(DEFAULT_LAMBDA)),
                TimeGrid { t_max: FIG4A_HORIZON, points: DEFAULT_GRID_POINTS },
                FIG4_LAMBDAS.to_vec(),
                InitialState::Well,
            ),
            Scenario::Fig4b => (
                lambda_sys(SystemParams::symmetric(DEFAULT_LAMBDA)),
                TimeGrid { t_max: FIG4B_HORIZON, points: DEFAULT_GRID_POINTS },
                FIG4_LAMBDAS.to_vec(),
                InitialState::Dot1,
            ),
            Scenario::Custom => (
                lambda_sys(SystemParams::symmetric(DEFAULT_LAMBDA)),
                TimeGrid { t_max: FIG2_HORIZON, points: DEFAULT_GRID_POINTS },
                vec![1.0],
                InitialState::Dot1,
            ),
        };
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            scenario,
            system,
            detector: None,
            delta: 0.0,
            time_grid: grid,
            sweep,
            schedule: None,
            initial,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.system.validate().map_err(cfg_err)?;
        if let Some(det) = &self.detector {
            det.validate().map_err(cfg_err)?;
        }
        if !(self.time_grid.t_max > 0.0) || self.time_grid.points == 0 {
            return Err(Error::Config("time_grid needs t_max > 0 and points >= 1".into()));
        }
        if self.sweep.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Config("sweep values must be positive and finite".into()));
        }
        if let Some(s) = &self.schedule {
            if !(s.tau > 0.0) {
                return Err(Error::Config(format!("schedule.tau must be positive, got {}", s.tau)));
            }
        }
        if !self.delta.is_finite() {
            return Err(Error::Config("delta must be finite".into()));
        }
        Ok(())
    }

    pub fn stem(&self) -> String {
        self.output
            .stem
            .clone()
            .unwrap_or_else(|| self.scenario.id().to_string())
    }
}
