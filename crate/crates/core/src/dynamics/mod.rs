//! Oscillator dynamics: the full position-dependent Volterra equations, the
//! localized linear equations, normal modes, the Laplace-domain responses,
//! the Ohmic delay equations and the weak-coupling series.

mod dde;
mod response;
mod volterra;
mod weak;

pub use dde::integrate_ohmic_dde;
pub use response::{laplace_kernel, response_eta_xi, response_table, solve_modes_laplace, ModeSign, ResponsePoint, ResponseTable};
pub use volterra::{integrate_full, integrate_localized, integrate_modes, single_gle};
pub use weak::{greens_derivatives, greens_function, weak_coupling_solution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    VolterraFull,
    Localized,
    ModesLaplace,
    OhmicDde,
    WeakCoupling,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::VolterraFull => "volterra_full",
            Method::Localized => "localized",
            Method::ModesLaplace => "modes_laplace",
            Method::OhmicDde => "ohmic_dde",
            Method::WeakCoupling => "weak_coupling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MassConvention {
    /// `M = 1` throughout.
    #[default]
    UnitMass,
    /// Divide the noise and the induced force by `M` (full equations only).
    ExplicitM,
}

/// Velocity history on `[-τ₀, 0)` for the delay equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum History {
    /// Oscillators sat at their initial positions: zero velocity before `t = 0`.
    #[default]
    AtRest,
    /// Oscillators moved uniformly with their initial velocities.
    Uniform,
}

impl History {
    pub fn tag(&self) -> &'static str {
        match self {
            History::AtRest => "at_rest",
            History::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    #[serde(default)]
    pub x1: f64,
    #[serde(default)]
    pub v1: f64,
    #[serde(default)]
    pub x2: f64,
    #[serde(default)]
    pub v2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub h: f64,
    pub t_end: f64,
    pub method: Method,
    #[serde(default)]
    pub initial: InitialConditions,
    /// Re-evaluate the noise phases at the instantaneous positions (full equations).
    #[serde(default)]
    pub dynamic_noise_phase: bool,
    #[serde(default)]
    pub mass_convention: MassConvention,
    #[serde(default)]
    pub history: History,
    /// Memory window in time units; `None` keeps the whole history.
    #[serde(default)]
    pub memory_window: Option<f64>,
    /// Contour nodes for the inverse Laplace transform.
    #[serde(default = "default_laplace_nodes")]
    pub laplace_nodes: usize,
    /// Corrector sweeps per step of the full equations.
    #[serde(default = "default_corrector_sweeps")]
    pub corrector_sweeps: usize,
}

fn default_laplace_nodes() -> usize {
    32
}

fn default_corrector_sweeps() -> usize {
    2
}

/// Steps above which the full memory sum needs an explicit window.
pub const FULL_HISTORY_STEPS: usize = 10_000;

impl SolverConfig {
    pub fn new(h: f64, t_end: f64, method: Method) -> Self {
        Self {
            h,
            t_end,
            method,
            initial: InitialConditions::default(),
            dynamic_noise_phase: false,
            mass_convention: MassConvention::UnitMass,
            history: History::AtRest,
            memory_window: None,
            laplace_nodes: default_laplace_nodes(),
            corrector_sweeps: default_corrector_sweeps(),
        }
    }

    pub fn with_initial(mut self, initial: InitialConditions) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::SolverConfig(format!("time step must be positive, got {}", self.h)));
        }
        if !(self.t_end >= self.h) {
            return Err(Error::SolverConfig(format!("t_end = {} must be at least h = {}", self.t_end, self.h)));
        }
        if let Some(w) = self.memory_window {
            if !(w > 0.0) {
                return Err(Error::SolverConfig(format!("memory window must be positive, got {w}")));
            }
        }
        if self.laplace_nodes < 8 {
            return Err(Error::SolverConfig("at least 8 contour nodes are needed".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        self.validate()?;
        TimeGrid::covering(self.h, self.t_end)
    }
}

/// Where a trajectory came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub solver: String,
    pub seed: Option<u64>,
    pub realization: Option<u64>,
    pub config_hash: Option<String>,
    pub history: Option<String>,
    /// Largest inverse-Laplace refinement discrepancy, for Laplace-based solutions.
    pub inversion_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub r: Option<Vec<f64>>,
    pub z: Option<Vec<f64>>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub provenance: Provenance,
}

impl Trajectory {
    /// `R = (x₁ + x₂)/2` and `Z = x₂ - x₁`, computed when absent.
    pub fn modes(&self) -> (Vec<f64>, Vec<f64>) {
        match (&self.r, &self.z) {
            (Some(r), Some(z)) => (r.clone(), z.clone()),
            _ => self.x1.iter().zip(&self.x2).map(|(a, b)| (0.5 * (a + b), b - a)).unzip(),
        }
    }

    pub fn mode_velocities(&self) -> (Vec<f64>, Vec<f64>) {
        self.v1.iter().zip(&self.v2).map(|(a, b)| (0.5 * (a + b), b - a)).unzip()
    }

    pub fn check_finite(&self) -> Result<()> {
        let all = self.x1.iter().chain(&self.x2).chain(&self.v1).chain(&self.v2);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Instability(format!("{}: non-finite state", self.provenance.solver)));
        }
        Ok(())
    }

    /// Largest `|a - b|` over the positions of two trajectories on the same grid.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        let n = self.x1.len().min(other.x1.len());
        (0..n).map(|i| (self.x1[i] - other.x1[i]).abs().max((self.x2[i] - other.x2[i]).abs())).fold(0.0, f64::max)
    }
}

/// Mode noises on a grid, the driving terms of the normal-mode equations.
pub(crate) fn check_series_len(grid: &TimeGrid, what: &str, len: usize) -> Result<()> {
    if len < grid.n {
        return Err(Error::GridMismatch(format!("{what} has {len} samples, the solver grid needs {}", grid.n)));
    }
    Ok(())
}
