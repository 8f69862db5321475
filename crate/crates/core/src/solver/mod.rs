//! Method-of-lines solver with blow-up detection.

mod conv;
mod integrate;
mod ops;
mod run;
mod tridiag;

pub use conv::{pow_nonneg, ConvolutionMethod, Convolver, NEG_TOLERANCE};
pub use integrate::advance;
pub use ops::Discretization;
pub use run::{run, run_with};
pub use tridiag::{solve_cyclic, solve_tridiagonal};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Field, Kernel, ModelError, ModelParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("negative value {value} at node {node} under a non-integer power")]
    NegativeValue { node: usize, value: f64 },
    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
    #[error("dt = {dt} exceeds the explicit stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta on the full right-hand side.
    Rk4,
    /// ARS(2,2,2): implicit diffusion, explicit reaction.
    #[default]
    Imex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub dt_initial: f64,
    pub dt_min: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    pub blowup_threshold: f64,
    pub convolution_method: ConvolutionMethod,
    pub integrator: Integrator,
    pub snapshot_stride: usize,
    /// Extra output times; steps are shortened to land on them exactly.
    pub snapshot_times: Vec<f64>,
    /// Fraction of the single-node saturation level `(kappa w_0)^(-1/beta)` at which
    /// a peak counts as collapsed below grid resolution (values above 1 disable the check).
    pub saturation_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt_initial: 1e-4,
            dt_min: 1e-12,
            cfl_safety: 0.9,
            t_end: 1.0,
            blowup_threshold: 1e12,
            convolution_method: ConvolutionMethod::Fft,
            integrator: Integrator::Imex,
            snapshot_stride: 1000,
            snapshot_times: Vec::new(),
            saturation_fraction: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: &str| Err(SolverError::InvalidConfig(msg.to_string()));
        if !(self.dt_initial > 0.0 && self.dt_initial.is_finite()) {
            return bad("dt_initial must be > 0");
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_initial) {
            return bad("need 0 < dt_min <= dt_initial");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be > 0");
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold must be > 0");
        }
        if !(self.saturation_fraction > 0.0) {
            return bad("saturation_fraction must be > 0");
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride must be positive");
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite()) {
            return bad("snapshot_times must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpCause {
    /// `sup |u|` reached the blow-up threshold.
    Threshold,
    /// Halving `dt` could not keep per-step growth of `sup |u|` below a factor 2
    /// (non-finite trial values count as unbounded growth).
    UnresolvedGrowth,
    /// A peak reached the level where a single grid cell's self-competition stops
    /// its growth: the profile has collapsed onto about one cell.
    GridSaturation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    CompletedBounded,
    BlowUpDetected { time: f64, location: f64, cause: BlowUpCause },
    DtUnderflow { time: f64 },
}

impl RunStatus {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, RunStatus::BlowUpDetected { .. })
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, RunStatus::CompletedBounded)
    }
}

/// One accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub t: f64,
    pub sup_u: f64,
    pub inf_u: f64,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Strictly increasing in time; starts with the initial field.
    pub snapshots: Vec<Field>,
    /// Row 0 is the initial state (with `dt = 0`).
    pub history: Vec<HistoryRow>,
    /// Values in `[-1e-10, 0)` set to zero after accepted steps.
    pub clamped_values: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl RunOutcome {
    /// `(t, sup |u|)` per accepted step.
    pub fn max_history(&self) -> Vec<(f64, f64)> {
        self.history.iter().map(|r| (r.t, r.sup_u)).collect()
    }

    /// `(t, inf u)` per accepted step.
    pub fn min_history(&self) -> Vec<(f64, f64)> {
        self.history.iter().map(|r| (r.t, r.inf_u)).collect()
    }

    pub fn final_field(&self) -> &Field {
        self.snapshots.last().expect("outcome always holds the initial field")
    }

    /// The stored snapshot closest to time `t`.
    pub fn snapshot_near(&self, t: f64) -> &Field {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time() - t).abs().total_cmp(&(b.time() - t).abs()))
            .expect("outcome always holds the initial field")
    }
}

/// `J * u^beta` on the grid of `field`, with the Dirichlet exterior tails or periodic wrap.
pub fn convolve(kernel: &Kernel, field: &Field, beta: f64) -> Result<Field, SolverError> {
    convolve_with(kernel, field, beta, ConvolutionMethod::Fft)
}

pub fn convolve_with(
    kernel: &Kernel,
    field: &Field,
    beta: f64,
    method: ConvolutionMethod,
) -> Result<Field, SolverError> {
    let conv = Convolver::new(kernel, field.grid(), method);
    let values = conv.convolve_power(field.values(), beta)?;
    Ok(Field::new(field.grid().clone(), values, field.time())?)
}

/// `D u_xx + mu u^alpha (1 - kappa J * u^beta)` at the nodes of `field`.
pub fn rhs(field: &Field, params: &ModelParams, kernel: &Kernel) -> Result<Field, SolverError> {
    let disc = Discretization::new(field.grid(), params, kernel, ConvolutionMethod::Fft)?;
    let values = disc.rhs(field.values())?;
    Ok(Field::new(field.grid().clone(), values, field.time())?)
}

/// One step of size `config.dt_initial`.
pub fn step(field: &Field, params: &ModelParams, kernel: &Kernel, config: &SolverConfig) -> Result<Field, SolverError> {
    config.validate()?;
    let disc = Discretization::new(field.grid(), params, kernel, config.convolution_method)?;
    let dt = config.dt_initial;
    let values = advance(&disc, config.integrator, config.cfl_safety, field.values(), dt)?;
    Ok(Field::new(field.grid().clone(), values, field.time() + dt)?)
}
