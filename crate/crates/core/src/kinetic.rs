//! Two-speed kinetic model and its parabolic limit.
//!
//! Densities `p+`, `p-` move with velocities `+s`, `-s` and relax towards the isotropic state
//! `M = 1/2`:
//!
//! `p+-_t = -+ (s/eps) p+-_x + L+-/eps^2 + I+-`, `L+- = (p-+ - p+-)/2`,
//! `I+- = mu [ (p+-)^alpha / 2^(1-alpha) - kappa (p+-)^alpha J*(p+-)^beta / 2^(1-alpha-beta) ]`.
//!
//! As `eps -> 0` the density `u = p+ + p-` solves
//! `u_t = s^2 u_xx + mu u^alpha (1 - kappa J*u^beta)`; `kappa` plays the role of the kinetic
//! competition constant after nondimensionalization, and `mu` scales the interaction term.
//!
//! The scheme evolves `u` at the nodes and the flux `j = p+ - p-` at the cell faces. The flux
//! relaxes exactly, `j <- e^{-dt/eps^2} j + eps^2 (1 - e^{-dt/eps^2}) f`, towards the frozen
//! forcing `f = -(s/eps) u_x + (I+ - I-)`, and then `u <- u + dt (-(s/eps) j_x + I+ + I-)`.
//! For small `eps` this reduces to the explicit three-point heat scheme with diffusion `s^2`,
//! so the grid does not need to resolve `eps`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Field, Grid1D, Kernel, ModelError, ModelParams};
use crate::solver::{run, ConvolutionMethod, Convolver, RunStatus, SolverConfig, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("dt = {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("invalid input {name} = {value}: {reason}")]
    InvalidInput {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("parabolic reference run ended early: {0:?}")]
    ReferenceFailed(RunStatus),
}

/// `s^2 / N`, the second moment of the uniform velocity distribution on `s S^{N-1}`.
pub fn diffusion_coefficient(speed: f64, n: u32) -> f64 {
    speed * speed / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    grid: Grid1D,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub eps: f64,
    pub speed: f64,
    pub time: f64,
    /// `p+ - p-` at face `i + 1/2`.
    flux: Vec<f64>,
}

impl KineticState {
    /// Periodic grids only; face fluxes start as the average of the nodal values.
    pub fn new(grid: Grid1D, p_plus: Vec<f64>, p_minus: Vec<f64>, eps: f64, speed: f64) -> Result<Self, KineticError> {
        if !grid.is_periodic() {
            return Err(KineticError::InvalidInput {
                name: "grid",
                value: 0.0,
                reason: "the kinetic model runs on periodic grids",
            });
        }
        let n = grid.node_count();
        if p_plus.len() != n || p_minus.len() != n {
            return Err(KineticError::InvalidInput {
                name: "p",
                value: p_plus.len().min(p_minus.len()) as f64,
                reason: "arrays must have one value per node",
            });
        }
        for (name, v) in [("eps", eps), ("speed", speed)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(KineticError::InvalidInput {
                    name,
                    value: v,
                    reason: "must be > 0",
                });
            }
        }
        if let Some(v) = p_plus.iter().chain(&p_minus).find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(KineticError::InvalidInput {
                name: "p",
                value: *v,
                reason: "densities must be finite and nonnegative",
            });
        }
        let flux = (0..n)
            .map(|i| {
                let k = (i + 1) % n;
                0.5 * ((p_plus[i] - p_minus[i]) + (p_plus[k] - p_minus[k]))
            })
            .collect();
        Ok(Self {
            grid,
            p_plus,
            p_minus,
            eps,
            speed,
            time: 0.0,
            flux,
        })
    }

    /// Isotropic split `p+ = p- = u/2`.
    pub fn isotropic(u: &Field, eps: f64, speed: f64) -> Result<Self, KineticError> {
        let half: Vec<f64> = u.values().iter().map(|v| 0.5 * v).collect();
        let mut s = Self::new(u.grid().clone(), half.clone(), half, eps, speed)?;
        s.time = u.time();
        Ok(s)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// `u = p+ + p-`.
    pub fn density(&self) -> Field {
        let u = self.p_plus.iter().zip(&self.p_minus).map(|(a, b)| a + b).collect();
        Field::new(self.grid.clone(), u, self.time).expect("densities stay finite")
    }

    /// `L+- = (p-+ - p+-)/2`; the two components cancel exactly.
    pub fn turning_operator(&self) -> (Vec<f64>, Vec<f64>) {
        turning(&self.p_plus, &self.p_minus)
    }
}

fn turning(p: &[f64], m: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let plus = p.iter().zip(m).map(|(a, b)| 0.5 * (b - a)).collect();
    let minus = p.iter().zip(m).map(|(a, b)| 0.5 * (a - b)).collect();
    (plus, minus)
}

/// See [`KineticState::turning_operator`].
pub fn turning_operator(state: &KineticState) -> (Vec<f64>, Vec<f64>) {
    state.turning_operator()
}

fn interaction(
    conv: &Convolver,
    p: &[f64],
    params: &ModelParams,
) -> Result<Vec<f64>, SolverError> {
    let (a, b) = (params.alpha, params.beta);
    let growth = 2f64.powf(a - 1.0);
    let competition = params.kappa * 2f64.powf(a + b - 1.0);
    let c = conv.convolve_power(p, b)?;
    p.iter()
        .enumerate()
        .map(|(i, &v)| {
            let pa = crate::solver::pow_nonneg(v, a, i)?;
            Ok(params.mu * (pa * growth - competition * pa * c[i]))
        })
        .collect()
}

/// `(I+, I-)` at the nodes.
pub fn interaction_operator(
    state: &KineticState,
    params: &ModelParams,
    kernel: &Kernel,
) -> Result<(Vec<f64>, Vec<f64>), KineticError> {
    params.validate()?;
    let conv = Convolver::new(kernel, &state.grid, ConvolutionMethod::Fft);
    Ok((
        interaction(&conv, &state.p_plus, params)?,
        interaction(&conv, &state.p_minus, params)?,
    ))
}

/// Which operators are active; both on for the model proper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operators {
    pub relaxation: bool,
    pub interaction: bool,
}

impl Default for Operators {
    fn default() -> Self {
        Self {
            relaxation: true,
            interaction: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KineticConfig {
    pub cfl: f64,
    pub t_end: f64,
    /// Keep every `snapshot_stride`-th state (the final state is always kept).
    pub snapshot_stride: usize,
    pub operators: Operators,
}

impl Default for KineticConfig {
    fn default() -> Self {
        Self {
            cfl: 0.9,
            t_end: 1.0,
            snapshot_stride: usize::MAX,
            operators: Operators::default(),
        }
    }
}

/// Largest stable step: `min(eps h / s, h^2 / (2 s^2))`, the transport and parabolic limits.
pub fn stable_dt(state: &KineticState) -> f64 {
    let h = state.grid.spacing();
    let s = state.speed;
    (state.eps * h / s).min(h * h / (2.0 * s * s))
}

/// Reusable stepping context for one grid.
pub struct KineticStepper {
    conv: Convolver,
    params: ModelParams,
    operators: Operators,
}

impl KineticStepper {
    pub fn new(grid: &Grid1D, params: &ModelParams, kernel: &Kernel, operators: Operators) -> Result<Self, KineticError> {
        params.validate()?;
        Ok(Self {
            conv: Convolver::new(kernel, grid, ConvolutionMethod::Fft),
            params: *params,
            operators,
        })
    }

    /// One step of size `dt`, checked against `cfl * stable_dt`.
    pub fn step(&self, state: &KineticState, dt: f64, cfl: f64) -> Result<KineticState, KineticError> {
        let limit = cfl * stable_dt(state);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(KineticError::CflViolation { dt, limit });
        }
        let n = state.grid.node_count();
        let h = state.grid.spacing();
        let (eps, s) = (state.eps, state.speed);
        let u: Vec<f64> = state.p_plus.iter().zip(&state.p_minus).map(|(a, b)| a + b).collect();
        let (ip, im) = if self.operators.interaction {
            (
                interaction(&self.conv, &state.p_plus, &self.params)?,
                interaction(&self.conv, &state.p_minus, &self.params)?,
            )
        } else {
            (vec![0.0; n], vec![0.0; n])
        };
        // j <- decay j + weight * forcing, exact for frozen forcing
        let (decay, weight) = if self.operators.relaxation {
            let r = dt / (eps * eps);
            ((-r).exp(), -(-r).exp_m1() * eps * eps)
        } else {
            (1.0, dt)
        };
        let flux: Vec<f64> = (0..n)
            .map(|i| {
                let k = (i + 1) % n;
                let forcing = -(s / eps) * (u[k] - u[i]) / h + 0.5 * ((ip[i] - im[i]) + (ip[k] - im[k]));
                decay * state.flux[i] + weight * forcing
            })
            .collect();
        let mut p_plus = Vec::with_capacity(n);
        let mut p_minus = Vec::with_capacity(n);
        for i in 0..n {
            let left = (i + n - 1) % n;
            let un = u[i] + dt * (-(s / eps) * (flux[i] - flux[left]) / h + ip[i] + im[i]);
            let jn = 0.5 * (flux[i] + flux[left]);
            p_plus.push(0.5 * (un + jn));
            p_minus.push(0.5 * (un - jn));
        }
        if let Some(i) = p_plus.iter().chain(&p_minus).position(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite {
                node: i % n,
                value: if i < n { p_plus[i] } else { p_minus[i - n] },
            }
            .into());
        }
        Ok(KineticState {
            grid: state.grid.clone(),
            p_plus,
            p_minus,
            eps,
            speed: s,
            time: state.time + dt,
            flux,
        })
    }
}

/// One step with a fresh [`KineticStepper`].
pub fn kinetic_step(
    state: &KineticState,
    params: &ModelParams,
    kernel: &Kernel,
    dt: f64,
    cfl: f64,
) -> Result<KineticState, KineticError> {
    KineticStepper::new(&state.grid, params, kernel, Operators::default())?.step(state, dt, cfl)
}

#[derive(Debug, Clone)]
pub struct KineticTrajectory {
    pub states: Vec<KineticState>,
    pub steps: usize,
    /// `max |L+ + L-|` over every step (zero when the turning operator conserves mass).
    pub max_turning_imbalance: f64,
    /// Most negative `p+-` seen.
    pub min_density: f64,
}

impl KineticTrajectory {
    pub fn final_state(&self) -> &KineticState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Integrate to `config.t_end` with uniform steps of at most `config.cfl * stable_dt`.
pub fn kinetic_run(
    initial: &KineticState,
    params: &ModelParams,
    kernel: &Kernel,
    config: &KineticConfig,
) -> Result<KineticTrajectory, KineticError> {
    if !(config.cfl > 0.0 && config.cfl <= 1.0) {
        return Err(KineticError::InvalidInput {
            name: "cfl",
            value: config.cfl,
            reason: "must lie in (0, 1]",
        });
    }
    if !(config.t_end > initial.time && config.t_end.is_finite()) {
        return Err(KineticError::InvalidInput {
            name: "t_end",
            value: config.t_end,
            reason: "must lie after the initial time",
        });
    }
    let stepper = KineticStepper::new(&initial.grid, params, kernel, config.operators)?;
    let span = config.t_end - initial.time;
    let steps = (span / (config.cfl * stable_dt(initial))).ceil() as usize;
    let dt = span / steps as f64;
    let stride = config.snapshot_stride.max(1);
    let mut out = KineticTrajectory {
        states: vec![initial.clone()],
        steps,
        max_turning_imbalance: 0.0,
        min_density: initial.p_plus.iter().chain(&initial.p_minus).copied().fold(f64::INFINITY, f64::min),
    };
    let mut state = initial.clone();
    for k in 1..=steps {
        let (lp, lm) = state.turning_operator();
        let imbalance = lp.iter().zip(&lm).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        out.max_turning_imbalance = out.max_turning_imbalance.max(imbalance);
        state = stepper.step(&state, dt, 1.0)?;
        if k == steps {
            state.time = config.t_end;
        }
        out.min_density = state
            .p_plus
            .iter()
            .chain(&state.p_minus)
            .copied()
            .fold(out.min_density, f64::min);
        if k % stride == 0 || k == steps {
            out.states.push(state.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub eps: f64,
    /// `max |u_kinetic - u_parabolic|` at `t_end`.
    pub error: f64,
    /// `log(e_prev / e) / log(eps_prev / eps)`; absent on the first row.
    pub order: Option<f64>,
    pub max_turning_imbalance: f64,
    pub min_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub speed: f64,
    pub diffusion: f64,
    pub t_end: f64,
    pub rows: Vec<LimitRow>,
}

impl LimitReport {
    pub fn errors_decrease(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn min_order(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.order).fold(f64::INFINITY, f64::min)
    }
}

/// Compare the kinetic density against the parabolic equation with diffusion `s^2` for each `eps`.
pub fn kinetic_limit(
    u0: &Field,
    params: &ModelParams,
    kernel: &Kernel,
    speed: f64,
    eps_values: &[f64],
    t_end: f64,
    cfl: f64,
) -> Result<LimitReport, KineticError> {
    let diffusion = diffusion_coefficient(speed, 1);
    let macro_params = params.with_diffusion(diffusion);
    let h = u0.grid().spacing();
    let reference = run(
        u0,
        &macro_params,
        kernel,
        &SolverConfig {
            dt_initial: (0.1 * h * h).min(1e-4),
            t_end,
            snapshot_stride: usize::MAX,
            ..SolverConfig::default()
        },
    )?;
    if !reference.status.is_bounded() {
        return Err(KineticError::ReferenceFailed(reference.status));
    }
    let target = reference.final_field().values().to_vec();

    let mut rows: Vec<LimitRow> = Vec::with_capacity(eps_values.len());
    for &eps in eps_values {
        let initial = KineticState::isotropic(u0, eps, speed)?;
        let traj = kinetic_run(
            &initial,
            params,
            kernel,
            &KineticConfig {
                cfl,
                t_end,
                ..KineticConfig::default()
            },
        )?;
        let u = traj.final_state().density();
        let error = u.values().iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let order = rows.last().map(|p| (p.error / error).ln() / (p.eps / eps).ln());
        rows.push(LimitRow {
            eps,
            error,
            order,
            max_turning_imbalance: traj.max_turning_imbalance,
            min_density: traj.min_density,
        });
    }
    Ok(LimitReport {
        speed,
        diffusion,
        t_end,
        rows,
    })
}
