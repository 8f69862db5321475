//! Domain types shared by every part of the crate: model parameters,
//! interaction kernels, grids and fields.

mod grid;
mod kernel;

pub use grid::{Boundary, Field, Grid1D};
pub use kernel::{DiscreteKernel, Kernel, KernelShape};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or transforming model objects.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
    #[error("rescaling needs unit diffusion (got {diffusion})")]
    RescaleNeedsDiffusion { diffusion: f64 },
}

/// Coefficients of `u_t = D u_xx + mu u^alpha (1 - kappa J * u^beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub kappa: f64,
    #[serde(default = "unit_diffusion")]
    pub diffusion: f64,
}

fn unit_diffusion() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, mu: f64, kappa: f64, diffusion: f64) -> Result<Self, ModelError> {
        let params = Self {
            alpha,
            beta,
            mu,
            kappa,
            diffusion,
        };
        params.validate()?;
        Ok(params)
    }

    /// `alpha = beta = mu = kappa = 1` with unit diffusion: the classical nonlocal Fisher-KPP.
    pub fn fisher_kpp() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            mu: 1.0,
            kappa: 1.0,
            diffusion: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |name, value: f64, ok: bool, reason| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, value, reason })
            }
        };
        check("alpha", self.alpha, self.alpha >= 1.0, "must be >= 1")?;
        check("beta", self.beta, self.beta > 0.0, "must be > 0")?;
        check("mu", self.mu, self.mu > 0.0, "must be > 0")?;
        check("kappa", self.kappa, self.kappa > 0.0, "must be > 0")?;
        check("diffusion", self.diffusion, self.diffusion >= 0.0, "must be >= 0")?;
        let c = self.steady_state();
        check("kappa", self.kappa, c.is_finite() && c > 0.0, "steady state kappa^(-1/beta) overflows")
    }

    /// The positive constant steady state `kappa^(-1/beta)`.
    pub fn steady_state(&self) -> f64 {
        steady_state(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_diffusion(mut self, diffusion: f64) -> Self {
        self.diffusion = diffusion;
        self
    }
}

/// JSON form of a parameter set with its kernel:
/// `{"alpha":..,"beta":..,"mu":..,"kappa":..,"diffusion":..,"kernel":{..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(default = "Kernel::uniform")]
    pub kernel: Kernel,
}

/// `kappa^(-1/beta)`.
pub fn steady_state(params: &ModelParams) -> f64 {
    params.kappa.powf(-1.0 / params.beta)
}

/// Map the kernel-width form `u_t = u_xx + mu u^a (1 - k J_sigma * u^b)` onto the
/// unit-width form with `mu' = mu sigma^2`.
///
/// Solutions correspond through `x = sigma y`, `t = sigma^2 tau`.
pub fn rescale_to_mu(kernel: &Kernel, params: &ModelParams) -> Result<(Kernel, ModelParams), ModelError> {
    if params.diffusion != 1.0 {
        return Err(ModelError::RescaleNeedsDiffusion {
            diffusion: params.diffusion,
        });
    }
    let sigma = kernel.sigma();
    let rescaled = ModelParams {
        mu: params.mu * sigma * sigma,
        ..*params
    };
    Ok((kernel.with_sigma(1.0)?, rescaled))
}

/// Inverse of [`rescale_to_mu`]: fold `mu` back into the kernel width `sigma = sqrt(mu)`.
pub fn rescale_to_sigma(kernel: &Kernel, params: &ModelParams) -> Result<(Kernel, ModelParams), ModelError> {
    if params.diffusion != 1.0 {
        return Err(ModelError::RescaleNeedsDiffusion {
            diffusion: params.diffusion,
        });
    }
    let factor = params.mu.sqrt();
    let rescaled = ModelParams { mu: 1.0, ..*params };
    Ok((kernel.with_sigma(kernel.sigma() * factor)?, rescaled))
}

/// The piecewise front profile used for the boundedness experiments:
/// `1` left of `x_l`, a Gaussian shoulder up to `0`, a linear ramp to `x_r`, `0` beyond.
pub fn paper_initial_condition(grid: &Grid1D) -> Field {
    let (xl, xr) = (grid.x_left(), grid.x_right());
    assert!(xl < 0.0 && 0.0 < xr, "front profile needs x_left < 0 < x_right");
    let values = grid.nodes().map(|x| front_profile(x, xl, xr)).collect();
    Field::new(grid.clone(), values, 0.0).expect("front profile is finite")
}

pub(crate) fn front_profile(x: f64, xl: f64, xr: f64) -> f64 {
    if x <= xl {
        1.0
    } else if x <= 0.0 {
        (-(x - xl) * (x - xl)).exp()
    } else if x <= xr {
        (-xl * xl).exp() * (1.0 - x / xr)
    } else {
        0.0
    }
}

/// `floor + amplitude (1 + cos(k x)) / 2` sampled at the grid nodes.
pub fn oscillatory_bump(grid: &Grid1D, amplitude: f64, wavenumber: f64, floor: f64) -> Field {
    let values = grid
        .nodes()
        .map(|x| floor + amplitude * 0.5 * (1.0 + (wavenumber * x).cos()))
        .collect();
    Field::new(grid.clone(), values, 0.0).expect("bump is finite")
}
