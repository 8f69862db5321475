//! Numerical toolkit for the nonlocal Fisher-KPP equation
//! `u_t = D u_xx + mu u^alpha (1 - kappa J * u^beta)`.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod harness;
pub mod kinetic;
pub mod lyapunov;
pub mod model;
pub mod solver;

pub use model::{Boundary, Field, Grid1D, Kernel, KernelShape, ModelError, ModelParams};
pub use solver::{run, RunOutcome, RunStatus, SolverConfig, SolverError};
