use super::ops::Discretization;
use super::{Integrator, SolverError};

/// ARS(2,2,2) coefficients.
const GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
const DELTA: f64 = 1.0 - 1.0 / (2.0 * GAMMA);

fn axpy(u: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    u.iter().zip(k).map(|(x, y)| x + a * y).collect()
}

fn check_finite(u: Vec<f64>) -> Result<Vec<f64>, SolverError> {
    match u.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(SolverError::NonFinite { node, value: u[node] }),
        None => Ok(u),
    }
}

/// Advance nodal values `u` by `dt`.
pub fn advance(
    disc: &Discretization,
    integrator: Integrator,
    cfl_safety: f64,
    u: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SolverError> {
    match integrator {
        Integrator::Rk4 => {
            let limit = disc.explicit_dt_limit(cfl_safety);
            if dt > limit * (1.0 + 1e-12) {
                return Err(SolverError::CflViolation { dt, limit });
            }
            rk4(disc, u, dt)
        }
        Integrator::Imex => imex(disc, u, dt),
    }
}

fn rk4(disc: &Discretization, u: &[f64], dt: f64) -> Result<Vec<f64>, SolverError> {
    let k1 = disc.rhs(u)?;
    let k2 = disc.rhs(&axpy(u, 0.5 * dt, &k1))?;
    let k3 = disc.rhs(&axpy(u, 0.5 * dt, &k2))?;
    let k4 = disc.rhs(&axpy(u, dt, &k3))?;
    let out = (0..u.len())
        .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    check_finite(out)
}

fn imex(disc: &Discretization, u: &[f64], dt: f64) -> Result<Vec<f64>, SolverError> {
    let e1 = disc.reaction(u)?;
    let u2 = disc.solve_implicit(&axpy(u, dt * GAMMA, &e1), dt * GAMMA);
    let u2 = check_finite(u2)?;
    let e2 = disc.reaction(&u2)?;
    let i2 = disc.diffusion(&u2);
    let r: Vec<f64> = (0..u.len())
        .map(|i| u[i] + dt * (DELTA * e1[i] + (1.0 - DELTA) * e2[i]) + dt * (1.0 - GAMMA) * i2[i])
        .collect();
    check_finite(disc.solve_implicit(&r, dt * GAMMA))
}
