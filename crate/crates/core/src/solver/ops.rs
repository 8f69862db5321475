use super::conv::{pow_nonneg, ConvolutionMethod, Convolver};
use super::tridiag::{solve_cyclic, solve_tridiagonal};
use super::SolverError;
use crate::model::{Boundary, Grid1D, Kernel, ModelParams};

/// Method-of-lines discretization of `D u_xx + mu u^alpha (1 - kappa J * u^beta)`:
/// second-order central differences plus the precomputed nonlocal convolution.
pub struct Discretization {
    params: ModelParams,
    grid: Grid1D,
    conv: Convolver,
    competition: bool,
    growth: bool,
}

impl Discretization {
    pub fn new(
        grid: &Grid1D,
        params: &ModelParams,
        kernel: &Kernel,
        method: ConvolutionMethod,
    ) -> Result<Self, SolverError> {
        params.validate()?;
        Ok(Self {
            params: *params,
            grid: grid.clone(),
            conv: Convolver::new(kernel, grid, method),
            competition: true,
            growth: true,
        })
    }

    /// Drop the `kappa J * u^beta` term (pure local growth); used to test integrators.
    #[cfg(test)]
    pub(crate) fn without_competition(mut self) -> Self {
        self.competition = false;
        self
    }

    /// Drop the whole reaction term, leaving the heat equation.
    #[cfg(test)]
    pub(crate) fn pure_diffusion(mut self) -> Self {
        self.growth = false;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn convolver(&self) -> &Convolver {
        &self.conv
    }

    /// `mu u^alpha (1 - kappa J * u^beta)`.
    pub fn reaction(&self, u: &[f64]) -> Result<Vec<f64>, SolverError> {
        let p = &self.params;
        if !self.growth {
            return Ok(vec![0.0; u.len()]);
        }
        let competition = if self.competition {
            Some(self.conv.convolve_power(u, p.beta)?)
        } else {
            None
        };
        let mut out = u
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let growth = p.mu * pow_nonneg(x, p.alpha, i)?;
                Ok(match &competition {
                    Some(c) => growth * (1.0 - p.kappa * c[i]),
                    None => growth,
                })
            })
            .collect::<Result<Vec<_>, SolverError>>()?;
        self.pin_ends(&mut out);
        Ok(out)
    }

    /// End nodes of a Dirichlet grid carry the extension values and do not evolve.
    fn pin_ends(&self, v: &mut [f64]) {
        if !self.grid.is_periodic() {
            let n = v.len();
            v[0] = 0.0;
            v[n - 1] = 0.0;
        }
    }

    /// `D u_xx` by central differences; periodic wrap, or zero at pinned Dirichlet ends.
    pub fn diffusion(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let d = self.params.diffusion / (self.grid.spacing() * self.grid.spacing());
        if d == 0.0 {
            return vec![0.0; n];
        }
        let mut out: Vec<f64> = (0..n)
            .map(|i| {
                let l = u[(i + n - 1) % n];
                let r = u[(i + 1) % n];
                d * (l - 2.0 * u[i] + r)
            })
            .collect();
        self.pin_ends(&mut out);
        out
    }

    pub fn rhs(&self, u: &[f64]) -> Result<Vec<f64>, SolverError> {
        let mut out = self.reaction(u)?;
        for (o, l) in out.iter_mut().zip(self.diffusion(u)) {
            *o += l;
        }
        Ok(out)
    }

    /// Solve `x - c D x_xx = r`. On Dirichlet grids the end entries of `r` are
    /// kept and enter the interior system as known boundary values.
    pub fn solve_implicit(&self, r: &[f64], c: f64) -> Vec<f64> {
        let s = c * self.params.diffusion / (self.grid.spacing() * self.grid.spacing());
        if s == 0.0 {
            return r.to_vec();
        }
        if self.grid.is_periodic() {
            return solve_cyclic(1.0 + 2.0 * s, -s, r);
        }
        let n = r.len();
        let mut rhs = r[1..n - 1].to_vec();
        rhs[0] += s * r[0];
        rhs[n - 3] += s * r[n - 1];
        let interior = solve_tridiagonal(1.0 + 2.0 * s, -s, &rhs);
        let mut out = Vec::with_capacity(n);
        out.push(r[0]);
        out.extend(interior);
        out.push(r[n - 1]);
        out
    }

    /// Overwrite the end nodes of a Dirichlet grid with the extension values.
    pub fn apply_boundary(&self, u: &mut [f64]) {
        if let Boundary::DirichletExtension { left, right } = self.grid.boundary() {
            let n = u.len();
            u[0] = left;
            u[n - 1] = right;
        }
    }

    /// `(kappa w_0)^(-1/beta)`: no node of the semi-discrete system can grow past
    /// this level (or its start value), since its own cell alone then saturates
    /// the competition term.
    pub fn saturation_level(&self) -> f64 {
        let w0 = self.conv.weights().center();
        (self.params.kappa * w0).powf(-1.0 / self.params.beta)
    }

    /// Largest stable explicit step `cfl * h^2 / (2 D)`; infinite without diffusion.
    pub fn explicit_dt_limit(&self, cfl: f64) -> f64 {
        if self.params.diffusion == 0.0 {
            f64::INFINITY
        } else {
            cfl * self.grid.spacing().powi(2) / (2.0 * self.params.diffusion)
        }
    }
}
