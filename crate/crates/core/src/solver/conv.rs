use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::model::{Boundary, DiscreteKernel, Grid1D, Kernel};

/// Values in `[-NEG_TOLERANCE, 0)` are treated as round-off zeros.
pub const NEG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConvolutionMethod {
    #[default]
    Fft,
    Direct,
}

/// `x^p` for the exponents of the model. Non-integer powers of tiny negative
/// round-off values are taken as 0; anything more negative is an error.
pub fn pow_nonneg(x: f64, p: f64, node: usize) -> Result<f64, SolverError> {
    if p == 1.0 {
        return Ok(x);
    }
    if p.fract() == 0.0 && p.abs() <= 64.0 {
        return Ok(x.powi(p as i32));
    }
    if x >= 0.0 {
        Ok(x.powf(p))
    } else if x >= -NEG_TOLERANCE {
        Ok(0.0)
    } else {
        Err(SolverError::NegativeValue { node, value: x })
    }
}

struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Spectrum of the (wrapped or zero-padded) weights, scaled by `1/len`.
    spectrum: Vec<Complex<f64>>,
}

/// Precomputed discrete convolution `(J * v)_i = sum_k w_k v_{i-k}` on one grid.
///
/// Dirichlet grids add the exterior contribution analytically:
/// `left^beta` times the kernel mass reaching past the left end, and likewise on the right.
pub struct Convolver {
    grid: Grid1D,
    weights: DiscreteKernel,
    method: ConvolutionMethod,
    tail_left: Vec<f64>,
    tail_right: Vec<f64>,
    plan: Option<FftPlan>,
}

impl Convolver {
    pub fn new(kernel: &Kernel, grid: &Grid1D, method: ConvolutionMethod) -> Self {
        let weights = kernel.discretize(grid.spacing());
        let n = grid.node_count();
        let r = weights.radius() as isize;
        let (mut tail_left, mut tail_right) = (Vec::new(), Vec::new());
        if !grid.is_periodic() {
            // tail_left[i] = sum_{k > i} w_k, tail_right[i] = sum_{k < i - (n-1)} w_k
            let w = weights.weights();
            let mut suffix = vec![0.0; w.len() + 1];
            for m in (0..w.len()).rev() {
                suffix[m] = suffix[m + 1] + w[m];
            }
            let mut prefix = vec![0.0; w.len() + 1];
            for m in 0..w.len() {
                prefix[m + 1] = prefix[m] + w[m];
            }
            let last = n as isize - 1;
            tail_left = (0..n as isize)
                .map(|i| {
                    let m = (i + 1 + r).clamp(0, w.len() as isize) as usize;
                    suffix[m]
                })
                .collect();
            tail_right = (0..n as isize)
                .map(|i| {
                    let m = (i - last + r).clamp(0, w.len() as isize) as usize;
                    prefix[m]
                })
                .collect();
        }
        let plan = (method == ConvolutionMethod::Fft).then(|| Self::plan(grid, &weights));
        Self {
            grid: grid.clone(),
            weights,
            method,
            tail_left,
            tail_right,
            plan,
        }
    }

    fn plan(grid: &Grid1D, weights: &DiscreteKernel) -> FftPlan {
        let n = grid.node_count();
        let r = weights.radius();
        let len = if grid.is_periodic() {
            n
        } else {
            (n + 2 * r).next_power_of_two()
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut spectrum = vec![Complex::new(0.0, 0.0); len];
        for (m, &w) in weights.weights().iter().enumerate() {
            let k = m as isize - r as isize;
            let idx = if grid.is_periodic() {
                k.rem_euclid(n as isize) as usize
            } else {
                m
            };
            spectrum[idx].re += w;
        }
        forward.process(&mut spectrum);
        let scale = 1.0 / len as f64;
        spectrum.iter_mut().for_each(|c| *c *= scale);
        FftPlan {
            len,
            forward,
            inverse,
            spectrum,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn weights(&self) -> &DiscreteKernel {
        &self.weights
    }

    pub fn method(&self) -> ConvolutionMethod {
        self.method
    }

    /// `J * v` for already-powered nodal values `v` and exterior values
    /// `(left, right)` (ignored on periodic grids).
    pub fn apply(&self, v: &[f64], exterior: (f64, f64)) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.grid.node_count());
        let mut out = match &self.plan {
            Some(plan) => self.apply_fft(plan, v),
            None => self.apply_direct(v),
        };
        if !self.grid.is_periodic() {
            let (left, right) = exterior;
            for (i, o) in out.iter_mut().enumerate() {
                *o += left * self.tail_left[i] + right * self.tail_right[i];
            }
        }
        out
    }

    fn apply_direct(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len() as isize;
        let r = self.weights.radius() as isize;
        let w = self.weights.weights();
        let periodic = self.grid.is_periodic();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for k in -r..=r {
                    let j = i - k;
                    let vj = if periodic {
                        v[j.rem_euclid(n) as usize]
                    } else if (0..n).contains(&j) {
                        v[j as usize]
                    } else {
                        continue;
                    };
                    acc += w[(k + r) as usize] * vj;
                }
                acc
            })
            .collect()
    }

    fn apply_fft(&self, plan: &FftPlan, v: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex::new(0.0, 0.0); plan.len];
        for (b, &x) in buf.iter_mut().zip(v) {
            b.re = x;
        }
        plan.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&plan.spectrum) {
            *b *= s;
        }
        plan.inverse.process(&mut buf);
        let offset = if self.grid.is_periodic() { 0 } else { self.weights.radius() };
        buf[offset..offset + v.len()].iter().map(|c| c.re).collect()
    }

    /// `J * u^beta` with the boundary policy of the grid.
    pub fn convolve_power(&self, u: &[f64], beta: f64) -> Result<Vec<f64>, SolverError> {
        let powered = u
            .iter()
            .enumerate()
            .map(|(i, &x)| pow_nonneg(x, beta, i))
            .collect::<Result<Vec<_>, _>>()?;
        let exterior = match self.grid.boundary() {
            Boundary::Periodic => (0.0, 0.0),
            Boundary::DirichletExtension { left, right } => {
                (pow_nonneg(left, beta, 0)?, pow_nonneg(right, beta, u.len() - 1)?)
            }
        };
        Ok(self.apply(&powered, exterior))
    }
}
