//! Entropy functional, dissipation monitor, hair-trigger and pattern diagnostics.
//!
//! For `0 < u <= kappa^(-1/beta)` the windowed entropy
//! `F(x,t) = int_{x-delta}^{x+delta} h(u^beta) dy` satisfies
//! `F_t <= D_c F_xx - D(x,t)` with
//! `D = eta mu kappa delta int_{x-delta}^{x+delta} (1/kappa - u^beta)^2 dy`
//! (`D_c` the diffusion coefficient) provided `delta` is small enough.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Boundary, Field, Grid1D, Kernel, ModelError, ModelParams};
use crate::solver::RunOutcome;

/// Young's inequality constant `C(eps) = 1/(4 eps)` at `eps = 1/2`.
const YOUNG_C: f64 = 0.5;

/// Relative slack on `u <= kappa^(-1/beta)` and on hypothesis (A).
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid input {name} = {value}: {reason}")]
    InvalidInput {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("h is undefined at alpha = 1 + beta (removable singularity in h; branch undefined)")]
    RemovableSingularity,
    #[error("non-positive value {value} at node {node} inside an entropy window")]
    NonPositive { node: usize, value: f64 },
    #[error("u = {value} exceeds kappa^(-1/beta) = {bound} at x = {x} (t = {t}); the inequality needs 0 < u <= kappa^(-1/beta)")]
    HypothesisViolation { x: f64, t: f64, value: f64, bound: f64 },
    #[error("need at least two snapshots, got {0}")]
    TooFewSnapshots(usize),
}

/// Entropy density `h(s)`, minimal and zero at `s = 1/kappa`.
pub fn entropy_h(s: f64, params: &ModelParams) -> Result<f64, LyapunovError> {
    let (a, b, k) = branch_inputs(s, params)?;
    if a == 1.0 {
        return Ok(s / b - s.ln() / (k * b) - (1.0 + k.ln()) / (k * b));
    }
    let p = 1.0 + b - a;
    let q = 1.0 - a;
    Ok(s.powf(p / b) / p - s.powf(q / b) / (k * q) + k.powf(-p / b) * (1.0 / q - 1.0 / p))
}

/// `h'(s) = (s^((1-alpha)/beta) - s^((1-alpha-beta)/beta) / kappa) / beta`.
pub fn entropy_h_prime(s: f64, params: &ModelParams) -> Result<f64, LyapunovError> {
    let (a, b, k) = branch_inputs(s, params)?;
    Ok((s.powf((1.0 - a) / b) - s.powf((1.0 - a - b) / b) / k) / b)
}

fn branch_inputs(s: f64, params: &ModelParams) -> Result<(f64, f64, f64), LyapunovError> {
    params.validate()?;
    if !(s > 0.0) {
        return Err(LyapunovError::InvalidInput {
            name: "s",
            value: s,
            reason: "h needs s > 0",
        });
    }
    if params.alpha > 1.0 && params.alpha == 1.0 + params.beta {
        return Err(LyapunovError::RemovableSingularity);
    }
    Ok((params.alpha, params.beta, params.kappa))
}

/// Residual allowance `tol = c1 dt + c2 h^2` for the discrete inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub c1: f64,
    pub c2: f64,
}

impl Tolerance {
    /// Constants frozen from [`calibrate_tolerance`] on the reference setup
    /// (`alpha = 1.5`, `beta = kappa = mu = 1`, uniform kernel, `delta = 0.2`),
    /// rounded up by about a factor ten.
    pub const FROZEN: Tolerance = Tolerance { c1: 1e-3, c2: 5e-3 };

    pub fn at(&self, dt: f64, spacing: f64) -> f64 {
        self.c1 * dt + self.c2 * spacing * spacing
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::FROZEN
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LyapunovConfig {
    /// Window half-width; rounded to the nearest multiple of the grid spacing.
    pub delta: f64,
    /// Nodes skipped at each end of a Dirichlet grid (at least the window plus one).
    pub interior_margin: usize,
    pub tolerance: Tolerance,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            delta: 0.2,
            interior_margin: 0,
            tolerance: Tolerance::FROZEN,
        }
    }
}

impl LyapunovConfig {
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            ..Self::default()
        }
    }

    fn window_nodes(&self, grid: &Grid1D) -> Result<usize, LyapunovError> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(LyapunovError::InvalidInput {
                name: "delta",
                value: self.delta,
                reason: "must be > 0",
            });
        }
        if self.delta > grid.length() {
            return Err(LyapunovError::InvalidInput {
                name: "delta",
                value: self.delta,
                reason: "exceeds the grid extent",
            });
        }
        Ok(((self.delta / grid.spacing()).round() as usize).max(1))
    }

    /// `delta` after snapping to the grid.
    pub fn effective_delta(&self, grid: &Grid1D) -> Result<f64, LyapunovError> {
        Ok(self.window_nodes(grid)? as f64 * grid.spacing())
    }
}

/// Largest window half-width for which the differential inequality is proved:
/// `min{delta0/2, sqrt(alpha kappa^((alpha-1)/beta) / (4 mu C beta^2))}` for `alpha <= beta`,
/// `min{delta0/2, sqrt(kappa^((alpha-1)/beta) / (4 C beta mu))}` otherwise, with `C = 1/2`.
pub fn admissible_delta_max(params: &ModelParams, kernel: &Kernel) -> f64 {
    let (delta0, _) = kernel.condition_constants();
    let ModelParams {
        alpha, beta, mu, kappa, ..
    } = *params;
    let scale = kappa.powf((alpha - 1.0) / beta);
    let second = if alpha <= beta {
        (alpha * scale / (4.0 * mu * YOUNG_C * beta * beta)).sqrt()
    } else {
        (scale / (4.0 * YOUNG_C * beta * mu)).sqrt()
    };
    (0.5 * delta0).min(second)
}

/// Trapezoid integrals of `f(u_j)` over `[x_i - m h, x_i + m h]` for `i` in `nodes`.
/// Outside a Dirichlet grid the extension values are used.
fn window_integrals(
    values: &[f64],
    grid: &Grid1D,
    m: usize,
    nodes: std::ops::Range<usize>,
    f: &dyn Fn(f64, usize) -> Result<f64, LyapunovError>,
) -> Result<Vec<f64>, LyapunovError> {
    let n = values.len() as isize;
    let h = grid.spacing();
    let at = |j: isize| -> Result<f64, LyapunovError> {
        match grid.boundary() {
            Boundary::Periodic => {
                let k = j.rem_euclid(n) as usize;
                f(values[k], k)
            }
            Boundary::DirichletExtension { left, right } => {
                if j < 0 {
                    f(left, 0)
                } else if j >= n {
                    f(right, values.len() - 1)
                } else {
                    f(values[j as usize], j as usize)
                }
            }
        }
    };
    let m = m as isize;
    nodes
        .map(|i| {
            let i = i as isize;
            let mut s = 0.5 * (at(i - m)? + at(i + m)?);
            for j in (i - m + 1)..(i + m) {
                s += at(j)?;
            }
            Ok(s * h)
        })
        .collect()
}

fn entropy_integrand(params: &ModelParams) -> impl Fn(f64, usize) -> Result<f64, LyapunovError> + '_ {
    move |u, node| {
        if !(u > 0.0) {
            return Err(LyapunovError::NonPositive { node, value: u });
        }
        entropy_h(u.powf(params.beta), params)
    }
}

fn dissipation_integrand(params: &ModelParams) -> impl Fn(f64, usize) -> Result<f64, LyapunovError> + '_ {
    move |u, node| {
        if !(u > 0.0) {
            return Err(LyapunovError::NonPositive { node, value: u });
        }
        let d = 1.0 / params.kappa - u.powf(params.beta);
        Ok(d * d)
    }
}

/// Prefactor `eta mu kappa (2 delta) / 2` of the dissipation.
fn dissipation_factor(params: &ModelParams, kernel: &Kernel, delta: f64) -> f64 {
    let (_, eta) = kernel.condition_constants();
    0.5 * eta * params.mu * params.kappa * 2.0 * delta
}

/// Windowed entropy `F` at every node.
pub fn lyapunov_f(field: &Field, params: &ModelParams, config: &LyapunovConfig) -> Result<Field, LyapunovError> {
    let grid = field.grid();
    let m = config.window_nodes(grid)?;
    let f = entropy_integrand(params);
    let values = window_integrals(field.values(), grid, m, 0..grid.node_count(), &f)?;
    Ok(Field::new(grid.clone(), values, field.time())?)
}

/// Dissipation `D` at every node.
pub fn dissipation_d(
    field: &Field,
    params: &ModelParams,
    kernel: &Kernel,
    config: &LyapunovConfig,
) -> Result<Field, LyapunovError> {
    let grid = field.grid();
    let m = config.window_nodes(grid)?;
    let c = dissipation_factor(params, kernel, m as f64 * grid.spacing());
    let f = dissipation_integrand(params);
    let values = window_integrals(field.values(), grid, m, 0..grid.node_count(), &f)?
        .into_iter()
        .map(|v| c * v)
        .collect();
    Ok(Field::new(grid.clone(), values, field.time())?)
}

/// Per-snapshot quantities on the monitored nodes `lo..hi`, padded by one node each side.
struct Terms {
    f: Vec<f64>,
    /// `D_c F_xx - D` on `lo..hi`.
    drift: Vec<f64>,
}

fn terms(
    values: &[f64],
    grid: &Grid1D,
    params: &ModelParams,
    kernel: &Kernel,
    m: usize,
    lo: usize,
    hi: usize,
) -> Result<Terms, LyapunovError> {
    let n = grid.node_count();
    let h = grid.spacing();
    let periodic = grid.is_periodic();
    // F on lo-1..hi+1 (wrapped when periodic)
    let f_nodes: Vec<usize> = (lo as isize - 1..hi as isize + 1)
        .map(|j| if periodic { j.rem_euclid(n as isize) as usize } else { j as usize })
        .collect();
    let ent = entropy_integrand(params);
    let f = f_nodes
        .iter()
        .map(|&j| Ok(window_integrals(values, grid, m, j..j + 1, &ent)?[0]))
        .collect::<Result<Vec<f64>, LyapunovError>>()?;
    let c = dissipation_factor(params, kernel, m as f64 * h);
    let d = window_integrals(values, grid, m, lo..hi, &dissipation_integrand(params))?;
    let drift = (0..hi - lo)
        .map(|k| params.diffusion * (f[k] - 2.0 * f[k + 1] + f[k + 2]) / (h * h) - c * d[k])
        .collect();
    Ok(Terms {
        f: f[1..f.len() - 1].to_vec(),
        drift,
    })
}

fn monitored_range(grid: &Grid1D, m: usize, margin: usize) -> Result<(usize, usize), LyapunovError> {
    let n = grid.node_count();
    if grid.is_periodic() {
        return Ok((0, n));
    }
    let margin = margin.max(m + 1);
    if 2 * margin >= n {
        return Err(LyapunovError::InvalidInput {
            name: "interior_margin",
            value: margin as f64,
            reason: "leaves no interior nodes",
        });
    }
    Ok((margin, n - margin))
}

/// `R = (F1 - F0)/dt - (drift0 + drift1)/2` on the monitored nodes.
fn pair_residual(a: &Terms, b: &Terms, dt: f64) -> Vec<f64> {
    (0..a.f.len())
        .map(|k| (b.f[k] - a.f[k]) / dt - 0.5 * (a.drift[k] + b.drift[k]))
        .collect()
}

/// Residual of the inequality for a time-independent field (`F_t = 0`).
pub fn stationary_residual(
    field: &Field,
    params: &ModelParams,
    kernel: &Kernel,
    config: &LyapunovConfig,
) -> Result<Vec<f64>, LyapunovError> {
    let grid = field.grid();
    let m = config.window_nodes(grid)?;
    let (lo, hi) = monitored_range(grid, m, config.interior_margin)?;
    let t = terms(field.values(), grid, params, kernel, m, lo, hi)?;
    Ok(t.drift.iter().map(|v| -v).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub t0: f64,
    pub t1: f64,
    pub max_residual: f64,
    pub location: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub delta: f64,
    pub admissible_delta_max: f64,
    pub delta_admissible: bool,
    /// Set when `delta` exceeds the proved ceiling.
    pub flag: Option<String>,
    pub pairs: Vec<PairResidual>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Check `F_t <= D_c F_xx - D` between consecutive snapshots of `run`.
pub fn monitor_inequality(
    run: &RunOutcome,
    params: &ModelParams,
    kernel: &Kernel,
    config: &LyapunovConfig,
) -> Result<MonitorReport, LyapunovError> {
    monitor_snapshots(&run.snapshots, params, kernel, config)
}

/// [`monitor_inequality`] on an explicit snapshot sequence.
pub fn monitor_snapshots(
    snapshots: &[Field],
    params: &ModelParams,
    kernel: &Kernel,
    config: &LyapunovConfig,
) -> Result<MonitorReport, LyapunovError> {
    if snapshots.len() < 2 {
        return Err(LyapunovError::TooFewSnapshots(snapshots.len()));
    }
    params.validate()?;
    let grid = snapshots[0].grid();
    let m = config.window_nodes(grid)?;
    let (lo, hi) = monitored_range(grid, m, config.interior_margin)?;
    let bound = params.steady_state();
    for s in snapshots {
        if let Some((i, &v)) = s
            .values()
            .iter()
            .enumerate()
            .find(|(_, &v)| v > bound * (1.0 + BOUND_SLACK))
        {
            return Err(LyapunovError::HypothesisViolation {
                x: grid.x(i),
                t: s.time(),
                value: v,
                bound,
            });
        }
    }
    let delta = m as f64 * grid.spacing();
    let ceiling = admissible_delta_max(params, kernel);
    let admissible = delta <= ceiling;
    let flag = (!admissible).then(|| {
        format!("delta = {delta} is outside the admissible range (max {ceiling}); inequality not guaranteed")
    });

    let mut pairs = Vec::with_capacity(snapshots.len() - 1);
    let mut prev = terms(snapshots[0].values(), grid, params, kernel, m, lo, hi)?;
    for w in snapshots.windows(2) {
        let next = terms(w[1].values(), grid, params, kernel, m, lo, hi)?;
        let dt = w[1].time() - w[0].time();
        let r = pair_residual(&prev, &next, dt);
        let (k, max) = r
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
        let tolerance = config.tolerance.at(dt, grid.spacing());
        pairs.push(PairResidual {
            t0: w[0].time(),
            t1: w[1].time(),
            max_residual: max,
            location: grid.x(lo + k),
            tolerance,
            pass: max <= tolerance,
        });
        prev = next;
    }
    let max_residual = pairs.iter().map(|p| p.max_residual).fold(f64::NEG_INFINITY, f64::max);
    let pass = pairs.iter().all(|p| p.pass);
    Ok(MonitorReport {
        delta,
        admissible_delta_max: ceiling,
        delta_admissible: admissible,
        flag,
        pairs,
        max_residual,
        pass,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, 8 points.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Composite 8-point Gauss-Legendre rule with `panels` panels.
fn gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let c = a + (p as f64 + 0.5) * w;
            GL8.iter().map(|(x, wt)| wt * f(c + 0.5 * w * x)).sum::<f64>() * 0.5 * w
        })
        .sum()
}

/// Worst observed `|R_discrete - R_exact|` split into a time part and a space part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Max error per unit `dt` over the time-refinement samples.
    pub c1: f64,
    /// Max error per unit `h^2` over the space-refinement samples.
    pub c2: f64,
}

/// Fit `tol = c1 dt + c2 h^2` against exact values.
///
/// The probe is the heat mode `u = 1 - a e^{-D k^2 t}(1 + cos k x)/2` on a periodic domain of
/// length `length`. Its exact `F_t - D F_xx + D(x,t)` comes from Gauss-Legendre quadrature
/// and the closed-form flux `g'(u) u_x` at the window ends, `g(u) = h(u^beta)`. A steady
/// state perturbed by rounding noise bounds the residual floor.
pub fn calibrate_tolerance(
    params: &ModelParams,
    kernel: &Kernel,
    delta: f64,
    length: f64,
    amplitude: f64,
) -> Result<Calibration, LyapunovError> {
    params.validate()?;
    let k = 2.0 * std::f64::consts::PI / length;
    let dc = if params.diffusion > 0.0 { params.diffusion } else { 1.0 };
    let mode = |x: f64, t: f64| 1.0 - amplitude * (-dc * k * k * t).exp() * 0.5 * (1.0 + (k * x).cos());
    let mode_x = |x: f64, t: f64| amplitude * (-dc * k * k * t).exp() * 0.5 * k * (k * x).sin();
    let mode_t = |x: f64, t: f64| amplitude * dc * k * k * (-dc * k * k * t).exp() * 0.5 * (1.0 + (k * x).cos());
    let beta = params.beta;
    // g(u) = h(u^beta): g'(u) = h'(u^beta) beta u^(beta-1)
    let g_prime = |u: f64| -> f64 {
        entropy_h_prime(u.powf(beta), params).map(|d| d * beta * u.powf(beta - 1.0)).unwrap_or(f64::NAN)
    };
    let (_, eta) = kernel.condition_constants();

    let exact = |x: f64, t: f64| -> f64 {
        // F_t = int g'(u) u_t, F_xx = [g'(u) u_x] at the window ends
        let ft = gauss(&|y| g_prime(mode(y, t)) * mode_t(y, t), x - delta, x + delta, 16);
        let fxx = g_prime(mode(x + delta, t)) * mode_x(x + delta, t) - g_prime(mode(x - delta, t)) * mode_x(x - delta, t);
        let d = 0.5 * eta * params.mu * params.kappa * 2.0 * delta
            * gauss(
                &|y| {
                    let v = 1.0 / params.kappa - mode(y, t).powf(beta);
                    v * v
                },
                x - delta,
                x + delta,
                16,
            );
        ft - params.diffusion * fxx + d
    };

    let worst = |n: usize, dt: f64| -> Result<f64, LyapunovError> {
        let grid = Grid1D::periodic(-0.5 * length, 0.5 * length, n)?;
        let config = LyapunovConfig::new(delta);
        let m = config.window_nodes(&grid)?;
        let d_eff = m as f64 * grid.spacing();
        if (d_eff - delta).abs() > 1e-9 * delta {
            return Err(LyapunovError::InvalidInput {
                name: "delta",
                value: delta,
                reason: "must be a multiple of the calibration grid spacing",
            });
        }
        let t0 = 0.5;
        let u0 = Field::from_fn(&grid, |x| mode(x, t0))?;
        let u1 = Field::from_fn(&grid, |x| mode(x, t0 + dt))?;
        let a = terms(u0.values(), &grid, params, kernel, m, 0, grid.node_count())?;
        let b = terms(u1.values(), &grid, params, kernel, m, 0, grid.node_count())?;
        let r = pair_residual(&a, &b, dt);
        Ok(r.iter()
            .enumerate()
            .map(|(i, v)| {
                let x = grid.x(i);
                let e = 0.5 * (exact(x, t0) + exact(x, t0 + dt));
                (v - e).abs()
            })
            .fold(0.0, f64::max))
    };

    let base_n = (length / delta).round() as usize * 20;
    let mut c1: f64 = 0.0;
    for dt in [0.2, 0.1, 0.05] {
        // fine grid so the spatial part is negligible
        c1 = c1.max(worst(base_n * 4, dt)? / dt);
    }
    let mut c2: f64 = 0.0;
    for mult in [1, 2, 4] {
        let h = length / (base_n * mult) as f64;
        c2 = c2.max(worst(base_n * mult, 1e-4)? / (h * h));
    }
    // steady state with rounding noise: the residual floor must be far below tol
    let grid = Grid1D::periodic(-0.5 * length, 0.5 * length, base_n)?;
    let noisy = Field::from_fn(&grid, |x| params.steady_state() * (1.0 - 1e-15 * (1.0 + (7.3 * x).sin())))?;
    let floor = stationary_residual(&noisy, params, kernel, &LyapunovConfig::new(delta))?
        .into_iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let h = grid.spacing();
    c2 = c2.max(floor / (h * h));
    Ok(Calibration { c1, c2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub crossing_count: usize,
    pub max_amplitude: f64,
    /// 0 when the field is constant.
    pub dominant_wavelength: f64,
}

/// Level crossings, amplitude about `level`, and the wavelength of the strongest Fourier mode.
pub fn pattern_metrics(field: &Field, level: f64) -> PatternMetrics {
    let v = field.values();
    let grid = field.grid();
    let eps = 1e-12 * level.abs().max(1.0);
    let signs: Vec<f64> = v
        .iter()
        .map(|x| x - level)
        .filter(|d| d.abs() > eps)
        .map(f64::signum)
        .collect();
    let mut crossing_count = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if grid.is_periodic() && signs.len() > 1 && signs[0] != signs[signs.len() - 1] {
        crossing_count += 1;
    }
    let max_amplitude = v.iter().map(|x| (x - level).abs()).fold(0.0, f64::max);

    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = v.iter().map(|x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (best, mag) = (1..=n / 2)
        .map(|k| (k, buf[k].norm()))
        .fold((0, 0.0), |acc, (k, m)| if m > acc.1 { (k, m) } else { acc });
    let sample_length = n as f64 * grid.spacing();
    let dominant_wavelength = if best == 0 || mag <= 1e-12 * n as f64 * eps {
        0.0
    } else {
        sample_length / best as f64
    };
    PatternMetrics {
        crossing_count,
        max_amplitude,
        dominant_wavelength,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HairTriggerReport {
    pub compact_set: (f64, f64),
    pub steady_state: f64,
    pub tol: f64,
    pub horizon: f64,
    /// `(t, sup_{[a,b]} |u - kappa^(-1/beta)|)` per snapshot.
    pub sup_distance_series: Vec<(f64, f64)>,
    pub converged: bool,
    /// First snapshot time after which the distance stays below `tol`.
    pub converged_at: Option<f64>,
    /// `0 <= u0 <= kappa^(-1/beta)`.
    pub hypothesis_a: bool,
    /// Windowed integrals of `ln u0` (`alpha = 1`) or `u0^(1-alpha)` are bounded.
    pub hypothesis_b: bool,
    /// Sup over nodes of the absolute windowed integral; `None` when unbounded.
    pub hypothesis_b_sup: Option<f64>,
    pub final_pattern: PatternMetrics,
}

/// Distance to the steady state on `compact_set` along the run, and the hypotheses on `u0`.
pub fn hair_trigger_diagnose(
    run: &RunOutcome,
    params: &ModelParams,
    compact_set: (f64, f64),
    tol: f64,
    horizon: f64,
    delta: f64,
) -> Result<HairTriggerReport, LyapunovError> {
    hair_trigger_from_snapshots(&run.snapshots, params, compact_set, tol, horizon, delta)
}

/// [`hair_trigger_diagnose`] on an explicit snapshot sequence (the first one is `u0`).
pub fn hair_trigger_from_snapshots(
    snapshots: &[Field],
    params: &ModelParams,
    compact_set: (f64, f64),
    tol: f64,
    horizon: f64,
    delta: f64,
) -> Result<HairTriggerReport, LyapunovError> {
    params.validate()?;
    let first = snapshots.first().ok_or(LyapunovError::TooFewSnapshots(0))?;
    let last = snapshots.last().expect("non-empty");
    let grid = first.grid();
    let (a, b) = compact_set;
    if !(a <= b && a > grid.x_left() && b < grid.x_right()) {
        return Err(LyapunovError::InvalidInput {
            name: "compact_set",
            value: a,
            reason: "must be an interval strictly inside the grid",
        });
    }
    let c = params.steady_state();
    let inside: Vec<usize> = (0..grid.node_count())
        .filter(|&i| (a..=b).contains(&grid.x(i)))
        .collect();
    let series: Vec<(f64, f64)> = snapshots
        .iter()
        .map(|s| {
            let d = inside.iter().map(|&i| (s.values()[i] - c).abs()).fold(0.0, f64::max);
            (s.time(), d)
        })
        .collect();
    // earliest index from which every later distance is below tol
    let mut start = series.len();
    while start > 0 && series[start - 1].1 < tol {
        start -= 1;
    }
    let converged_at = series.get(start).filter(|(t, _)| *t <= horizon).map(|(t, _)| *t);

    let u0 = first.values();
    let hypothesis_a = u0.iter().all(|&v| v >= 0.0 && v <= c * (1.0 + BOUND_SLACK));
    let config = LyapunovConfig::new(delta);
    let m = config.window_nodes(grid)?;
    let alpha = params.alpha;
    let integrand = |u: f64, _node: usize| -> Result<f64, LyapunovError> {
        Ok(if alpha == 1.0 { u.ln() } else { u.powf(1.0 - alpha) })
    };
    let b_sup = window_integrals(u0, grid, m, 0..grid.node_count(), &integrand)?
        .into_iter()
        .map(f64::abs)
        .fold(0.0_f64, |acc, v| if v.is_nan() { f64::INFINITY } else { acc.max(v) });
    let hypothesis_b_sup = b_sup.is_finite().then_some(b_sup);

    Ok(HairTriggerReport {
        compact_set,
        steady_state: c,
        tol,
        horizon,
        sup_distance_series: series,
        converged: converged_at.is_some(),
        converged_at,
        hypothesis_a,
        hypothesis_b: hypothesis_b_sup.is_some(),
        hypothesis_b_sup,
        final_pattern: pattern_metrics(last, c),
    })
}
