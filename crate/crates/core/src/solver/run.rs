use super::conv::NEG_TOLERANCE;
use super::integrate::advance;
use super::ops::Discretization;
use super::{BlowUpCause, HistoryRow, Integrator, RunOutcome, RunStatus, SolverConfig, SolverError};
use crate::model::{Field, Kernel, ModelParams};

/// Sup-norm growth factor per step that triggers a retry with half the step.
const GROWTH_LIMIT: f64 = 2.0;
/// Accepted steps without a rejection before `dt` is doubled again.
const QUIET_STEPS: usize = 50;

/// Integrate from `initial` to `config.t_end` or until blow-up.
pub fn run(
    initial: &Field,
    params: &ModelParams,
    kernel: &Kernel,
    config: &SolverConfig,
) -> Result<RunOutcome, SolverError> {
    let disc = Discretization::new(initial.grid(), params, kernel, config.convolution_method)?;
    run_with(&disc, initial, config)
}

enum Rejection {
    Growth,
    Negative,
}

/// [`run`] on a prebuilt discretization.
pub fn run_with(disc: &Discretization, initial: &Field, config: &SolverConfig) -> Result<RunOutcome, SolverError> {
    config.validate()?;
    if initial.grid() != disc.grid() {
        return Err(SolverError::InvalidConfig("initial field lives on a different grid".into()));
    }
    let grid = initial.grid().clone();
    let dt_cap = match config.integrator {
        Integrator::Rk4 => config.dt_initial.min(disc.explicit_dt_limit(config.cfl_safety)),
        Integrator::Imex => config.dt_initial,
    };
    let mut targets: Vec<f64> = config
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > initial.time() && t < config.t_end)
        .collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    targets.push(config.t_end);
    let mut next_target = 0;
    let mut u = initial.values().to_vec();
    disc.apply_boundary(&mut u);

    // only a level well above the steady state and the initial data signals collapse;
    // kernels narrower than a cell push it below both
    let saturation = config.saturation_fraction * disc.saturation_level();
    let resolvable = 2.0 * disc.params().steady_state().max(u.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    let saturation = if saturation > resolvable { saturation } else { f64::INFINITY };
    let mut t = initial.time();
    let mut dt = dt_cap;
    let mut quiet = 0;
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let inf = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let location = |v: &[f64]| {
        let (i, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) });
        grid.x(i)
    };

    let mut out = RunOutcome {
        status: RunStatus::CompletedBounded,
        snapshots: vec![Field::new(grid.clone(), u.clone(), t)?],
        history: vec![HistoryRow {
            t,
            sup_u: sup(&u),
            inf_u: inf(&u),
            dt: 0.0,
        }],
        clamped_values: 0,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if sup(&u) >= config.blowup_threshold.min(saturation) {
        out.status = RunStatus::BlowUpDetected {
            time: t,
            location: location(&u),
            cause: if sup(&u) >= config.blowup_threshold {
                BlowUpCause::Threshold
            } else {
                BlowUpCause::GridSaturation
            },
        };
        return Ok(out);
    }

    while next_target < targets.len() {
        let target = targets[next_target];
        let remaining = target - t;
        // land exactly on the target instead of leaving a sliver
        let (h, hits) = if dt >= remaining {
            (remaining, true)
        } else if remaining < 1.01 * dt {
            (0.5 * remaining, false)
        } else {
            (dt, false)
        };
        let sup_old = sup(&u);
        let attempt = advance(disc, config.integrator, config.cfl_safety, &u, h);
        let rejection = match attempt {
            // a non-finite trial value is treated like excessive growth: retry smaller
            Err(SolverError::NonFinite { .. }) => Some(Rejection::Growth),
            Err(SolverError::NegativeValue { .. }) => Some(Rejection::Negative),
            Err(e) => return Err(e),
            Ok(new) => {
                let s = sup(&new);
                if s > GROWTH_LIMIT * sup_old && sup_old > 0.0 {
                    Some(Rejection::Growth)
                } else if inf(&new) < -NEG_TOLERANCE {
                    Some(Rejection::Negative)
                } else {
                    for v in u.iter_mut().zip(new) {
                        *v.0 = if (-NEG_TOLERANCE..0.0).contains(&v.1) {
                            out.clamped_values += 1;
                            0.0
                        } else {
                            v.1
                        };
                    }
                    None
                }
            }
        };

        match rejection {
            Some(kind) => {
                out.rejected_steps += 1;
                quiet = 0;
                dt = 0.5 * h;
                if dt < config.dt_min {
                    out.status = match kind {
                        Rejection::Growth => RunStatus::BlowUpDetected {
                            time: t,
                            location: location(&u),
                            cause: BlowUpCause::UnresolvedGrowth,
                        },
                        Rejection::Negative => RunStatus::DtUnderflow { time: t },
                    };
                    break;
                }
            }
            None => {
                t = if hits { target } else { t + h };
                out.accepted_steps += 1;
                out.history.push(HistoryRow {
                    t,
                    sup_u: sup(&u),
                    inf_u: inf(&u),
                    dt: h,
                });
                if hits {
                    next_target += 1;
                }
                let s = sup(&u);
                let cause = if s >= config.blowup_threshold {
                    Some(BlowUpCause::Threshold)
                } else if s >= saturation {
                    Some(BlowUpCause::GridSaturation)
                } else {
                    None
                };
                if let Some(cause) = cause {
                    out.status = RunStatus::BlowUpDetected {
                        time: t,
                        location: location(&u),
                        cause,
                    };
                    break;
                }
                if hits || out.accepted_steps.is_multiple_of(config.snapshot_stride) {
                    out.snapshots.push(Field::new(grid.clone(), u.clone(), t)?);
                }
                quiet += 1;
                if quiet >= QUIET_STEPS && dt < dt_cap {
                    dt = (2.0 * dt).min(dt_cap);
                    quiet = 0;
                }
            }
        }
    }
    if !out.status.is_bounded() && out.snapshots.last().map(|f| f.time()) != Some(t) {
        out.snapshots.push(Field::new(grid.clone(), u, t)?);
    }
    Ok(out)
}
