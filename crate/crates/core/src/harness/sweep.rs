use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};
use crate::solver::{run, RunStatus};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "NLFKPP_THREADS";

/// Interior points evaluated per bisection round (fixed so results do not depend on the thread count).
const POINTS_PER_ROUND: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Alpha,
    Beta,
    Mu,
    Kappa,
    Diffusion,
    Sigma,
}

impl std::str::FromStr for SweepParam {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        // accept "alpha" as well as "params.alpha"
        let key = s.rsplit('.').next().unwrap_or(s);
        Ok(match key.to_ascii_lowercase().as_str() {
            "alpha" => SweepParam::Alpha,
            "beta" => SweepParam::Beta,
            "mu" => SweepParam::Mu,
            "kappa" => SweepParam::Kappa,
            "diffusion" => SweepParam::Diffusion,
            "sigma" => SweepParam::Sigma,
            _ => return Err(HarnessError::Config(format!("cannot sweep parameter '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SweepMode {
    /// Smallest value in `[lo, hi]` that blows up, to within `tol`.
    Bisect { lo: f64, hi: f64, tol: f64 },
    /// Status for every listed value.
    Scan { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    #[serde(flatten)]
    pub mode: SweepMode,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        match &self.mode {
            SweepMode::Bisect { lo, hi, tol } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi && *tol > 0.0) {
                    return Err(HarnessError::Config(format!(
                        "bisection needs finite lo < hi and tol > 0, got [{lo}, {hi}] tol {tol}"
                    )));
                }
            }
            SweepMode::Scan { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(HarnessError::Config("scan needs a non-empty list of finite values".into()));
                }
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    /// Copy with one parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self, HarnessError> {
        let mut c = self.clone();
        let p = &mut c.params.params;
        match param {
            SweepParam::Alpha => p.alpha = value,
            SweepParam::Beta => p.beta = value,
            SweepParam::Mu => p.mu = value,
            SweepParam::Kappa => p.kappa = value,
            SweepParam::Diffusion => p.diffusion = value,
            SweepParam::Sigma => c.params.kernel = c.params.kernel.with_sigma(value)?,
        }
        c.params.params.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub status: RunStatus,
    pub blow_up: bool,
    pub final_time: f64,
    pub max_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub param: SweepParam,
    pub mode: SweepMode,
    /// Bisection: smallest value seen to blow up once the bracket is below `tol`.
    pub threshold: Option<f64>,
    /// Bisection: `(largest bounded, smallest blow-up)` value.
    pub bracket: Option<(f64, f64)>,
    /// Every run, sorted by value.
    pub evaluations: Vec<Evaluation>,
}

/// `NLFKPP_THREADS` if set to a positive integer, else the number of available cores.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn evaluate(config: &ExperimentConfig, param: SweepParam, value: f64) -> Result<Evaluation, HarnessError> {
    let c = config.with_param(param, value)?;
    let u0 = c.initial_field()?;
    let mut solver = c.solver.clone();
    solver.snapshot_stride = usize::MAX;
    let out = run(&u0, c.params(), c.kernel(), &solver)?;
    Ok(Evaluation {
        value,
        status: out.status,
        blow_up: out.status.is_blow_up(),
        final_time: out.history.last().map_or(0.0, |r| r.t),
        max_sup: out.history.iter().map(|r| r.sup_u).fold(0.0, f64::max),
    })
}

fn evaluate_all(
    pool: &rayon::ThreadPool,
    config: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<Evaluation>, HarnessError> {
    pool.install(|| values.par_iter().map(|&v| evaluate(config, param, v)).collect())
}

/// Run the sweep in `config.sweep` (or `spec` when given) on up to [`thread_count`] threads.
pub fn sweep(config: &ExperimentConfig, spec: Option<&SweepSpec>) -> Result<SweepReport, HarnessError> {
    let spec = spec
        .or(config.sweep.as_ref())
        .ok_or_else(|| HarnessError::Config("no sweep specified".into()))?;
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let param = spec.param;

    let mut report = SweepReport {
        param,
        mode: spec.mode.clone(),
        threshold: None,
        bracket: None,
        evaluations: Vec::new(),
    };
    match &spec.mode {
        SweepMode::Scan { values } => {
            report.evaluations = evaluate_all(&pool, config, param, values)?;
        }
        SweepMode::Bisect { lo, hi, tol } => {
            let ends = evaluate_all(&pool, config, param, &[*lo, *hi])?;
            if ends[0].blow_up || !ends[1].blow_up {
                return Err(HarnessError::ThresholdOutsideRange {
                    lo: *lo,
                    hi: *hi,
                    lo_blows_up: ends[0].blow_up,
                    hi_blows_up: ends[1].blow_up,
                });
            }
            report.evaluations.extend(ends);
            let (mut a, mut b) = (*lo, *hi);
            while b - a > *tol {
                let points: Vec<f64> = (1..=POINTS_PER_ROUND)
                    .map(|i| a + (b - a) * i as f64 / (POINTS_PER_ROUND + 1) as f64)
                    .collect();
                let evals = evaluate_all(&pool, config, param, &points)?;
                match evals.iter().position(|e| e.blow_up) {
                    Some(0) => b = points[0],
                    Some(j) => {
                        a = points[j - 1];
                        b = points[j];
                    }
                    None => a = points[POINTS_PER_ROUND - 1],
                }
                report.evaluations.extend(evals);
            }
            report.threshold = Some(b);
            report.bracket = Some((a, b));
            report.evaluations.sort_by(|x, y| x.value.total_cmp(&y.value));
        }
    }
    Ok(report)
}
