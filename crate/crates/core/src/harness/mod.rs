//! Experiment configuration, figure presets, parameter sweeps and output files.

mod io;
mod presets;
mod sweep;

pub use io::{
    fmt17, read_snapshots_ndjson, write_json, write_profile_csv, write_snapshots_ndjson, write_summary_csv,
    SnapshotLine,
};
pub use presets::{preset, preset_names, run_preset, PresetOutcome};
pub use sweep::{
    sweep, thread_count, Evaluation, SweepMode, SweepParam, SweepReport, SweepSpec, THREADS_ENV,
};

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundsError;
use crate::kinetic::{kinetic_limit, KineticError, LimitReport};
use crate::lyapunov::{
    hair_trigger_from_snapshots, monitor_snapshots, pattern_metrics, HairTriggerReport, LyapunovConfig,
    LyapunovError, MonitorReport, PatternMetrics,
};
use crate::model::{paper_initial_condition, Field, Grid1D, Kernel, ModelError, ModelParams, ModelSpec};
use crate::solver::{run, RunOutcome, RunStatus, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("threshold outside range [{lo}, {hi}]: blow-up at lo = {lo_blows_up}, at hi = {hi_blows_up}")]
    ThresholdOutsideRange {
        lo: f64,
        hi: f64,
        lo_blows_up: bool,
        hi_blows_up: bool,
    },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Errors caused by the configuration rather than by the run.
    pub fn is_config_error(&self) -> bool {
        match self {
            HarnessError::Config(_) | HarnessError::Model(_) | HarnessError::UnknownPreset(_) => true,
            HarnessError::Solver(e) => matches!(e, SolverError::InvalidConfig(_) | SolverError::Model(_)),
            HarnessError::Bounds(e) => matches!(e, BoundsError::InvalidInput { .. } | BoundsError::OutsideRegime { .. }),
            HarnessError::Lyapunov(e) => matches!(
                e,
                LyapunovError::InvalidInput { .. } | LyapunovError::Model(_) | LyapunovError::RemovableSingularity
            ),
            HarnessError::Kinetic(e) => matches!(e, KineticError::InvalidInput { .. } | KineticError::Model(_)),
            _ => false,
        }
    }
}

fn default_amplitude() -> f64 {
    0.2
}

fn default_wavenumber() -> f64 {
    3.0
}

fn default_floor() -> f64 {
    0.01
}

fn default_spread() -> f64 {
    0.1
}

/// Initial data `u0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `1` left of `x_l`, Gaussian shoulder to `0`, linear ramp to `x_r`, `0` beyond.
    PaperFront,
    /// `floor + amplitude (1 + cos(k x)) / 2`.
    OscillatoryBump {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_wavenumber")]
        wavenumber: f64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
    /// `level (1 + spread xi)` with `xi` uniform on `[-1, 1)` from a ChaCha8 stream seeded by `seed`.
    ConstantTimesNoise {
        level: f64,
        seed: u64,
        #[serde(default = "default_spread")]
        spread: f64,
    },
    /// JSON file holding an array of nodal values or a snapshot object `{"t":..,"values":[..]}`.
    Custom { file: PathBuf },
}

impl InitialCondition {
    pub fn build(&self, grid: &Grid1D) -> Result<Field, HarnessError> {
        match self {
            InitialCondition::PaperFront => {
                if !(grid.x_left() < 0.0 && 0.0 < grid.x_right()) {
                    return Err(HarnessError::Config("paper_front needs x_left < 0 < x_right".into()));
                }
                Ok(paper_initial_condition(grid))
            }
            InitialCondition::OscillatoryBump {
                amplitude,
                wavenumber,
                floor,
            } => Ok(crate::model::oscillatory_bump(grid, *amplitude, *wavenumber, *floor)),
            InitialCondition::ConstantTimesNoise { level, seed, spread } => {
                if !(*spread >= 0.0 && *spread <= 1.0) {
                    return Err(HarnessError::Config(format!("noise spread {spread} must lie in [0, 1]")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let values = (0..grid.node_count())
                    .map(|_| level * (1.0 + spread * rng.gen_range(-1.0..1.0)))
                    .collect();
                Ok(Field::new(grid.clone(), values, 0.0)?)
            }
            InitialCondition::Custom { file } => {
                let text = std::fs::read_to_string(file).map_err(|e| HarnessError::io(file, e))?;
                let values: Vec<f64> = match serde_json::from_str::<serde_json::Value>(&text) {
                    Ok(serde_json::Value::Array(_)) => serde_json::from_str(&text),
                    Ok(_) => serde_json::from_str::<SnapshotLine>(&text).map(|s| s.values),
                    // NDJSON: the first line is the initial snapshot
                    Err(_) => serde_json::from_str::<SnapshotLine>(text.lines().next().unwrap_or("")).map(|s| s.values),
                }
                .map_err(|e| HarnessError::Config(format!("{}: {e}", file.display())))?;
                Ok(Field::new(grid.clone(), values, 0.0)?)
            }
        }
    }
}

/// Hair-trigger check settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HairTriggerSettings {
    pub compact_set: (f64, f64),
    #[serde(default = "default_hair_tol")]
    pub tol: f64,
    /// Defaults to the run's end time.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Window half-width for hypothesis (B).
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_hair_tol() -> f64 {
    1e-2
}

fn default_delta() -> f64 {
    0.2
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsConfig {
    pub lyapunov: Option<LyapunovConfig>,
    pub hair_trigger: Option<HairTriggerSettings>,
}

impl DiagnosticsConfig {
    fn needs_positive_data(&self) -> bool {
        self.lyapunov.is_some() || self.hair_trigger.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KineticSettings {
    pub speed: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub eps: Vec<f64>,
}

impl Default for KineticSettings {
    fn default() -> Self {
        Self {
            speed: 1.0,
            t_end: 1.0,
            cfl: 0.9,
            eps: vec![0.1, 0.05, 0.025],
        }
    }
}

/// One experiment: model, grid, initial data, solver settings and optional extras.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub params: ModelSpec,
    pub grid: Grid1D,
    pub initial: InitialCondition,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    /// Times written to the plot CSV; `{0, t_end/4, t_end/2, t_end}` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic: Option<KineticSettings>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> &ModelParams {
        &self.params.params
    }

    pub fn kernel(&self) -> &Kernel {
        &self.params.kernel
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.params.params.validate()?;
        self.solver.validate()?;
        let u0 = self.initial.build(&self.grid)?;
        if let Some((i, v)) = u0.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(HarnessError::Config(format!("initial value {v} at node {i} is negative")));
        }
        if self.diagnostics.needs_positive_data() && u0.min() <= 0.0 {
            return Err(HarnessError::Config(
                "Lyapunov and hair-trigger diagnostics need strictly positive initial data".into(),
            ));
        }
        if let Some(h) = &self.diagnostics.hair_trigger {
            let (a, b) = h.compact_set;
            if !(a <= b && a > self.grid.x_left() && b < self.grid.x_right()) {
                return Err(HarnessError::Config(format!(
                    "compact set [{a}, {b}] must lie strictly inside the grid"
                )));
            }
        }
        if let Some(times) = &self.display_times {
            if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(HarnessError::Config("display times must be finite and >= 0".into()));
            }
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn display_times(&self) -> Vec<f64> {
        let t = self.solver.t_end;
        self.display_times.clone().unwrap_or_else(|| vec![0.0, 0.25 * t, 0.5 * t, t])
    }

    pub fn initial_field(&self) -> Result<Field, HarnessError> {
        self.initial.build(&self.grid)
    }

    /// Solver settings with the display times added as output times.
    fn solver_config(&self) -> SolverConfig {
        let mut solver = self.solver.clone();
        solver.snapshot_times.extend(self.display_times());
        solver
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternAt {
    pub t: f64,
    pub metrics: PatternMetrics,
}

/// Monitor result, or the reason it was not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MonitorOutcome {
    Report(MonitorReport),
    Refused { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub status: RunStatus,
    pub final_time: f64,
    pub final_sup: f64,
    pub final_inf: f64,
    pub steady_state: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub clamped_values: usize,
    pub hair_trigger: Option<HairTriggerReport>,
    pub lyapunov_residuals: Option<MonitorOutcome>,
    pub pattern: Vec<PatternAt>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub outcome: RunOutcome,
    pub diagnostics: Diagnostics,
}

impl Simulation {
    /// Snapshots closest to each display time, plus the last state of a blown-up run.
    pub fn display_snapshots(&self, times: &[f64]) -> Vec<Field> {
        let mut out: Vec<Field> = Vec::new();
        let last = self.outcome.final_field().time();
        for &t in times {
            if t > last + 1e-12 {
                continue;
            }
            let f = self.outcome.snapshot_near(t);
            if out.last().map(|g| g.time()) != Some(f.time()) {
                out.push(f.clone());
            }
        }
        let final_field = self.outcome.final_field();
        if out.last().map(|g| g.time()) != Some(final_field.time()) && !self.outcome.status.is_bounded() {
            out.push(final_field.clone());
        }
        out
    }
}

/// Run the configured experiment and evaluate the requested diagnostics.
pub fn simulate(config: &ExperimentConfig) -> Result<Simulation, HarnessError> {
    config.validate()?;
    let u0 = config.initial_field()?;
    let outcome = run(&u0, config.params(), config.kernel(), &config.solver_config())?;
    let diagnostics = diagnose_snapshots(config, &outcome.snapshots, Some(&outcome))?;
    Ok(Simulation { outcome, diagnostics })
}

/// Diagnostics from stored snapshots; `outcome` adds the run statistics when available.
pub fn diagnose_snapshots(
    config: &ExperimentConfig,
    snapshots: &[Field],
    outcome: Option<&RunOutcome>,
) -> Result<Diagnostics, HarnessError> {
    let last = snapshots
        .last()
        .ok_or_else(|| HarnessError::Config("no snapshots to diagnose".into()))?;
    let params = config.params();
    let steady = params.steady_state();

    let hair_trigger = match &config.diagnostics.hair_trigger {
        Some(h) => Some(hair_trigger_from_snapshots(
            snapshots,
            params,
            h.compact_set,
            h.tol,
            h.horizon.unwrap_or(last.time()),
            h.delta,
        )?),
        None => None,
    };
    let lyapunov_residuals = match &config.diagnostics.lyapunov {
        Some(l) => Some(match monitor_snapshots(snapshots, params, config.kernel(), l) {
            Ok(report) => MonitorOutcome::Report(report),
            Err(
                e @ (LyapunovError::HypothesisViolation { .. }
                | LyapunovError::NonPositive { .. }
                | LyapunovError::TooFewSnapshots(_)),
            ) => MonitorOutcome::Refused { reason: e.to_string() },
            Err(e) => return Err(e.into()),
        }),
        None => None,
    };
    let mut pattern = Vec::new();
    for &t in &config.display_times() {
        if t > last.time() + 1e-12 {
            continue;
        }
        let f = snapshots
            .iter()
            .min_by(|a, b| (a.time() - t).abs().total_cmp(&(b.time() - t).abs()))
            .expect("non-empty");
        if pattern.last().map(|p: &PatternAt| p.t) != Some(f.time()) {
            pattern.push(PatternAt {
                t: f.time(),
                metrics: pattern_metrics(f, steady),
            });
        }
    }
    let status = outcome.map(|o| o.status).unwrap_or(RunStatus::CompletedBounded);
    Ok(Diagnostics {
        status,
        final_time: last.time(),
        final_sup: last.sup_abs(),
        final_inf: last.min(),
        steady_state: steady,
        accepted_steps: outcome.map_or(0, |o| o.accepted_steps),
        rejected_steps: outcome.map_or(0, |o| o.rejected_steps),
        clamped_values: outcome.map_or(0, |o| o.clamped_values),
        hair_trigger,
        lyapunov_residuals,
        pattern,
    })
}

/// Write `snapshots.ndjson`, `summary.csv`, `diagnostics.json`, `profile.csv` and `config.json` into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, sim: &Simulation) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_snapshots_ndjson(&dir.join("snapshots.ndjson"), &sim.outcome.snapshots)?;
    write_summary_csv(&dir.join("summary.csv"), &sim.outcome.history)?;
    write_json(&dir.join("diagnostics.json"), &sim.diagnostics)?;
    write_profile_csv(&dir.join("profile.csv"), &sim.display_snapshots(&config.display_times()))?;
    write_json(&dir.join("config.json"), config)?;
    Ok(())
}

/// Kinetic-limit table for the configured initial data; needs a periodic grid.
pub fn kinetic_limit_table(config: &ExperimentConfig, eps: Option<&[f64]>) -> Result<LimitReport, HarnessError> {
    config.validate()?;
    let settings = config.kinetic.clone().unwrap_or_default();
    let eps = eps.unwrap_or(&settings.eps);
    if eps.is_empty() {
        return Err(HarnessError::Config("no eps values given".into()));
    }
    let u0 = config.initial_field()?;
    Ok(kinetic_limit(
        &u0,
        config.params(),
        config.kernel(),
        settings.speed,
        eps,
        settings.t_end,
        settings.cfl,
    )?)
}
