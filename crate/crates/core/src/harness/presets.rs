use std::path::{Path, PathBuf};

use super::{
    simulate, write_outputs, Diagnostics, DiagnosticsConfig, ExperimentConfig, HairTriggerSettings, HarnessError,
    InitialCondition,
};
use crate::model::{Boundary, Grid1D, Kernel, ModelParams, ModelSpec};
use crate::solver::SolverConfig;

const NAMES: [&str; 24] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f", "fig1g", "fig1h", "fig1i", "fig2a", "fig2b", "fig2c",
    "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4a", "fig4b", "fig4c", "fig4d", "fig5", "fig6",
];

/// Registered preset names, in figure order.
pub fn preset_names() -> &'static [&'static str] {
    &NAMES
}

fn front(alpha: f64, mu: f64, diffusion: f64, kernel: Kernel) -> ExperimentConfig {
    ExperimentConfig {
        name: None,
        params: ModelSpec {
            params: ModelParams {
                alpha,
                beta: 1.0,
                mu,
                kappa: 1.0,
                diffusion,
            },
            kernel,
        },
        grid: Grid1D::new(-5.0, 5.0, 1000, Boundary::DirichletExtension { left: 1.0, right: 0.0 })
            .expect("static grid"),
        initial: InitialCondition::PaperFront,
        solver: SolverConfig {
            dt_initial: 1e-3,
            t_end: 30.0,
            snapshot_stride: 1000,
            ..SolverConfig::default()
        },
        diagnostics: DiagnosticsConfig::default(),
        display_times: None,
        sweep: None,
        kinetic: None,
    }
}

fn bump(alpha: f64, beta: f64, mu: f64, kappa: f64, kernel: Kernel, t_end: f64) -> ExperimentConfig {
    ExperimentConfig {
        name: None,
        params: ModelSpec {
            params: ModelParams {
                alpha,
                beta,
                mu,
                kappa,
                diffusion: 1.0,
            },
            kernel,
        },
        grid: Grid1D::periodic(-5.0, 5.0, 1000).expect("static grid"),
        initial: InitialCondition::OscillatoryBump {
            amplitude: 0.2,
            wavenumber: 3.0,
            floor: 0.01,
        },
        solver: SolverConfig {
            dt_initial: 1e-3,
            t_end,
            snapshot_stride: 1000,
            ..SolverConfig::default()
        },
        diagnostics: DiagnosticsConfig {
            lyapunov: None,
            hair_trigger: Some(HairTriggerSettings {
                compact_set: (-2.0, 2.0),
                tol: 1e-2,
                horizon: Some(t_end),
                delta: 0.2,
            }),
        },
        display_times: None,
        sweep: None,
        kinetic: None,
    }
}

/// Configuration behind a figure preset.
///
/// Figure 1 and 2 presets start from the front profile on `[-5, 5]` with `u = 1` to the left
/// and `u = 0` to the right, up to `t = 30`. Figures 3 to 6 start from the oscillatory bump on a
/// periodic domain of length 10. `fig3a` only records the initial condition.
pub fn preset(name: &str) -> Result<ExperimentConfig, HarnessError> {
    let (u, l) = (Kernel::uniform(), Kernel::logistic());
    let mut c = match name {
        "fig1a" => front(1.0, 1.0, 1.0, u),
        "fig1b" => front(3000.0, 1.0, 1.0, u),
        "fig1c" => front(2.8, 1.0, 0.0, u),
        "fig1d" => front(2.0, 10.0, 1.0, u),
        "fig1e" => front(6.0, 10.0, 1.0, u),
        "fig1f" => front(1.9, 10.0, 0.0, u),
        "fig1g" => front(2.0, 100.0, 1.0, u),
        "fig1h" => front(2.56, 100.0, 1.0, u),
        "fig1i" => front(1.2, 100.0, 0.0, u),
        "fig2a" => front(4.22, 10.0, 1.0, l),
        "fig2b" => front(2.3, 100.0, 1.0, l),
        "fig2c" => front(3.0, 1.0, 0.0, l),
        "fig3a" => {
            let mut c = bump(1.5, 1.0, 1.0, 1.0, u, 1.0);
            c.display_times = Some(vec![0.0]);
            c
        }
        "fig3b" => bump(1.5, 1.0, 1.0, 1.0, u, 50.0),
        "fig3c" => bump(1.5, 1.0, 50.0, 1.0, u, 50.0),
        "fig3d" => bump(1.5, 1.0, 150.0, 1.0, u, 50.0),
        "fig3e" => bump(2.0, 1.0, 150.0, 1.0, u, 50.0),
        "fig3f" => bump(4.0, 1.0, 150.0, 1.0, u, 50.0),
        "fig4a" => bump(1.5, 1.0, 1.0, 1.0, l, 50.0),
        "fig4b" => bump(1.5, 1.0, 50.0, 1.0, l, 50.0),
        "fig4c" => bump(1.5, 1.0, 150.0, 1.0, l, 50.0),
        "fig4d" => bump(3.8, 1.0, 150.0, 1.0, l, 50.0),
        "fig5" => {
            let mut c = bump(1.1, 0.1, 150.0, 0.2, u, 100.0);
            c.display_times = Some(vec![0.0, 1.25, 100.0]);
            c
        }
        "fig6" => {
            let mut c = bump(1.09, 0.1, 48.0, 0.01, u, 100.0);
            c.display_times = Some(vec![0.0, 1.295, 100.0]);
            // the plateau kappa^(-1/beta) = 1e20 lies above the default threshold
            c.solver.blowup_threshold = 1e25;
            c
        }
        other => return Err(HarnessError::UnknownPreset(other.to_string())),
    };
    c.name = Some(name.to_string());
    Ok(c)
}

#[derive(Debug, Clone)]
pub struct PresetOutcome {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub diagnostics: Diagnostics,
}

/// Run a preset and write its artifacts into `out_root/<name>`.
pub fn run_preset(name: &str, out_root: &Path) -> Result<PresetOutcome, HarnessError> {
    let config = preset(name)?;
    let sim = simulate(&config)?;
    let dir = out_root.join(name);
    write_outputs(&dir, &config, &sim)?;
    Ok(PresetOutcome {
        dir,
        config,
        diagnostics: sim.diagnostics,
    })
}
