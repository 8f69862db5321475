//! Command-line front end: `nlfkpp <subcommand>`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 blow-up detected (`simulate`), 3 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nlfkpp::bounds::{bound_m, BoundInputs};
use nlfkpp::harness::{
    diagnose_snapshots, kinetic_limit_table, preset_names, read_snapshots_ndjson, run_preset, simulate, sweep,
    write_outputs, ExperimentConfig, HarnessError, SweepMode, SweepParam, SweepSpec,
};

#[derive(Parser)]
#[command(name = "nlfkpp", version, about = "Nonlocal Fisher-KPP simulations and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Bisect,
    Scan,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write snapshots, summary, diagnostics and plot data.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the explicit bound constants for the inputs in the config file.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Diagnose stored snapshots.
    Diagnose {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Threshold search (bisect) or status table (scan) over one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Comma-separated values for scan mode.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Compare the two-speed kinetic model with its parabolic limit.
    KineticLimit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Run a figure preset into `<out>/<name>`.
    Preset {
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    Ok(ExperimentConfig::from_path(path)?)
}

fn sweep_spec(
    config: &ExperimentConfig,
    param: Option<String>,
    lo: Option<f64>,
    hi: Option<f64>,
    mode: Option<Mode>,
    tol: f64,
    values: Option<Vec<f64>>,
) -> Result<Option<SweepSpec>, Failure> {
    if param.is_none() && mode.is_none() && lo.is_none() && hi.is_none() && values.is_none() {
        return Ok(None);
    }
    let param: SweepParam = match param {
        Some(p) => p.parse()?,
        None => config
            .sweep
            .as_ref()
            .map(|s| s.param)
            .ok_or_else(|| Failure::Config("--param is required".into()))?,
    };
    let mode = match (mode, values) {
        (Some(Mode::Scan), Some(values)) | (None, Some(values)) => SweepMode::Scan { values },
        (Some(Mode::Scan), None) => return Err(Failure::Config("scan mode needs --values".into())),
        (_, _) => match (lo, hi) {
            (Some(lo), Some(hi)) => SweepMode::Bisect { lo, hi, tol },
            _ => return Err(Failure::Config("bisect mode needs --lo and --hi".into())),
        },
    };
    Ok(Some(SweepSpec { param, mode }))
}

fn execute(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Simulate { config, out } => {
            let config = load(&config)?;
            let sim = simulate(&config)?;
            write_outputs(&out, &config, &sim)?;
            print_json(&sim.diagnostics);
            Ok(if sim.outcome.status.is_blow_up() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Bounds { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Failure::Runtime(format!("{}: {e}", config.display())))?;
            let inputs: BoundInputs = serde_json::from_str(&text).map_err(|e| Failure::Config(e.to_string()))?;
            let report = bound_m(&inputs).map_err(HarnessError::from)?;
            print_json(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Diagnose { snapshots, config } => {
            let config = load(&config)?;
            let fields = read_snapshots_ndjson(&snapshots, &config.grid)?;
            let report = diagnose_snapshots(&config, &fields, None)?;
            print_json(&serde_json::json!({
                "hair_trigger": report.hair_trigger,
                "lyapunov_residuals": report.lyapunov_residuals,
                "pattern": report.pattern,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            param,
            lo,
            hi,
            mode,
            tol,
            values,
        } => {
            let config = load(&config)?;
            let spec = sweep_spec(&config, param, lo, hi, mode, tol, values)?;
            let report = sweep(&config, spec.as_ref())?;
            print_json(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::KineticLimit { config, eps } => {
            let config = load(&config)?;
            let report = kinetic_limit_table(&config, eps.as_deref())?;
            println!("eps,error,order");
            for r in &report.rows {
                let order = r.order.map(nlfkpp::harness::fmt17).unwrap_or_default();
                println!("{},{},{}", nlfkpp::harness::fmt17(r.eps), nlfkpp::harness::fmt17(r.error), order);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Preset { name, out } => {
            if !preset_names().contains(&name.as_str()) {
                return Err(Failure::Config(format!(
                    "unknown preset '{name}'; available: {}",
                    preset_names().join(", ")
                )));
            }
            let outcome = run_preset(&name, &out)?;
            eprintln!("wrote {}", outcome.dir.display());
            print_json(&outcome.diagnostics);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
