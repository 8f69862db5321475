use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn nlfkpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlfkpp")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn front_config(alpha: f64, t_end: f64) -> Value {
    json!({
        "params": { "alpha": alpha, "beta": 1.0, "mu": 10.0, "kappa": 1.0 },
        "grid": { "x_left": -5.0, "x_right": 5.0, "n_cells": 200,
                  "boundary": { "type": "dirichlet", "left": 1.0, "right": 0.0 } },
        "initial": { "type": "paper_front" },
        "solver": { "dt_initial": 1e-3, "t_end": t_end, "snapshot_stride": 200 }
    })
}

fn bump_config() -> Value {
    json!({
        "params": { "alpha": 1.5, "beta": 1.0, "mu": 1.0, "kappa": 1.0 },
        "grid": { "x_left": -5.0, "x_right": 5.0, "n_cells": 200, "boundary": { "type": "periodic" } },
        "initial": { "type": "oscillatory_bump" },
        "solver": { "dt_initial": 1e-3, "t_end": 1.0, "snapshot_stride": 100 },
        "diagnostics": {
            "lyapunov": { "delta": 0.2 },
            "hair_trigger": { "compact_set": [-2.0, 2.0] }
        },
        "kinetic": { "eps": [0.1, 0.05] }
    })
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", &front_config(2.0, 1.0));
    let out_dir = dir.path().join("out");
    let out = nlfkpp(&["simulate", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["snapshots.ndjson", "summary.csv", "diagnostics.json", "profile.csv", "config.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("t,sup_u,inf_u,dt\n"));
    let diag: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(diag["status"]["status"], "completed_bounded");
}

#[test]
fn blow_up_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = front_config(2.0, 10.0);
    c["params"]["diffusion"] = json!(0.0);
    c["params"]["alpha"] = json!(3.0);
    let config = write(dir.path(), "c.json", &c);
    let out = nlfkpp(&["simulate", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn config_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = front_config(2.0, 1.0);
    c["params"]["beta"] = json!(-1.0);
    let config = write(dir.path(), "c.json", &c);
    assert_eq!(nlfkpp(&["simulate", "--config", &config]).status.code(), Some(3));
    assert_eq!(nlfkpp(&["preset", "fig99"]).status.code(), Some(3));
}

#[test]
fn bounds_prints_constants() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = json!({ "N": 1, "alpha": 1.0, "beta": 1.0, "kappa": 1.0, "delta0": 0.5,
                         "eta": 0.49, "K": 2.0, "u0_sup": 1.0 });
    let config = write(dir.path(), "b.json", &inputs);
    let out = nlfkpp(&["bounds", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["alpha_star"], 2.0);
    assert_eq!(r["s_star"], "+inf");
    assert!((r["M"].as_f64().unwrap() - 184.7136).abs() < 1e-3);

    let bad = write(dir.path(), "bad.json", &json!({ "N": 1, "alpha": 2.5, "beta": 1.0, "kappa": 1.0,
        "delta0": 0.5, "eta": 0.49, "K": 2.0, "u0_sup": 1.0 }));
    assert_eq!(nlfkpp(&["bounds", "--config", &bad]).status.code(), Some(3));
}

#[test]
fn diagnose_reads_stored_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", &bump_config());
    let out_dir = dir.path().join("run");
    let sim = nlfkpp(&["simulate", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(sim.status.code(), Some(0), "{}", String::from_utf8_lossy(&sim.stderr));
    let snaps = out_dir.join("snapshots.ndjson");
    let out = nlfkpp(&["diagnose", "--snapshots", snaps.to_str().unwrap(), "--config", &config]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["hair_trigger"]["sup_distance_series"].as_array().unwrap().len() >= 2);
    assert!(r["lyapunov_residuals"].is_object());
    assert!(r["pattern"].is_array());
}

#[test]
fn sweep_scan_and_kinetic_limit() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", &front_config(2.0, 0.5));
    let out = nlfkpp(&["sweep", "--config", &config, "--param", "alpha", "--mode", "scan", "--values", "1.5,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["evaluations"].as_array().unwrap().len(), 2);

    let kin = write(dir.path(), "k.json", &bump_config());
    let out = nlfkpp(&["kinetic-limit", "--config", &kin, "--eps", "0.2,0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,error,order");
    assert_eq!(lines.len(), 3);
}
