use nlfkpp::harness::{
    preset, read_snapshots_ndjson, simulate, sweep, write_outputs, ExperimentConfig, HarnessError, SweepMode,
    SweepParam, SweepSpec, THREADS_ENV,
};

fn small_front() -> ExperimentConfig {
    let mut c = preset("fig1d").unwrap();
    c.grid = nlfkpp::model::Grid1D::dirichlet(-5.0, 5.0, 200, 1.0, 0.0).unwrap();
    c.solver.t_end = 2.0;
    c.solver.snapshot_stride = 500;
    c
}

#[test]
fn identical_configs_write_identical_files() {
    let config = small_front();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let sim = simulate(&config).unwrap();
        write_outputs(d.path(), &config, &sim).unwrap();
    }
    for file in ["summary.csv", "profile.csv", "snapshots.ndjson", "diagnostics.json", "config.json"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let written = std::fs::read_to_string(dirs[0].path().join("config.json")).unwrap();
    assert_eq!(ExperimentConfig::from_json(&written).unwrap(), config);
    let snaps = read_snapshots_ndjson(&dirs[0].path().join("snapshots.ndjson"), &config.grid).unwrap();
    assert!(snaps.len() >= 2);
    assert_eq!(snaps[0].values()[0], 1.0);
}

#[test]
fn scan_is_ordered_and_independent_of_threads() {
    let config = small_front();
    let spec = SweepSpec {
        param: SweepParam::Alpha,
        mode: SweepMode::Scan {
            values: vec![3.0, 1.5, 2.0],
        },
    };
    // env mutation is confined to this test
    std::env::set_var(THREADS_ENV, "1");
    let serial = sweep(&config, Some(&spec)).unwrap();
    std::env::set_var(THREADS_ENV, "3");
    let parallel = sweep(&config, Some(&spec)).unwrap();
    std::env::remove_var(THREADS_ENV);
    assert_eq!(serial, parallel);
    let values: Vec<f64> = serial.evaluations.iter().map(|e| e.value).collect();
    assert_eq!(values, vec![3.0, 1.5, 2.0]);
}

#[test]
fn bisection_rejects_bracket_without_sign_change() {
    let config = small_front();
    let spec = SweepSpec {
        param: SweepParam::Alpha,
        mode: SweepMode::Bisect {
            lo: 1.2,
            hi: 1.5,
            tol: 0.1,
        },
    };
    let err = sweep(&config, Some(&spec)).unwrap_err();
    assert!(matches!(
        err,
        HarnessError::ThresholdOutsideRange {
            lo_blows_up: false,
            hi_blows_up: false,
            ..
        }
    ));
}

#[test]
fn malformed_config_is_a_config_error() {
    let e = ExperimentConfig::from_json("{\"params\": {\"alpha\": 0.5}}").unwrap_err();
    assert!(e.is_config_error());
}
