use nlfkpp::lyapunov::{entropy_h, lyapunov_f, pattern_metrics, LyapunovConfig, Tolerance};
use nlfkpp::model::{Field, Grid1D, ModelParams};
use proptest::prelude::*;

proptest! {
    #[test]
    fn entropy_is_nonnegative_and_vanishes_at_steady_state(
        alpha in 1.0f64..3.0,
        beta in 0.1f64..2.0,
        kappa in 0.2f64..5.0,
        frac in 1e-3f64..10.0,
    ) {
        prop_assume!((alpha - 1.0 - beta).abs() > 1e-3);
        let p = ModelParams::new(alpha, beta, 1.0, kappa, 1.0).unwrap();
        // h acts on s = u^beta, so its zero is 1/kappa
        let zero = 1.0 / kappa;
        // rounding scale of the cancelling terms
        let scale = |s: f64| (s.powf((1.0 + beta - alpha) / beta) + s.powf((1.0 - alpha) / beta) / kappa).max(1.0) / beta;
        let h = entropy_h(frac * zero, &p).unwrap();
        prop_assert!(h >= -1e-12 * scale(frac * zero), "h({}) = {h}", frac * zero);
        prop_assert!(entropy_h(zero, &p).unwrap().abs() <= 1e-12 * scale(zero));
    }

    #[test]
    fn functional_commutes_with_periodic_shift(shift in 0usize..200, phase in 0.0f64..6.0) {
        let grid = Grid1D::periodic(-5.0, 5.0, 200).unwrap();
        let p = ModelParams::new(1.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        let u = Field::from_fn(&grid, |x| 0.6 + 0.3 * (0.6 * std::f64::consts::PI * x + phase).sin()).unwrap();
        let n = grid.node_count();
        let shifted: Vec<f64> = (0..n).map(|i| u.values()[(i + n - shift) % n]).collect();
        let v = Field::new(grid, shifted, 0.0).unwrap();
        let cfg = LyapunovConfig::new(0.2);
        let fu = lyapunov_f(&u, &p, &cfg).unwrap();
        let fv = lyapunov_f(&v, &p, &cfg).unwrap();
        for i in 0..n {
            prop_assert!((fv.values()[i] - fu.values()[(i + n - shift) % n]).abs() < 1e-12);
        }
    }

    #[test]
    fn tolerance_grows_with_step_and_spacing(dt in 1e-5f64..1.0, h in 1e-4f64..0.5, f in 1.0f64..4.0) {
        let t = Tolerance::FROZEN;
        prop_assert!(t.at(dt * f, h) >= t.at(dt, h));
        prop_assert!(t.at(dt, h * f) >= t.at(dt, h));
    }
}

#[test]
fn pattern_metrics_of_a_cosine() {
    let grid = Grid1D::periodic(0.0, 10.0, 500).unwrap();
    let u = Field::from_fn(&grid, |x| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x / 2.5).cos()).unwrap();
    let m = pattern_metrics(&u, 1.0);
    assert_eq!(m.crossing_count, 8);
    assert!((m.dominant_wavelength - 2.5).abs() < 1e-12);
    assert!((m.max_amplitude - 0.2).abs() < 1e-12);
}
