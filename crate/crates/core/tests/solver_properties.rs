use nlfkpp::model::{oscillatory_bump, Field, Grid1D, Kernel, ModelParams};
use nlfkpp::solver::{convolve_with, run, step, ConvolutionMethod, Integrator, SolverConfig};
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = Kernel> {
    (0usize..3, 0.3f64..2.0).prop_map(|(i, sigma)| {
        [Kernel::uniform(), Kernel::logistic(), Kernel::gaussian()][i]
            .with_sigma(sigma)
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_steady_state_is_fixed(
        alpha in 1.0f64..3.0,
        beta in 0.1f64..2.0,
        mu in 0.1f64..100.0,
        kappa in 0.2f64..5.0,
        kernel in kernel_strategy(),
        periodic in any::<bool>(),
    ) {
        let p = ModelParams::new(alpha, beta, mu, kappa, 1.0).unwrap();
        let c = p.steady_state();
        let grid = if periodic {
            Grid1D::periodic(-5.0, 5.0, 128).unwrap()
        } else {
            Grid1D::dirichlet(-5.0, 5.0, 128, c, c).unwrap()
        };
        let cfg = SolverConfig { dt_initial: 1e-4, ..SolverConfig::default() };
        let next = step(&Field::constant(&grid, c), &p, &kernel, &cfg).unwrap();
        for v in next.values() {
            prop_assert!((v - c).abs() <= 1e-12 * c.max(1.0));
        }
    }

    #[test]
    fn fft_matches_direct(
        kernel in kernel_strategy(),
        beta in 0.1f64..3.0,
        values in prop::collection::vec(0.0f64..4.0, 97),
    ) {
        let grid = Grid1D::periodic(-3.0, 3.0, 97).unwrap();
        let u = Field::new(grid, values, 0.0).unwrap();
        let a = convolve_with(&kernel, &u, beta, ConvolutionMethod::Fft).unwrap();
        let b = convolve_with(&kernel, &u, beta, ConvolutionMethod::Direct).unwrap();
        let scale = b.sup_abs().max(1e-300);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn nonnegative_data_stays_nonnegative(
        amplitude in 0.0f64..2.0,
        floor in 0.0f64..0.5,
        alpha in 1.0f64..2.5,
        mu in 0.1f64..50.0,
    ) {
        let grid = Grid1D::periodic(-5.0, 5.0, 200).unwrap();
        let u0 = oscillatory_bump(&grid, amplitude, 2.0, floor);
        let p = ModelParams::new(alpha, 1.0, mu, 1.0, 1.0).unwrap();
        let cfg = SolverConfig { dt_initial: 1e-3, t_end: 0.5, snapshot_stride: usize::MAX, ..SolverConfig::default() };
        let out = run(&u0, &p, &Kernel::uniform(), &cfg).unwrap();
        prop_assert!(out.final_field().min() >= 0.0);
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let grid = Grid1D::periodic(-5.0, 5.0, 100).unwrap();
    let u0 = Field::from_fn(&grid, |x| 0.5 + 0.3 * (0.4 * std::f64::consts::PI * x).cos()).unwrap();
    let p = ModelParams::new(1.5, 1.0, 2.0, 1.0, 1.0).unwrap();
    let solve = |dt: f64| {
        let cfg = SolverConfig {
            dt_initial: dt,
            t_end: 0.2,
            integrator: Integrator::Rk4,
            snapshot_stride: usize::MAX,
            ..SolverConfig::default()
        };
        run(&u0, &p, &Kernel::uniform(), &cfg).unwrap().final_field().clone()
    };
    let reference = solve(1.25e-4);
    let error = |dt: f64| {
        solve(dt)
            .values()
            .iter()
            .zip(reference.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (error(2e-3), error(1e-3));
    let order = (e1 / e2).log2();
    assert!(order > 3.5, "{e1:e} {e2:e} order {order}");
}

#[test]
fn narrow_kernel_approaches_local_equation() {
    // sigma -> 0 turns J * u^beta into u^beta
    let grid = Grid1D::periodic(-5.0, 5.0, 400).unwrap();
    let u0 = Field::from_fn(&grid, |x| 0.3 + 0.4 * (-x * x).exp()).unwrap();
    let p = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let cfg = SolverConfig {
        dt_initial: 1e-3,
        t_end: 1.0,
        snapshot_stride: usize::MAX,
        ..SolverConfig::default()
    };
    // the local logistic equation u' = u(1-u) on a constant state has a closed form
    let c0: f64 = 0.3;
    let logistic = |t: f64| c0 * t.exp() / (1.0 - c0 + c0 * t.exp());
    let flat = Field::constant(&grid, c0);
    let mut previous = f64::INFINITY;
    for sigma in [0.5, 0.1, 0.02] {
        let k = Kernel::gaussian().with_sigma(sigma).unwrap();
        let out = run(&flat, &p, &k, &cfg).unwrap();
        let e = (out.final_field().values()[0] - logistic(1.0)).abs();
        assert!(e < 1e-6, "constant data is insensitive to sigma: {e}");
        let bumped = run(&u0, &p, &k, &cfg).unwrap();
        let narrow = run(&u0, &p, &Kernel::gaussian().with_sigma(0.005).unwrap(), &cfg).unwrap();
        let d = bumped
            .final_field()
            .values()
            .iter()
            .zip(narrow.final_field().values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < previous, "sigma {sigma}: {d} !< {previous}");
        previous = d;
    }
    assert!(previous < 1e-3, "{previous}");
}

#[test]
fn even_data_stays_even() {
    let grid = Grid1D::dirichlet(-5.0, 5.0, 200, 0.5, 0.5).unwrap();
    let u0 = Field::from_fn(&grid, |x| 0.5 + 0.3 * (-x * x).exp()).unwrap();
    let p = ModelParams::new(1.5, 1.0, 5.0, 1.0, 1.0).unwrap();
    let cfg = SolverConfig {
        dt_initial: 1e-3,
        t_end: 2.0,
        convolution_method: ConvolutionMethod::Direct,
        snapshot_stride: usize::MAX,
        ..SolverConfig::default()
    };
    let out = run(&u0, &p, &Kernel::logistic(), &cfg).unwrap();
    let v = out.final_field().values();
    let n = v.len();
    for i in 0..n {
        assert!((v[i] - v[n - 1 - i]).abs() < 1e-12, "node {i}");
    }
}
