use nlfkpp::bounds::{
    bound_m, bound_m_at_s, critical_alpha, iteration_bound, verify_lemma, BoundInputs, BoundsError, IterationProblem,
};
use proptest::prelude::*;

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (1u32..=4, 0.1f64..3.0, 0.0f64..0.999, 0.1f64..5.0, 0.05f64..2.0, 0.01f64..1.0, 0.5f64..5.0, 1.01f64..5.0, 0.0f64..10.0)
        .prop_map(|(n, beta, frac, kappa, delta0, eta, g, k, u0_sup)| BoundInputs {
            n,
            alpha: 1.0 + frac * (critical_alpha(n, beta) - 1.0),
            beta,
            kappa,
            delta0,
            eta,
            g,
            k,
            u0_sup,
            m: None,
            poincare: 1.0,
        })
}

proptest! {
    #[test]
    fn bound_dominates_initial_data_and_k(inp in inputs()) {
        let r = bound_m(&inp).unwrap();
        prop_assert!(r.m >= inp.k * inp.u0_sup.max(1.0));
        prop_assert!(r.exponent > 0.0);
    }

    #[test]
    fn bound_is_monotone(inp in inputs(), factor in 1.01f64..3.0) {
        let base = bound_m(&inp).unwrap().m;
        let m = |x: BoundInputs| bound_m(&x).unwrap().m;
        let varied = [
            BoundInputs { u0_sup: inp.u0_sup * factor, ..inp },
            BoundInputs { k: inp.k * factor, ..inp },
            BoundInputs { g: inp.g * factor, ..inp },
            BoundInputs { eta: inp.eta / factor, ..inp },
            BoundInputs { kappa: inp.kappa / factor, ..inp },
        ];
        for v in varied {
            prop_assert!(m(v) >= base);
        }
    }

    #[test]
    fn large_s_approaches_the_limit(inp in inputs().prop_filter("N <= 2", |i| i.n <= 2)) {
        let inp = BoundInputs { alpha: 1.0 + 0.5 * (inp.alpha - 1.0), ..inp };
        let limit = bound_m(&inp).unwrap();
        let near = bound_m_at_s(&inp, 1e8).unwrap();
        prop_assert!((limit.m - near.m).abs() <= 1e-3 * limit.m, "{} vs {}", limit.m, near.m);
    }

    #[test]
    fn lemma_bound_dominates_ode(
        c in prop::collection::vec(0.1f64..5.0, 1..5),
        a_bar in 1.0f64..3.0,
        d_exp in 0.0f64..1.5,
        k_init in 1.0f64..2.5,
        m in 1u32..4,
        y_sup in 0.0f64..4.0,
        extra in 0u32..=4,
        t_max in 0.5f64..10.0,
    ) {
        let p = IterationProblem { c, a_bar, d_exp, k_init, m, y_sup };
        let r = verify_lemma(&p, m + extra, t_max).unwrap();
        prop_assert!(r.worst_ratio <= 1.0);
        prop_assert!(r.samples > 0);
    }
}

#[test]
fn alpha_outside_regime_is_rejected() {
    let inp = BoundInputs {
        n: 1,
        alpha: 2.0,
        beta: 1.0,
        kappa: 1.0,
        delta0: 0.5,
        eta: 0.49,
        g: 1.0,
        k: 2.0,
        u0_sup: 1.0,
        m: None,
        poincare: 1.0,
    };
    assert!(matches!(bound_m(&inp), Err(BoundsError::OutsideRegime { .. })));
}

#[test]
fn lemma_bound_overflow_is_reported() {
    let p = IterationProblem {
        c: vec![1.0],
        a_bar: 10.0,
        d_exp: 1.0,
        k_init: 10.0,
        m: 1,
        y_sup: 10.0,
    };
    assert!(matches!(iteration_bound(&p, 12), Err(BoundsError::Overflow { .. })));
    assert!(iteration_bound(&p, 2).unwrap().is_finite());
}
