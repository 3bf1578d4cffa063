use chflow_core::convergence::Study;
use chflow_core::{Execution, Grid, Quadrature, ScalarField1, SolverOptions};

fn gaussian(g: Grid) -> chflow_core::Result<ScalarField1> {
    ScalarField1::from_fn(g, |x| {
        let e = 0.5 * (-x * x).exp();
        (e, -2.0 * x * e)
    })
}

#[test]
fn trapezoid_scans_are_second_order() {
    let opts = SolverOptions {
        quadrature: Quadrature::Trapezoid,
        ..SolverOptions::default()
    };
    let study = Study {
        x_min: -20.0,
        x_max: 20.0,
        t_end: 0.5,
        opts,
        initial: &gaussian,
    };
    let t = study
        .self_convergence(&[256, 512, 1024, 2048], 5e-3, Execution::default())
        .unwrap();
    let o = t.finest_order().unwrap();
    assert!((1.8..=2.2).contains(&o), "{:?}", t.orders);
}

#[test]
fn end_corrected_scans_are_fourth_order() {
    let study = Study {
        x_min: -20.0,
        x_max: 20.0,
        t_end: 1.0,
        opts: SolverOptions::default(),
        initial: &gaussian,
    };
    let t = study
        .self_convergence(&[512, 1024, 2048, 4096], 2e-3, Execution::default())
        .unwrap();
    assert!(t.orders.iter().all(|o| (3.5..=4.5).contains(o)), "{:?}", t.orders);
}

#[test]
fn parallel_levels_match_sequential() {
    let study = Study {
        x_min: -20.0,
        x_max: 20.0,
        t_end: 0.2,
        opts: SolverOptions::default(),
        initial: &gaussian,
    };
    let a = study
        .self_convergence(&[128, 256, 512], 1e-2, Execution::Sequential)
        .unwrap();
    let b = study
        .self_convergence(&[128, 256, 512], 1e-2, Execution::Parallel)
        .unwrap();
    assert_eq!(a, b);
}

#[test]
fn perturbations_scale_linearly() {
    let dir = |g: Grid| ScalarField1::from_fn(g, |x| ((-x * x).exp() * x, (1.0 - 2.0 * x * x) * (-x * x).exp()));
    let study = Study {
        x_min: -20.0,
        x_max: 20.0,
        t_end: 0.5,
        opts: SolverOptions::default(),
        initial: &gaussian,
    };
    let rows = study
        .perturbation(512, 1e-2, &dir, &[1e-2, 1e-3, 1e-4], Execution::default())
        .unwrap();
    for w in rows.windows(2) {
        let r = w[0].1 / w[1].1;
        assert!((5.0..=20.0).contains(&r), "{r}");
    }
}
