use chflow_core::convergence::Study;
use chflow_core::{
    compare, integrate_eulerian, EulerianOracle, Execution, Grid, Quadrature, ScalarField1, SolverOptions,
};

fn gaussian(amp: f64) -> impl Fn(Grid) -> chflow_core::Result<ScalarField1> + Sync {
    move |g| {
        ScalarField1::from_fn(g, |x| {
            let e = amp * (-x * x).exp();
            (e, -2.0 * x * e)
        })
    }
}

#[test]
fn zero_data_stays_zero() {
    let g = Grid::from_bounds(-20.0, 20.0, 256).unwrap();
    let tr = integrate_eulerian(&ScalarField1::zeros(g), 0.2, 0.01).unwrap();
    assert!(tr.states.iter().all(|s| s.u.iter().all(|v| *v == 0.0)));
    assert!(tr.blowup.is_none());
}

#[test]
fn energy_drift_at_reference_resolution() {
    let g = Grid::from_bounds(-20.0, 20.0, 2048).unwrap();
    let u0 = gaussian(0.5)(g).unwrap();
    let tr = EulerianOracle::new(g, Quadrature::default())
        .integrate(&u0, 1.0, 1e-3, 500)
        .unwrap();
    assert!(tr.energy_drift() <= 1e-5, "{}", tr.energy_drift());
}

#[test]
fn cross_method_gap_is_second_order_with_trapezoid_scans() {
    let init = gaussian(0.5);
    let opts = SolverOptions {
        quadrature: Quadrature::Trapezoid,
        ..SolverOptions::default()
    };
    let study = Study {
        x_min: -20.0,
        x_max: 20.0,
        t_end: 1.0,
        opts,
        initial: &init,
    };
    let t = study
        .cross_method(&[512, 1024, 2048], 4e-3, Execution::default())
        .unwrap();
    for w in t.levels.windows(2) {
        let factor = w[0].error / w[1].error;
        assert!((3.0..=6.0).contains(&factor), "{factor}");
    }
    assert!(t.finest_order().unwrap() >= 1.8);
}

#[test]
fn comparison_report_is_symmetric() {
    let g = Grid::from_bounds(-20.0, 20.0, 512).unwrap();
    let u0 = gaussian(0.5)(g).unwrap();
    let lag = chflow_core::integrate(&u0, 0.4, 0.02, 5).unwrap();
    let eul = EulerianOracle::new(g, Quadrature::default())
        .integrate(&u0, 0.4, 0.02, 5)
        .unwrap();
    let times = [0.0, 0.1, 0.2, 0.4];
    assert_eq!(
        compare(&lag, &eul, &times).unwrap(),
        compare(&eul, &lag, &times).unwrap()
    );
    assert!(compare(&lag, &lag, &times)
        .unwrap()
        .iter()
        .all(|r| r.sup_diff == 0.0 && r.l2_diff == 0.0));
    assert!(compare(&lag, &eul, &[0.5]).is_err());
}
