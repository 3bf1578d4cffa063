use chflow_core::sample::{random_diffeo, BumpSum};
use chflow_core::{comp1, comp2, distance, invert, modulus_estimate, Diffeo, Error, Grid, ScalarField1};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> Grid {
    Grid::from_bounds(-20.0, 20.0, 2001).unwrap()
}

fn gaussian(g: Grid, amp: f64) -> ScalarField1 {
    ScalarField1::from_fn(g, |x| {
        let e = amp * (-x * x).exp();
        (e, -2.0 * x * e)
    })
    .unwrap()
}

#[test]
fn chart_bounds_of_gaussian_displacement() {
    let eta = Diffeo::from_displacement(gaussian(grid(), 0.3)).unwrap();
    let m = (-0.5f64).exp() / 2f64.sqrt();
    let (a, b) = eta.interpolant_derivative_bounds();
    assert!((a - (1.0 - 0.6 * m)).abs() < 1e-6 && (b - (1.0 + 0.6 * m)).abs() < 1e-6);
    assert!((eta.a() - 0.74267).abs() < 1e-4 && (eta.b() - 1.25733).abs() < 1e-4);
    assert!(eta.a() >= a && eta.b() <= b);
}

#[test]
fn chart_violation_at_the_boundary() {
    let g = grid();
    let steep = ScalarField1::new(g, vec![0.0; g.len()], vec![-1.0; g.len()]).unwrap();
    assert!(matches!(
        Diffeo::from_displacement(steep),
        Err(Error::ChartViolation { .. })
    ));
}

#[test]
fn composition_closed_form() {
    let g = grid();
    let eta = Diffeo::from_displacement(gaussian(g, 0.3)).unwrap();
    let c = comp1(&gaussian(g, 1.0), &eta).unwrap();
    let k = 1000;
    assert_eq!(g.x(k), 0.0);
    assert!((c.values()[k] - 0.913931).abs() < 1e-6);
    assert!((c.derivs()[k] + 0.548359).abs() < 1e-6);
}

#[test]
fn inverse_round_trip_and_bounds() {
    let g = grid();
    let h = g.h();
    let eta = Diffeo::from_displacement(gaussian(g, 0.3)).unwrap();
    let xi = invert(&eta).unwrap();
    assert!(distance(&comp2(&xi, &eta).unwrap(), &Diffeo::identity(g)).unwrap() <= 10.0 * h * h);
    let (a, b) = eta.interpolant_derivative_bounds();
    assert!(xi.a() >= 1.0 / b - 1e-12 && xi.b() <= 1.0 / a + 1e-12);
    assert_eq!(invert(&Diffeo::identity(g)).unwrap(), Diffeo::identity(g));
}

#[test]
fn inverse_derivative_channel_is_second_order_consistent() {
    let err = |n: usize| {
        let g = Grid::from_bounds(-20.0, 20.0, n).unwrap();
        let eta = Diffeo::from_displacement(gaussian(g, 0.4)).unwrap();
        (invert(&eta).unwrap().displacement().derivative_consistency(), g.h())
    };
    let (e1, h1) = err(1001);
    let (e2, h2) = err(2001);
    let order = (e1 / e2).ln() / (h1 / h2).ln();
    assert!(order > 1.8, "{order}");
}

#[test]
fn distance_grid_mismatch() {
    let a = Diffeo::identity(grid());
    let b = Diffeo::identity(Grid::from_bounds(-20.0, 20.0, 101).unwrap());
    assert_eq!(distance(&a, &b), Err(Error::GridMismatch));
}

#[test]
fn modulus_of_gaussian() {
    let f = gaussian(grid(), 1.0);
    let radii = [0.0, 0.01, 0.1, 0.5, 1.0, 2.0];
    let table = modulus_estimate(&f, &radii).unwrap();
    assert_eq!(table[0].1, 0.0);
    for w in table.windows(2) {
        assert!(w[1].1 >= w[0].1);
    }
    for (r, om) in table {
        assert!(om <= 2.0 * r + 1e-12);
    }
    let line = ScalarField1::from_fn(grid(), |_| (0.0, 0.7)).unwrap();
    assert!(modulus_estimate(&line, &radii).unwrap().iter().all(|(_, w)| *w == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn group_axioms_on_random_diffeos(seed in any::<u64>()) {
        let g = Grid::from_bounds(-20.0, 20.0, 1025).unwrap();
        let tol = 10.0 * g.h() * g.h();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (
            random_diffeo(&mut rng, g, 0.5).unwrap(),
            random_diffeo(&mut rng, g, 0.5).unwrap(),
            random_diffeo(&mut rng, g, 0.5).unwrap(),
        );
        let id = Diffeo::identity(g);
        prop_assert!(distance(&comp2(&id, &a).unwrap(), &a).unwrap() <= 1e-12);
        prop_assert!(distance(&comp2(&a, &id).unwrap(), &a).unwrap() <= 1e-12);
        let l = comp2(&comp2(&a, &b).unwrap(), &c).unwrap();
        let r = comp2(&a, &comp2(&b, &c).unwrap()).unwrap();
        prop_assert!(distance(&l, &r).unwrap() <= tol);
        let xi = invert(&a).unwrap();
        prop_assert!(distance(&comp2(&xi, &a).unwrap(), &id).unwrap() <= tol);
        prop_assert!(distance(&comp2(&a, &xi).unwrap(), &id).unwrap() <= tol);
        prop_assert!((distance(&a, &b).unwrap() - distance(&b, &a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn comp1_is_lipschitz_in_the_flow(seed in any::<u64>()) {
        let g = Grid::from_bounds(-20.0, 20.0, 1025).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = BumpSum::random(&mut rng).field1(g).unwrap();
        let e1 = random_diffeo(&mut rng, g, 0.5).unwrap();
        let e2 = random_diffeo(&mut rng, g, 0.5).unwrap();
        let c1 = u.sup_interp().1;
        let d = e1.displacement().sub(e2.displacement()).unwrap().sup_interp().0;
        let lhs = comp1(&u, &e1).unwrap().sub(&comp1(&u, &e2).unwrap()).unwrap().sup_nodes();
        prop_assert!(lhs <= c1 * d + 10.0 * g.h() * g.h());
    }
}
