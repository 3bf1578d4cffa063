use chflow_core::sample::{random_diffeo, random_field, random_source};
use chflow_core::{
    gateaux_df, inv_helmholtz, l_eta_conjugated, l_eta_direct, l_op, Diffeo, Grid, OperatorWorkspace, Quadrature,
    ScalarField0, ScalarField1,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> Grid {
    Grid::from_bounds(-20.0, 20.0, n).unwrap()
}

fn two_sided(g: Grid) -> ScalarField0 {
    ScalarField0::from_fn(g, |x| (-x.abs()).exp()).unwrap()
}

#[test]
fn helmholtz_green_function() {
    let g = grid(4096);
    let f = inv_helmholtz(&two_sided(g)).unwrap();
    for x in [0.0, 1.0] {
        let (v, _) = f.eval(x).unwrap();
        assert!((v - 0.5 * (1.0 + x) * (-x).exp()).abs() < 1e-5, "{x} {v}");
    }
}

#[test]
fn helmholtz_of_gaussian_at_origin() {
    let erfc_half = 0.4795001221869535;
    let exact = 0.25f64.exp() * std::f64::consts::PI.sqrt() / 2.0 * erfc_half;
    let g = Grid::from_bounds(-20.0, 20.0, 4001).unwrap();
    let f = inv_helmholtz(&ScalarField0::from_fn(g, |x| (-x * x).exp()).unwrap()).unwrap();
    assert!((f.values()[2000] - exact).abs() < 1e-6);
}

#[test]
fn l_of_two_sided_exponential() {
    let g = grid(4096);
    let f = l_op(&two_sided(g)).unwrap();
    let (v, _) = f.eval(1.0).unwrap();
    assert!((v + 0.5 * (-1.0f64).exp()).abs() < 1e-5);
    let even = ScalarField0::from_fn(grid(4097), |x| (-x * x).exp()).unwrap();
    assert!(l_op(&even).unwrap().values()[2048].abs() < 1e-15);
}

#[test]
fn zero_inputs() {
    let g = grid(513);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eta = random_diffeo(&mut rng, g, 0.5).unwrap();
    let phi = random_source(&mut rng, g).unwrap();
    let z0 = ScalarField0::zeros(g);
    assert!(l_eta_conjugated(&z0, &eta).unwrap().values().iter().all(|v| *v == 0.0));
    assert!(gateaux_df(&z0, &eta, &random_field(&mut rng, g).unwrap())
        .unwrap()
        .values()
        .iter()
        .all(|v| *v == 0.0));
    assert!(gateaux_df(&phi, &eta, &ScalarField1::zeros(g))
        .unwrap()
        .values()
        .iter()
        .all(|v| *v == 0.0));
}

#[test]
fn identity_flow_reduces_to_l() {
    let g = grid(1025);
    let phi = random_source(&mut ChaCha8Rng::seed_from_u64(1), g).unwrap();
    let a = l_eta_direct(&phi, &Diffeo::identity(g)).unwrap();
    let b = l_op(&phi).unwrap();
    assert!(a.sub(&b).unwrap().sup_nodes() < 1e-12);
    let c = l_eta_conjugated(&phi, &Diffeo::identity(g)).unwrap();
    assert!(c.sub(&b).unwrap().sup_nodes() < 1e-12);
}

#[test]
fn outputs_decay_for_centred_sources() {
    let g = grid(2048);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let phi = ScalarField0::from_fn(g, |x| (-x * x).exp()).unwrap();
    for _ in 0..10 {
        let f = l_eta_direct(&phi, &random_diffeo(&mut rng, g, 0.5).unwrap()).unwrap();
        assert!(f.boundary_magnitude() <= 1e-8, "{}", f.boundary_magnitude());
    }
}

#[test]
fn gateaux_matches_central_differences() {
    let g = grid(2048);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let phi = random_source(&mut rng, g).unwrap();
    let eta = random_diffeo(&mut rng, g, 0.5).unwrap();
    let rho = random_field(&mut rng, g).unwrap();
    for q in [Quadrature::Trapezoid, Quadrature::EndCorrected] {
        let s = chflow_core::checks::gateaux_sweep(&phi, &eta, &rho, &[1e-2, 1e-3, 1e-4], q).unwrap();
        let slope = chflow_core::checks::loglog_slope(&s);
        assert!((1.7..=2.3).contains(&slope), "{q:?} {slope}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operator_bounds_and_linearity(seed in any::<u64>(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let g = grid(1025);
        let slack = 10.0 * g.h() * g.h();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta = random_diffeo(&mut rng, g, 0.5).unwrap();
        let (p1, p2) = (random_source(&mut rng, g).unwrap(), random_source(&mut rng, g).unwrap());
        let mut ws = OperatorWorkspace::new(g);
        let f1 = ws.l_eta_direct(&p1, &eta).unwrap();
        let (a, b) = eta.interpolant_derivative_bounds();
        let nc = f1.norm_components();
        prop_assert!(nc.sup_u <= b / a * p1.sup() + slack);
        prop_assert!(nc.sup_du <= (b * b / a + b) * p1.sup() + slack);
        prop_assert!(nc.h1() <= ((b / a).sqrt() + b) * p1.l2() + slack);
        let f2 = ws.l_eta_direct(&p2, &eta).unwrap();
        let mix = ws.l_eta_direct(&p1.combine(alpha, &p2, beta).unwrap(), &eta).unwrap();
        let diff = mix.sub(&f1.combine(alpha, &f2, beta).unwrap()).unwrap();
        prop_assert!(diff.sup_nodes() <= 1e-12);
        prop_assert!(diff.derivs().iter().all(|d| d.abs() <= 1e-12));
        let conj = ws.l_eta_direct(&p1, &eta).unwrap();
        prop_assert!(conj.sub(&l_eta_conjugated(&p1, &eta).unwrap()).unwrap().sup_nodes() <= 5.0 * slack);
    }
}
