use std::hint::black_box;

use chflow_core::checks::operator_suite;
use chflow_core::convergence::Study;
use chflow_core::diffeo::{comp1_with, invert_with, DEFAULT_INV_TOL};
use chflow_core::sample::{random_diffeo, random_field};
use chflow_core::{Execution, Grid, OperatorWorkspace, Quadrature, ScalarField0, ScalarField1, SolverOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn group_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("group_kernels");
    for n in [16_384usize, 131_072] {
        let grid = Grid::from_bounds(-20.0, 20.0, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let eta = random_diffeo(&mut rng, grid, 0.5).unwrap();
        let u = random_field(&mut rng, grid).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(format!("invert/{name}"), n), &eta, |b, eta| {
                b.iter(|| invert_with(black_box(eta), DEFAULT_INV_TOL, exec).unwrap())
            });
            g.bench_with_input(
                BenchmarkId::new(format!("comp1/{name}"), n),
                &(&u, &eta),
                |b, (u, eta)| b.iter(|| comp1_with(black_box(u), black_box(eta), exec).unwrap()),
            );
        }
    }
    g.finish();
}

fn scans(c: &mut Criterion) {
    let mut g = c.benchmark_group("scans");
    for n in [4096usize, 65_536] {
        let grid = Grid::from_bounds(-20.0, 20.0, n).unwrap();
        let phi = ScalarField0::from_fn(grid, |x| (-x * x).exp()).unwrap();
        let eta = random_diffeo(&mut ChaCha8Rng::seed_from_u64(2), grid, 0.5).unwrap();
        for q in [Quadrature::Trapezoid, Quadrature::EndCorrected] {
            let mut ws = OperatorWorkspace::with_quadrature(grid, q);
            g.bench_with_input(BenchmarkId::new(format!("l_eta_direct/{q:?}"), n), &n, |b, _| {
                b.iter(|| ws.l_eta_direct(black_box(&phi), black_box(&eta)).unwrap())
            });
        }
    }
    g.finish();
}

fn batches(c: &mut Criterion) {
    let mut g = c.benchmark_group("batches");
    g.sample_size(10);
    let grid = Grid::from_bounds(-20.0, 20.0, 2048).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("operator_suite_64", name), |b| {
            b.iter(|| operator_suite(&mut ChaCha8Rng::seed_from_u64(3), grid, 64, Quadrature::default(), exec).unwrap())
        });
    }
    let init = |g: Grid| {
        ScalarField1::from_fn(g, |x| {
            let e = 0.5 * (-x * x).exp();
            (e, -2.0 * x * e)
        })
    };
    let study = Study {
        x_min: -20.0,
        x_max: 20.0,
        t_end: 0.1,
        opts: SolverOptions::default(),
        initial: &init,
    };
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("self_convergence_4_levels", name), |b| {
            b.iter(|| study.self_convergence(&[256, 512, 1024, 2048], 1e-2, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, group_kernels, scans, batches);
criterion_main!(benches);
