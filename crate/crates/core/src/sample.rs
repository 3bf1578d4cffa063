//! Seeded random test instances: smooth bump displacements, sources and tangent vectors.

use rand::Rng;

use crate::diffeo::Diffeo;
use crate::error::Result;
use crate::field::{ScalarField0, ScalarField1};
use crate::grid::Grid;

/// A sum of Gaussian bumps `sum c_j exp(-((x - x_j) / w_j)^2)` with exact derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSum {
    pub bumps: Vec<(f64, f64, f64)>,
}

impl BumpSum {
    /// One to three bumps centred in `[-5, 5]` with widths in `[0.6, 2]` and amplitudes in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let k = rng.gen_range(1..=3);
        let bumps = (0..k)
            .map(|_| {
                (
                    rng.gen_range(-1.0..=1.0),
                    rng.gen_range(-5.0..=5.0),
                    rng.gen_range(0.6..=2.0),
                )
            })
            .collect();
        Self { bumps }
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        self.bumps.iter().fold((0.0, 0.0), |(v, d), &(c, x0, w)| {
            let s = (x - x0) / w;
            let e = c * (-s * s).exp();
            (v + e, d - 2.0 * s / w * e)
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            bumps: self.bumps.iter().map(|&(c, x0, w)| (c * factor, x0, w)).collect(),
        }
    }

    pub fn field1(&self, grid: Grid) -> Result<ScalarField1> {
        ScalarField1::from_fn(grid, |x| self.eval(x))
    }

    pub fn field0(&self, grid: Grid) -> Result<ScalarField0> {
        ScalarField0::from_fn(grid, |x| self.eval(x).0)
    }
}

/// Random displacement rescaled so that `max |v'|` over the nodes equals a value
/// drawn from `[max_slope / 10, max_slope]`.
pub fn random_displacement<R: Rng + ?Sized>(rng: &mut R, grid: Grid, max_slope: f64) -> Result<BumpSum> {
    let raw = BumpSum::random(rng);
    let f = raw.field1(grid)?;
    let slope = f.derivs().iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let target = rng.gen_range(0.1 * max_slope..=max_slope);
    Ok(if slope > 0.0 { raw.scaled(target / slope) } else { raw })
}

pub fn random_diffeo<R: Rng + ?Sized>(rng: &mut R, grid: Grid, max_slope: f64) -> Result<Diffeo> {
    Diffeo::from_displacement(random_displacement(rng, grid, max_slope)?.field1(grid)?)
}

pub fn random_source<R: Rng + ?Sized>(rng: &mut R, grid: Grid) -> Result<ScalarField0> {
    BumpSum::random(rng).field0(grid)
}

pub fn random_field<R: Rng + ?Sized>(rng: &mut R, grid: Grid) -> Result<ScalarField1> {
    BumpSum::random(rng).field1(grid)
}
