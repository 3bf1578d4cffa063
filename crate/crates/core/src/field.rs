//! Sampled members of the velocity space `V1` (values plus derivatives) and the
//! source space `V0` (values only), with the `C1 + H1` norm.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io;

pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Cubic Hermite cell in the local coordinate `t in [0,1]`:
/// `p(t) = c0 + c1 t + c2 t^2 + c3 t^3`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HermiteCell {
    c: [f64; 4],
    h: f64,
}

impl HermiteCell {
    #[inline]
    pub(crate) fn new(u0: f64, u1: f64, d0: f64, d1: f64, h: f64) -> Self {
        let c2 = 3.0 * (u1 - u0) - h * (2.0 * d0 + d1);
        let c3 = 2.0 * (u0 - u1) + h * (d0 + d1);
        Self {
            c: [u0, h * d0, c2, c3],
            h,
        }
    }

    #[inline]
    pub(crate) fn value(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.c;
        c0 + t * (c1 + t * (c2 + t * c3))
    }

    /// d/dx (not d/dt).
    #[inline]
    pub(crate) fn slope(&self, t: f64) -> f64 {
        let [_, c1, c2, c3] = self.c;
        (c1 + t * (2.0 * c2 + t * 3.0 * c3)) / self.h
    }

    /// Interior critical points of the value polynomial.
    fn value_critical_points(&self) -> impl Iterator<Item = f64> {
        let [_, c1, c2, c3] = self.c;
        quadratic_roots(3.0 * c3, 2.0 * c2, c1)
            .into_iter()
            .flatten()
            .filter(|t| *t > 0.0 && *t < 1.0)
    }

    /// Interior critical point of the slope (a quadratic in `t`).
    fn slope_critical_point(&self) -> Option<f64> {
        let [_, _, c2, c3] = self.c;
        if c3 == 0.0 {
            return None;
        }
        let t = -c2 / (3.0 * c3);
        (t > 0.0 && t < 1.0).then_some(t)
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [Option<f64>; 2] {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return [None, None];
    }
    if a.abs() <= 1e-14 * scale {
        if b == 0.0 {
            return [None, None];
        }
        return [Some(-c / b), None];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return [None, None];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { r1 };
    [Some(r1), Some(r2)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormComponents {
    pub sup_u: f64,
    pub sup_du: f64,
    pub l2_u: f64,
    pub l2_du: f64,
}

impl NormComponents {
    pub fn h1(&self) -> f64 {
        self.l2_u.hypot(self.l2_du)
    }

    pub fn c1(&self) -> f64 {
        self.sup_u + self.sup_du
    }

    pub fn norm_11(&self) -> f64 {
        self.c1() + self.h1()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Outcome of checking the defining conditions of `V1` (or `V0`) on samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub conditions: Vec<Condition>,
}

impl MembershipReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.passed)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn check_len_finite(grid: &Grid, what: &str, data: &[f64]) -> Result<()> {
    if data.len() != grid.len() {
        return Err(Error::InvalidField(format!(
            "{what}: expected {} samples, got {}",
            grid.len(),
            data.len()
        )));
    }
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidField(format!("{what}: non-finite sample at index {k}")));
    }
    Ok(())
}

/// A `C1 ∩ H1` function carried as paired value / derivative samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField1 {
    grid: Grid,
    u: Vec<f64>,
    du: Vec<f64>,
}

impl ScalarField1 {
    pub fn new(grid: Grid, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        check_len_finite(&grid, "values", &u)?;
        check_len_finite(&grid, "derivatives", &du)?;
        Ok(Self { grid, u, du })
    }

    /// Caller guarantees lengths; finiteness is the caller's responsibility.
    pub(crate) fn from_parts(grid: Grid, u: Vec<f64>, du: Vec<f64>) -> Self {
        debug_assert_eq!(u.len(), grid.len());
        debug_assert_eq!(du.len(), grid.len());
        Self { grid, u, du }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()], vec![0.0; grid.len()])
    }

    /// Samples `f(x) = (value, derivative)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (u, du) = grid.nodes().map(f).unzip();
        Self::new(grid, u, du)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.u
    }

    #[inline]
    pub fn derivs(&self) -> &[f64] {
        &self.du
    }

    pub fn into_parts(self) -> (Grid, Vec<f64>, Vec<f64>) {
        (self.grid, self.u, self.du)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.du).all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_parts(
            self.grid,
            self.u.iter().map(|v| c * v).collect(),
            self.du.iter().map(|v| c * v).collect(),
        )
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let lin = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect();
        Ok(Self::from_parts(
            self.grid,
            lin(&self.u, &other.u),
            lin(&self.du, &other.du),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    /// The mirror image `x -> -u(-x)` on a symmetric grid.
    pub fn reflected_odd(&self) -> Self {
        let u = self.u.iter().rev().map(|v| -v).collect();
        let du = self.du.iter().rev().copied().collect();
        Self::from_parts(self.grid, u, du)
    }

    #[inline]
    pub(crate) fn cell(&self, i: usize) -> HermiteCell {
        HermiteCell::new(self.u[i], self.u[i + 1], self.du[i], self.du[i + 1], self.grid.h())
    }

    /// Value and derivative of the cubic Hermite interpolant at `x`.
    /// Outside the grid the field is zero; at nodes the stored samples are returned.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        if !x.is_finite() {
            return Err(Error::NonFiniteArgument(x));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> (f64, f64) {
        let g = &self.grid;
        if x < g.x_min() || x > g.x_max() {
            return (0.0, 0.0);
        }
        let k = ((x - g.x_min()) / g.h()).round() as usize;
        if k < g.len() && g.x(k) == x {
            return (self.u[k], self.du[k]);
        }
        let (i, t) = g.locate(x);
        let c = self.cell(i);
        (c.value(t), c.slope(t))
    }

    /// Suprema of `|u|` and `|u'|` over the Hermite interpolant (not just the nodes).
    pub fn sup_interp(&self) -> (f64, f64) {
        let mut su = self.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut sd = self.du.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..self.grid.len() - 1 {
            let c = self.cell(i);
            for t in c.value_critical_points() {
                su = su.max(c.value(t).abs());
            }
            if let Some(t) = c.slope_critical_point() {
                sd = sd.max(c.slope(t).abs());
            }
        }
        (su, sd)
    }

    /// `(min, max)` of the interpolant's derivative.
    pub fn derivative_range(&self) -> (f64, f64) {
        let mut lo = self.du.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = self.du.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..self.grid.len() - 1 {
            let c = self.cell(i);
            if let Some(t) = c.slope_critical_point() {
                let s = c.slope(t);
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        (lo, hi)
    }

    pub fn sup_nodes(&self) -> f64 {
        self.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn l2(&self) -> f64 {
        l2_norm(&self.u, self.grid.h())
    }

    pub fn norm_components(&self) -> NormComponents {
        let (sup_u, sup_du) = self.sup_interp();
        let h = self.grid.h();
        NormComponents {
            sup_u,
            sup_du,
            l2_u: l2_norm(&self.u, h),
            l2_du: l2_norm(&self.du, h),
        }
    }

    /// `||u||_{1,1} = sup|u| + sup|u'| + (||u||_2^2 + ||u'||_2^2)^{1/2}`.
    pub fn norm_11(&self) -> f64 {
        self.norm_components().norm_11()
    }

    pub fn boundary_magnitude(&self) -> f64 {
        let n = self.grid.len();
        [self.u[0], self.u[n - 1], self.du[0], self.du[n - 1]]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn check_membership(&self, tol: f64) -> MembershipReport {
        let c = self.norm_components();
        let sup = c.sup_u.max(c.sup_du);
        let l2 = c.h1();
        let decay = self.boundary_magnitude();
        MembershipReport {
            conditions: vec![
                Condition {
                    name: "sup_bound",
                    measured: sup,
                    threshold: f64::INFINITY,
                    passed: sup.is_finite(),
                },
                Condition {
                    name: "l2_finite",
                    measured: l2,
                    threshold: f64::INFINITY,
                    passed: l2.is_finite(),
                },
                Condition {
                    name: "boundary_decay",
                    measured: decay,
                    threshold: tol,
                    passed: decay <= tol,
                },
            ],
        }
    }

    /// Largest interior mismatch between the derivative channel and centred differences of the values.
    pub fn derivative_consistency(&self) -> f64 {
        let h = self.grid.h();
        (1..self.grid.len() - 1)
            .map(|k| (self.du[k] - (self.u[k + 1] - self.u[k - 1]) / (2.0 * h)).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let x: Vec<f64> = self.grid.nodes().collect();
        io::write_columns(path, &["x", "u", "du"], &[&x, &self.u, &self.du])
    }

    /// Reads columns `x,u,du`; the abscissae must match `grid` to within `1e-9 h`.
    pub fn read_csv(path: &Path, grid: Grid) -> Result<Self> {
        let cols = io::read_columns(path)?;
        let get = |name: &str| {
            cols.get(name)
                .ok_or_else(|| Error::InvalidField(format!("missing column '{name}'")))
        };
        let (x, u, du) = (get("x")?, get("u")?, get("du")?);
        check_abscissae(&grid, x)?;
        Self::new(grid, u.clone(), du.clone())
    }
}

fn check_abscissae(grid: &Grid, x: &[f64]) -> Result<()> {
    if x.len() != grid.len() {
        return Err(Error::InvalidField(format!(
            "expected {} rows, found {}",
            grid.len(),
            x.len()
        )));
    }
    for (k, xk) in x.iter().enumerate() {
        if (xk - grid.x(k)).abs() > 1e-9 * grid.h() {
            return Err(Error::InvalidField(format!(
                "row {k}: x = {xk} is not grid node {}",
                grid.x(k)
            )));
        }
    }
    Ok(())
}

pub(crate) fn l2_norm(values: &[f64], h: f64) -> f64 {
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    trapezoid(&sq, h).sqrt()
}

/// A continuous, decaying, square-integrable function carried as value samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField0 {
    grid: Grid,
    g: Vec<f64>,
}

impl ScalarField0 {
    pub fn new(grid: Grid, g: Vec<f64>) -> Result<Self> {
        check_len_finite(&grid, "values", &g)?;
        Ok(Self { grid, g })
    }

    pub(crate) fn from_parts(grid: Grid, g: Vec<f64>) -> Self {
        debug_assert_eq!(g.len(), grid.len());
        Self { grid, g }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let g = grid.nodes().map(f).collect();
        Self::new(grid, g)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.g
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_parts(self.grid, self.g.iter().map(|v| c * v).collect())
    }

    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let g = self.g.iter().zip(&other.g).map(|(x, y)| alpha * x + beta * y).collect();
        Ok(Self::from_parts(self.grid, g))
    }

    pub fn sup(&self) -> f64 {
        self.g.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn l2(&self) -> f64 {
        l2_norm(&self.g, self.grid.h())
    }

    /// Cubic Lagrange interpolation on the four surrounding nodes; zero outside the grid.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFiniteArgument(x));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let grid = &self.grid;
        if x < grid.x_min() || x > grid.x_max() {
            return 0.0;
        }
        let n = grid.len();
        let k = ((x - grid.x_min()) / grid.h()).round() as usize;
        if k < n && grid.x(k) == x {
            return self.g[k];
        }
        let (i, _) = grid.locate(x);
        if n < 4 {
            let t = (x - grid.x(i)) / grid.h();
            return (1.0 - t) * self.g[i] + t * self.g[i + 1];
        }
        let j0 = i.saturating_sub(1).min(n - 4);
        let s = (x - grid.x(j0)) / grid.h();
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (s - b as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * self.g[j0 + a];
        }
        acc
    }

    pub fn check_membership(&self, tol: f64) -> MembershipReport {
        let n = self.grid.len();
        let sup = self.sup();
        let l2 = self.l2();
        let decay = self.g[0].abs().max(self.g[n - 1].abs());
        MembershipReport {
            conditions: vec![
                Condition {
                    name: "sup_bound",
                    measured: sup,
                    threshold: f64::INFINITY,
                    passed: sup.is_finite(),
                },
                Condition {
                    name: "l2_finite",
                    measured: l2,
                    threshold: f64::INFINITY,
                    passed: l2.is_finite(),
                },
                Condition {
                    name: "boundary_decay",
                    measured: decay,
                    threshold: tol,
                    passed: decay <= tol,
                },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian(grid: Grid) -> ScalarField1 {
        ScalarField1::from_fn(grid, |x| {
            let e = (-x * x).exp();
            (e, -2.0 * x * e)
        })
        .unwrap()
    }

    fn wide() -> Grid {
        Grid::from_bounds(-20.0, 20.0, 4001).unwrap()
    }

    #[test]
    fn zero_field_norms() {
        let z = ScalarField1::zeros(wide());
        let c = z.norm_components();
        assert_eq!((c.sup_u, c.sup_du, c.l2_u, c.l2_du), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(z.norm_11(), 0.0);
        assert_eq!(z.eval(3.3).unwrap(), (0.0, 0.0));
        assert!(z.check_membership(DEFAULT_TAIL_TOL).passed());
    }

    #[test]
    fn gaussian_norm_components() {
        // sup|u'| = sqrt(2) e^{-1/2}; both L2 norms are (pi/2)^{1/4}.
        let c = gaussian(wide()).norm_components();
        let l2 = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((c.sup_u - 1.0).abs() < 1e-6);
        assert!((c.sup_du - 2f64.sqrt() * (-0.5f64).exp()).abs() < 1e-6, "{}", c.sup_du);
        assert!((c.l2_u - l2).abs() < 1e-6);
        assert!((c.l2_du - l2).abs() < 1e-6);
        let n11 = 1.0 + 2f64.sqrt() * (-0.5f64).exp() + (2.0 * (std::f64::consts::PI / 2.0).sqrt()).sqrt();
        assert!((c.norm_11() - n11).abs() < 1e-6);
        assert!((n11 - 3.44100).abs() < 1e-5);
    }

    #[test]
    fn homogeneity() {
        let f = gaussian(wide());
        for c in [-3.0, 0.5, 7.25] {
            let a = f.scaled(c).norm_components();
            let b = f.norm_components();
            for (x, y) in [
                (a.sup_u, b.sup_u),
                (a.sup_du, b.sup_du),
                (a.l2_u, b.l2_u),
                (a.l2_du, b.l2_du),
            ] {
                assert!((x - c.abs() * y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn eval_gaussian_at_half() {
        let f = gaussian(wide());
        let (v, d) = f.eval(0.5).unwrap();
        assert!((v - (-0.25f64).exp()).abs() < 1e-8);
        assert!((d + (-0.25f64).exp()).abs() < 1e-8);
        let (v, d) = f.eval(0.503_7).unwrap();
        let x: f64 = 0.503_7;
        assert!((v - (-x * x).exp()).abs() < 1e-8);
        assert!((d + 2.0 * x * (-x * x).exp()).abs() < 1e-7);
    }

    #[test]
    fn eval_reproduces_cubics() {
        let grid = Grid::from_bounds(-3.0, 3.0, 61).unwrap();
        let f = ScalarField1::from_fn(grid, |x| (x * x * x - 2.0 * x, 3.0 * x * x - 2.0)).unwrap();
        for x in [-1.234, 0.05, 0.777, 2.31] {
            let (v, d) = f.eval(x).unwrap();
            assert!((v - (x * x * x - 2.0 * x)).abs() < 1e-12);
            assert!((d - (3.0 * x * x - 2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn eval_outside_is_zero_and_nan_is_error() {
        let f = gaussian(wide());
        assert_eq!(f.eval(25.0).unwrap(), (0.0, 0.0));
        assert!(f.eval(f64::NAN).is_err());
    }

    #[test]
    fn eval_at_nodes_is_exact() {
        let grid = Grid::from_bounds(-7.0, 3.0, 97).unwrap();
        let f = ScalarField1::from_fn(grid, |x| (x.sin() * (-x * x).exp(), x.cos())).unwrap();
        for k in 0..grid.len() {
            assert_eq!(f.eval(grid.x(k)).unwrap(), (f.values()[k], f.derivs()[k]));
        }
    }

    #[test]
    fn ramp_fails_decay() {
        let f = ScalarField1::from_fn(wide(), |x| (x, 1.0)).unwrap();
        let r = f.check_membership(DEFAULT_TAIL_TOL);
        assert!(!r.passed());
        assert!(!r.condition("boundary_decay").unwrap().passed);
        assert!(r.condition("sup_bound").unwrap().passed);
        assert!(gaussian(wide()).check_membership(DEFAULT_TAIL_TOL).passed());
    }

    #[test]
    fn rejects_non_finite_and_bad_lengths() {
        let g = Grid::from_bounds(0.0, 1.0, 5).unwrap();
        assert!(ScalarField1::new(g, vec![0.0; 4], vec![0.0; 5]).is_err());
        assert!(ScalarField1::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0], vec![0.0; 5]).is_err());
        assert!(ScalarField0::new(g, vec![f64::INFINITY; 5]).is_err());
    }

    #[test]
    fn trapezoid_is_second_order_on_truncated_gaussian() {
        // On [0,1] the Gaussian does not decay, so the Euler-Maclaurin endpoint term is visible.
        let exact = 0.746_824_132_812_427; // erf(1) sqrt(pi)/2
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|k| (-(k as f64 * h).powi(2)).exp()).collect();
            (trapezoid(&v, h) - exact).abs()
        };
        for (a, b) in [(33, 65), (65, 129), (129, 257)] {
            let order = (err(a) / err(b)).log2();
            assert!((1.8..=2.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn derivative_consistency_is_second_order() {
        let e1 = gaussian(Grid::from_bounds(-10.0, 10.0, 401).unwrap()).derivative_consistency();
        let e2 = gaussian(Grid::from_bounds(-10.0, 10.0, 801).unwrap()).derivative_consistency();
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.1);
    }

    #[test]
    fn field0_interpolation_is_fourth_order() {
        let grid = Grid::from_bounds(-5.0, 5.0, 201).unwrap();
        let f = ScalarField0::from_fn(grid, |x| (-x * x).exp()).unwrap();
        let x = 0.3173;
        assert!((f.eval(x).unwrap() - (-x * x).exp()).abs() < 1e-6);
        assert_eq!(f.eval(grid.x(17)).unwrap(), f.values()[17]);
        assert_eq!(f.eval(-6.0).unwrap(), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("chflow-field-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("f.csv");
        let grid = Grid::from_bounds(-5.0, 5.0, 51).unwrap();
        let f = gaussian(grid);
        f.write_csv(&p).unwrap();
        assert_eq!(ScalarField1::read_csv(&p, grid).unwrap(), f);
        std::fs::write(&p, "x,u\n0,0\n").unwrap();
        assert!(ScalarField1::read_csv(&p, grid).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        prop::collection::vec((-2.0..2.0f64, -4.0..4.0f64, 0.3..2.0f64), 1..4)
    }

    fn field(grid: Grid, b: &[(f64, f64, f64)]) -> ScalarField1 {
        ScalarField1::from_fn(grid, |x| {
            b.iter().fold((0.0, 0.0), |(v, d), &(a, c, w)| {
                let s = (x - c) / w;
                let e = a * (-s * s).exp();
                (v + e, d - 2.0 * s / w * e)
            })
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn norm_triangle_inequality(a in bumps(), b in bumps()) {
            let grid = Grid::from_bounds(-12.0, 12.0, 481).unwrap();
            let (f, g) = (field(grid, &a), field(grid, &b));
            let lhs = f.add(&g).unwrap().norm_11();
            prop_assert!(lhs <= f.norm_11() + g.norm_11() + 1e-12);
            prop_assert!(lhs >= 0.0);
        }
    }
}
