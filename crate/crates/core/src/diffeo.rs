//! The group of `C1 ∩ H1` diffeomorphisms of the line in the chart `eta = id + v`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::field::{HermiteCell, ScalarField1};
use crate::grid::Grid;

pub const DEFAULT_CHART_EPS: f64 = 1e-10;
pub const DEFAULT_INV_TOL: f64 = 1e-12;

const MAX_INVERSION_ITERS: usize = 200;

/// `eta = id + v` with cached nodal derivative bounds `a <= eta' <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffeo {
    disp: ScalarField1,
    a: f64,
    b: f64,
}

impl Diffeo {
    pub fn identity(grid: Grid) -> Self {
        Self {
            disp: ScalarField1::zeros(grid),
            a: 1.0,
            b: 1.0,
        }
    }

    pub fn from_displacement(v: ScalarField1) -> Result<Self> {
        Self::from_displacement_with(v, DEFAULT_CHART_EPS)
    }

    /// Fails with `ChartViolation` when `min eta' <= threshold` or the nodal map is not increasing.
    pub fn from_displacement_with(v: ScalarField1, threshold: f64) -> Result<Self> {
        let dv = v.derivs();
        let a = 1.0 + dv.iter().copied().fold(f64::INFINITY, f64::min);
        let b = 1.0 + dv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(a > threshold) {
            return Err(Error::ChartViolation {
                min_derivative: a,
                threshold,
            });
        }
        let h = v.grid().h();
        let vals = v.values();
        if let Some(step) = vals.windows(2).map(|w| h + (w[1] - w[0])).find(|s| !(*s > 0.0)) {
            return Err(Error::ChartViolation {
                min_derivative: step / h,
                threshold,
            });
        }
        Ok(Self { disp: v, a, b })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.disp.grid()
    }

    /// `v = eta - id`.
    #[inline]
    pub fn displacement(&self) -> &ScalarField1 {
        &self.disp
    }

    pub fn into_displacement(self) -> ScalarField1 {
        self.disp
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Chart function `min v'`; the chart is `Phi > -1`.
    pub fn chart_value(&self) -> f64 {
        self.a - 1.0
    }

    /// Nodal values `eta(x_k)`.
    pub fn eta_values(&self) -> Vec<f64> {
        self.grid()
            .nodes()
            .zip(self.disp.values())
            .map(|(x, v)| x + v)
            .collect()
    }

    /// Nodal values `eta'(x_k)`.
    pub fn eta_derivs(&self) -> Vec<f64> {
        self.disp.derivs().iter().map(|d| 1.0 + d).collect()
    }

    /// `eta(x)` and `eta'(x)` from the Hermite interpolant of the displacement (identity outside the grid).
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let (v, dv) = self.disp.eval(x)?;
        Ok((x + v, 1.0 + dv))
    }

    /// Bounds of `eta'` over the whole interpolant, not only at the nodes.
    pub fn interpolant_derivative_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.disp.derivative_range();
        (1.0 + lo, 1.0 + hi)
    }

    /// The mirror diffeomorphism `x -> -eta(-x)` on a symmetric grid.
    pub fn reflected(&self) -> Self {
        Self {
            disp: self.disp.reflected_odd(),
            a: self.a,
            b: self.b,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        invert_with(self, DEFAULT_INV_TOL, Execution::for_len(self.grid().len()))
    }
}

/// `u ∘ eta` sampled at the nodes, with the chain-rule derivative `u'(eta) eta'`.
pub fn comp1(u: &ScalarField1, eta: &Diffeo) -> Result<ScalarField1> {
    comp1_with(u, eta, Execution::for_len(eta.grid().len()))
}

pub fn comp1_with(u: &ScalarField1, eta: &Diffeo, exec: Execution) -> Result<ScalarField1> {
    if u.grid() != eta.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *eta.grid();
    let v = eta.displacement();
    let pairs = exec::map_range(exec, grid.len(), |k| {
        let (p, dp) = u.eval_unchecked(grid.x(k) + v.values()[k]);
        (p, dp * (1.0 + v.derivs()[k]))
    });
    let (val, der) = pairs.into_iter().unzip();
    ScalarField1::new(grid, val, der)
}

/// `zeta ∘ eta`, assembled as `(zeta - id) ∘ eta + (eta - id)`.
pub fn comp2(zeta: &Diffeo, eta: &Diffeo) -> Result<Diffeo> {
    let inner = comp1(zeta.displacement(), eta)?;
    let v = eta.displacement();
    let grid = *eta.grid();
    let val = inner.values().iter().zip(v.values()).map(|(p, q)| p + q).collect();
    let der = inner.derivs().iter().zip(v.derivs()).map(|(dp, dq)| dp + dq).collect();
    Diffeo::from_displacement(ScalarField1::new(grid, val, der)?)
}

pub fn invert(eta: &Diffeo) -> Result<Diffeo> {
    eta.inverse()
}

/// Nodal inverse `xi` with `eta(xi(x_k)) = x_k` to within `tol`; `xi'(x_k) = 1 / eta'(xi(x_k))`.
///
/// A single left-to-right sweep brackets every root in one cell (eta is increasing);
/// each root is then polished by Newton's method safeguarded with bisection.
pub fn invert_with(eta: &Diffeo, tol: f64, exec: Execution) -> Result<Diffeo> {
    let grid = *eta.grid();
    let n = grid.len();
    let h = grid.h();
    let v = eta.displacement().values();

    // eta(x_j) - x_k, computed without forming large absolute coordinates.
    let offset = |j: usize, k: usize| (j as f64 - k as f64) * h + v[j];

    let mut brackets: Vec<Option<usize>> = Vec::with_capacity(n);
    let mut j = 0usize;
    for k in 0..n {
        if offset(0, k) > 0.0 || offset(n - 1, k) < 0.0 {
            brackets.push(None);
            continue;
        }
        while j + 1 < n && offset(j + 1, k) <= 0.0 {
            j += 1;
        }
        brackets.push(Some(j));
    }

    let solved = exec::map_range(exec, n, |k| match brackets[k] {
        None => Ok((0.0, 0.0)),
        Some(j) => solve_node(eta.displacement(), j, k, tol),
    });
    let mut w = Vec::with_capacity(n);
    let mut dw = Vec::with_capacity(n);
    for r in solved {
        let (a, b) = r?;
        w.push(a);
        dw.push(b);
    }
    Diffeo::from_displacement(ScalarField1::new(grid, w, dw)?)
}

fn solve_node(v: &ScalarField1, j: usize, k: usize, tol: f64) -> Result<(f64, f64)> {
    let grid = v.grid();
    let h = grid.h();
    let n = grid.len();
    let d = (j as f64 - k as f64) * h;
    let x = grid.x(k);
    let vals = v.values();
    let ders = v.derivs();

    if d + vals[j] == 0.0 {
        return Ok((d, -ders[j] / (1.0 + ders[j])));
    }
    if j + 1 == n {
        return Err(Error::ConvergenceFailure {
            x,
            residual: d + vals[j],
        });
    }
    let cell: HermiteCell = HermiteCell::new(vals[j], vals[j + 1], ders[j], ders[j + 1], h);
    let f = |t: f64| d + h * t + cell.value(t);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return Err(Error::ConvergenceFailure {
            x,
            residual: f_lo.abs().min(f_hi.abs()),
        });
    }
    let mut t = if f_hi > f_lo { -f_lo / (f_hi - f_lo) } else { 0.5 };
    for _ in 0..MAX_INVERSION_ITERS {
        let r = f(t);
        if !r.is_finite() {
            break;
        }
        let slope = 1.0 + cell.slope(t);
        if r.abs() <= tol || (hi - lo) * h <= f64::EPSILON * (1.0 + x.abs()) {
            if slope <= 0.0 {
                return Err(Error::ChartViolation {
                    min_derivative: slope,
                    threshold: 0.0,
                });
            }
            let dv = cell.slope(t);
            return Ok((d + h * t, -dv / slope));
        }
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - r / (h * slope);
        t = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::ConvergenceFailure {
        x,
        residual: f(t).abs(),
    })
}

/// `D(eta, zeta) = ||eta - zeta||_{1,1}`.
pub fn distance(eta: &Diffeo, zeta: &Diffeo) -> Result<f64> {
    Ok(eta.displacement().sub(zeta.displacement())?.norm_11())
}

/// Grid-sampled modulus of continuity of `f'`: for each radius `r`, the largest
/// `|f'(x_i) - f'(x_j)|` over node pairs with `|x_i - x_j| <= r`.
/// Underestimates the continuous modulus.
pub fn modulus_estimate(f: &ScalarField1, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let h = f.grid().h();
    radii
        .iter()
        .map(|&r| {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidField(format!(
                    "radius must be finite and non-negative, got {r}"
                )));
            }
            let width = (r / h * (1.0 + 1e-12)).floor() as usize;
            Ok((r, window_spread(f.derivs(), width)))
        })
        .collect()
}

/// Largest `max - min` over all windows of `width + 1` consecutive samples.
fn window_spread(d: &[f64], width: usize) -> f64 {
    if width == 0 || d.len() < 2 {
        return 0.0;
    }
    let span = (width + 1).min(d.len());
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0_f64;
    for (i, &x) in d.iter().enumerate() {
        while maxq.back().is_some_and(|&j| d[j] <= x) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| d[j] >= x) {
            minq.pop_back();
        }
        minq.push_back(i);
        while maxq.front().is_some_and(|&j| j + span <= i) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j + span <= i) {
            minq.pop_front();
        }
        best = best.max(d[maxq[0]] - d[minq[0]]);
    }
    best
}
