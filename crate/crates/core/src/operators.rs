//! Nonlocal operators of the Camassa-Holm flow: the Helmholtz inverse
//! `(1 - d_xx)^{-1}`, `L = d_x (1 - d_xx)^{-1}`, its conjugate `L_eta`, and the
//! directional derivative of `(phi, eta) -> L_eta(phi)` in `eta`.
//!
//! Every operator reduces to a pair of exponentially weighted prefix scans
//!
//! ```text
//! A_k = 1/2 ∫_{x_min}^{x_k} e^{-(eta(x_k) - eta(y))} w(y) dy
//! B_k = 1/2 ∫_{x_k}^{x_max} e^{-(eta(y) - eta(x_k))} w(y) dy
//! ```
//!
//! advanced cell by cell with the factor `e^{-(eta_k - eta_{k-1})} < 1`, so no
//! exponential is ever taken of a positive argument. Cost is O(n) per evaluation.

use crate::diffeo::{comp1, Diffeo};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::field::{ScalarField0, ScalarField1};
use crate::grid::Grid;

/// Cell quadrature used inside the scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Per-cell trapezoid on the weighted integrand. Second order.
    Trapezoid,
    /// Trapezoid plus the Euler-Maclaurin endpoint term `h^2/12 [F']`, with
    /// `w'` from finite differences. Fourth order for smooth integrands; the
    /// second-order rule drifts the conserved energy by O(h^2).
    #[default]
    EndCorrected,
}

/// Scratch space for one operator evaluation at a time.
#[derive(Debug, Clone)]
pub struct OperatorWorkspace {
    grid: Grid,
    quadrature: Quadrature,
    left_acc: Vec<f64>,
    right_acc: Vec<f64>,
    decay: Vec<f64>,
    stretch: Vec<f64>,
}

impl OperatorWorkspace {
    pub fn new(grid: Grid) -> Self {
        Self::with_quadrature(grid, Quadrature::default())
    }

    pub fn with_quadrature(grid: Grid, quadrature: Quadrature) -> Self {
        let n = grid.len();
        Self {
            grid,
            quadrature,
            left_acc: vec![0.0; n],
            right_acc: vec![0.0; n],
            decay: vec![0.0; n],
            stretch: vec![1.0; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if *grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Loads `decay[k] = e^{-(eta_k - eta_{k-1})}` and `stretch[k] = eta'(x_k)`.
    fn load_flow(&mut self, eta: Option<&Diffeo>) {
        let h = self.grid.h();
        self.decay[0] = 0.0;
        match eta {
            None => {
                let e = (-h).exp();
                self.decay[1..].fill(e);
                self.stretch.fill(1.0);
            }
            Some(eta) => {
                let v = eta.displacement();
                for (k, w) in v.values().windows(2).enumerate() {
                    self.decay[k + 1] = (-(h + (w[1] - w[0]))).exp();
                }
                for (s, d) in self.stretch.iter_mut().zip(v.derivs()) {
                    *s = 1.0 + d;
                }
            }
        }
    }

    /// Fills `left_acc`/`right_acc` with `A`/`B` for weights `w`.
    fn scan(&mut self, w: &[f64]) {
        let grid = self.grid;
        let quad = self.quadrature;
        let (decay, stretch) = (&self.decay, &self.stretch);
        let (left, right) = (&mut self.left_acc, &mut self.right_acc);
        exec::join(
            Execution::for_len(grid.len()),
            || scan_left(grid.h(), decay, stretch, w, quad, left),
            || scan_right(grid.h(), decay, stretch, w, quad, right),
        );
    }

    /// `(1 - d_xx)^{-1} g = 1/2 ∫ e^{-|x-y|} g(y) dy`, with derivative channel `L g`.
    pub fn inv_helmholtz(&mut self, g: &ScalarField0) -> Result<ScalarField1> {
        self.check(g.grid())?;
        self.load_flow(None);
        self.scan(g.values());
        let (a, b) = (&self.left_acc, &self.right_acc);
        let val = a.iter().zip(b).map(|(a, b)| a + b).collect();
        let der = a.iter().zip(b).map(|(a, b)| b - a).collect();
        Ok(ScalarField1::from_parts(self.grid, val, der))
    }

    /// `L phi = d_x (1 - d_xx)^{-1} phi`, with derivative channel `(1 - d_xx)^{-1} phi - phi`.
    pub fn l_op(&mut self, phi: &ScalarField0) -> Result<ScalarField1> {
        self.check(phi.grid())?;
        self.load_flow(None);
        Ok(self.conjugated_from_loaded(phi.values()))
    }

    /// `L_eta phi = L(phi ∘ eta^{-1}) ∘ eta` evaluated directly in Lagrangian
    /// coordinates (no inversion). Derivative channel `eta' (A + B - phi)`.
    pub fn l_eta_direct(&mut self, phi: &ScalarField0, eta: &Diffeo) -> Result<ScalarField1> {
        self.check(phi.grid())?;
        self.check(eta.grid())?;
        self.load_flow(Some(eta));
        Ok(self.conjugated_from_loaded(phi.values()))
    }

    fn conjugated_from_loaded(&mut self, phi: &[f64]) -> ScalarField1 {
        let w: Vec<f64> = phi.iter().zip(&self.stretch).map(|(p, s)| p * s).collect();
        self.scan(&w);
        let (a, b, s) = (&self.left_acc, &self.right_acc, &self.stretch);
        let val = a.iter().zip(b).map(|(a, b)| b - a).collect();
        let der = (0..phi.len()).map(|k| s[k] * ((a[k] + b[k]) - phi[k])).collect();
        ScalarField1::from_parts(self.grid, val, der)
    }

    /// Directional derivative of `eta -> L_eta(phi)` along `rho`:
    ///
    /// ```text
    /// 1/2 ∫_{-∞}^x e^{-eta(x)+eta(y)} phi(y) (rho(x) eta'(y) - rho(y) eta'(y) - rho'(y)) dy
    /// + 1/2 ∫_x^∞ e^{eta(x)-eta(y)} phi(y) (rho(x) eta'(y) - rho(y) eta'(y) + rho'(y)) dy
    /// ```
    ///
    /// The derivative channel is a centred difference of the values (diagnostic only).
    pub fn gateaux_df(&mut self, phi: &ScalarField0, eta: &Diffeo, rho: &ScalarField1) -> Result<ScalarField1> {
        self.check(phi.grid())?;
        self.check(eta.grid())?;
        self.check(rho.grid())?;
        self.load_flow(Some(eta));
        let n = self.grid.len();
        let (p, r, dr) = (phi.values(), rho.values(), rho.derivs());
        let s = self.stretch.clone();

        let w1: Vec<f64> = (0..n).map(|k| p[k] * s[k]).collect();
        self.scan(&w1);
        let sum1: Vec<f64> = (0..n).map(|k| self.left_acc[k] + self.right_acc[k]).collect();

        let w2: Vec<f64> = (0..n).map(|k| p[k] * r[k] * s[k]).collect();
        self.scan(&w2);
        let sum2: Vec<f64> = (0..n).map(|k| self.left_acc[k] + self.right_acc[k]).collect();

        let w3: Vec<f64> = (0..n).map(|k| p[k] * dr[k]).collect();
        self.scan(&w3);
        let val: Vec<f64> = (0..n)
            .map(|k| r[k] * sum1[k] - sum2[k] + (self.right_acc[k] - self.left_acc[k]))
            .collect();
        let der = centred_difference(&val, self.grid.h());
        Ok(ScalarField1::from_parts(self.grid, val, der))
    }
}

fn scan_left(h: f64, decay: &[f64], stretch: &[f64], w: &[f64], quad: Quadrature, out: &mut [f64]) {
    let n = w.len();
    let half_h = 0.5 * h;
    out[0] = 0.0;
    for k in 1..n {
        let e = decay[k];
        out[k] = e * out[k - 1] + half_h * (e * w[k - 1] + w[k]);
    }
    if quad == Quadrature::EndCorrected {
        // trapezoid - h^2/12 [F'(x_k) - F'(x_0)], F(y) = e^{-(eta_k - eta(y))} w(y)
        let dw = finite_difference_4(w, h);
        let c = h * h / 12.0;
        let mut edge = stretch[0] * w[0] + dw[0];
        for k in 1..n {
            edge *= decay[k];
            out[k] -= c * ((stretch[k] * w[k] + dw[k]) - edge);
        }
    }
    for v in out.iter_mut() {
        *v *= 0.5;
    }
}

fn scan_right(h: f64, decay: &[f64], stretch: &[f64], w: &[f64], quad: Quadrature, out: &mut [f64]) {
    let n = w.len();
    let half_h = 0.5 * h;
    out[n - 1] = 0.0;
    for k in (0..n - 1).rev() {
        let e = decay[k + 1];
        out[k] = e * out[k + 1] + half_h * (w[k] + e * w[k + 1]);
    }
    if quad == Quadrature::EndCorrected {
        // trapezoid - h^2/12 [G'(x_max) - G'(x_k)], G(y) = e^{-(eta(y) - eta_k)} w(y)
        let dw = finite_difference_4(w, h);
        let c = h * h / 12.0;
        let mut edge = -stretch[n - 1] * w[n - 1] + dw[n - 1];
        for k in (0..n - 1).rev() {
            edge *= decay[k + 1];
            out[k] -= c * (edge - (-stretch[k] * w[k] + dw[k]));
        }
    }
    for v in out.iter_mut() {
        *v *= 0.5;
    }
}

/// Fourth-order centred differences, second order next to the boundary.
pub(crate) fn finite_difference_4(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (f[1] - f[0]) / h;
            d.fill(s);
        }
        return d;
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for k in 1..n - 1 {
        d[k] = if k >= 2 && k + 2 < n {
            (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / (12.0 * h)
        } else {
            (f[k + 1] - f[k - 1]) / (2.0 * h)
        };
    }
    d
}

fn centred_difference(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    d[0] = (f[1] - f[0]) / h;
    d[n - 1] = (f[n - 1] - f[n - 2]) / h;
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    }
    d
}

pub fn inv_helmholtz(g: &ScalarField0) -> Result<ScalarField1> {
    OperatorWorkspace::new(*g.grid()).inv_helmholtz(g)
}

pub fn l_op(phi: &ScalarField0) -> Result<ScalarField1> {
    OperatorWorkspace::new(*phi.grid()).l_op(phi)
}

pub fn l_eta_direct(phi: &ScalarField0, eta: &Diffeo) -> Result<ScalarField1> {
    OperatorWorkspace::new(*phi.grid()).l_eta_direct(phi, eta)
}

pub fn gateaux_df(phi: &ScalarField0, eta: &Diffeo, rho: &ScalarField1) -> Result<ScalarField1> {
    OperatorWorkspace::new(*phi.grid()).gateaux_df(phi, eta, rho)
}

/// `L_eta phi` through the literal route: invert `eta`, resample `phi ∘ eta^{-1}`,
/// apply `L`, compose back with `eta`. An independent check on [`l_eta_direct`].
pub fn l_eta_conjugated(phi: &ScalarField0, eta: &Diffeo) -> Result<ScalarField1> {
    l_eta_conjugated_with(&mut OperatorWorkspace::new(*phi.grid()), phi, eta)
}

pub fn l_eta_conjugated_with(ws: &mut OperatorWorkspace, phi: &ScalarField0, eta: &Diffeo) -> Result<ScalarField1> {
    if phi.grid() != eta.grid() {
        return Err(Error::GridMismatch);
    }
    let xi = eta.inverse()?;
    let grid = *phi.grid();
    let w = xi.displacement().values();
    let psi: Vec<f64> = (0..grid.len()).map(|k| phi.eval_unchecked(grid.x(k) + w[k])).collect();
    let q = ws.l_op(&ScalarField0::from_parts(grid, psi))?;
    comp1(&q, eta)
}
