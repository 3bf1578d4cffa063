//! Time integration of the Lagrangian system
//!
//! ```text
//! d eta / dt = U
//! d U / dt   = -L_eta( U^2 + U_x^2 / (2 eta_x^2) )
//! ```
//!
//! on the four channels `(v, v', U, U')` with `eta = id + v`. All four
//! right-hand sides come from the system itself or from the analytic
//! derivative channel of `L_eta`; nothing is differentiated numerically.

use crate::diffeo::{invert_with, Diffeo, DEFAULT_INV_TOL};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{trapezoid, ScalarField0, ScalarField1, DEFAULT_TAIL_TOL};
use crate::grid::Grid;
use crate::operators::{OperatorWorkspace, Quadrature};

pub const DEFAULT_EPS_BREAK: f64 = 1e-3;

/// Deepest step-halving level tried by the adaptive integrator.
const MAX_HALVINGS: u32 = 12;

/// A point `(eta, U)` of the tangent bundle at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub eta: Diffeo,
    pub velocity: ScalarField1,
}

impl FlowState {
    /// `(id, u0)` at `t = 0`.
    pub fn initial(u0: ScalarField1) -> Self {
        Self {
            t: 0.0,
            eta: Diffeo::identity(*u0.grid()),
            velocity: u0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.eta.grid()
    }

    pub fn min_eta_x(&self) -> f64 {
        self.eta.a()
    }

    /// `(∫ u^2 + u_x^2 dx, ∫ u dx)` evaluated in Lagrangian variables:
    /// `∫ U^2 eta_x + U_x^2 / eta_x` and `∫ U eta_x`.
    pub fn energy_momentum(&self) -> (f64, f64) {
        let h = self.grid().h();
        let (u, du) = (self.velocity.values(), self.velocity.derivs());
        let dv = self.eta.displacement().derivs();
        let e: Vec<f64> = (0..u.len())
            .map(|k| {
                let s = 1.0 + dv[k];
                u[k] * u[k] * s + du[k] * du[k] / s
            })
            .collect();
        let m: Vec<f64> = (0..u.len()).map(|k| u[k] * (1.0 + dv[k])).collect();
        (trapezoid(&e, h), trapezoid(&m, h))
    }

    /// Mirror image under `x -> -x` (`eta -> -eta(-x)`, `U -> -U(-x)`).
    pub fn reflected(&self) -> Self {
        Self {
            t: self.t,
            eta: self.eta.reflected(),
            velocity: self.velocity.reflected_odd(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.velocity.is_finite() && self.eta.displacement().is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub energy: f64,
    pub momentum: f64,
    pub min_eta_x: f64,
    pub sup_u: f64,
}

impl Diagnostic {
    pub fn of(state: &FlowState) -> Self {
        let (energy, momentum) = state.energy_momentum();
        Self {
            t: state.t,
            energy,
            momentum,
            min_eta_x: state.min_eta_x(),
            sup_u: state.velocity.sup_nodes(),
        }
    }
}

/// Where and why an integration stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    /// Time of the last valid state.
    pub time: f64,
    pub min_eta_x: f64,
    pub cause: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub states: Vec<FlowState>,
    pub diagnostics: Vec<Diagnostic>,
    pub breakdown: Option<Breakdown>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&FlowState> {
        self.states.last()
    }

    pub fn completed(&self) -> bool {
        self.breakdown.is_none()
    }

    /// Recorded state at time `t` (to within `1e-9 max(1, |t|)`).
    pub fn state_at(&self, t: f64) -> Option<&FlowState> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.states.iter().find(|s| (s.t - t).abs() <= tol)
    }

    /// `max_t |E(t) - E(0)| / |E(0)|` (absolute when `|E(0)| < DRIFT_ABS_FLOOR`).
    pub fn energy_drift(&self) -> f64 {
        relative_drift(self.diagnostics.iter().map(|d| d.energy))
    }

    pub fn momentum_drift(&self) -> f64 {
        relative_drift(self.diagnostics.iter().map(|d| d.momentum))
    }

    /// `Err(breakdown cause)` when the run stopped early.
    pub fn into_result(self) -> Result<Self> {
        match &self.breakdown {
            Some(b) => Err(b.cause.clone()),
            None => Ok(self),
        }
    }
}

/// Below this initial magnitude drifts are reported in absolute terms.
pub const DRIFT_ABS_FLOOR: f64 = 1e-12;

pub(crate) fn relative_drift(mut series: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = series.next() else { return 0.0 };
    let scale = if first.abs() >= DRIFT_ABS_FLOOR {
        first.abs()
    } else {
        1.0
    };
    series.map(|e| (e - first).abs() / scale).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub eps_break: f64,
    pub tail_tol: f64,
    pub inv_tol: f64,
    pub quadrature: Quadrature,
    /// Step-doubling error control on each nominal step.
    pub adaptive: bool,
    pub adaptive_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps_break: DEFAULT_EPS_BREAK,
            tail_tol: DEFAULT_TAIL_TOL,
            inv_tol: DEFAULT_INV_TOL,
            quadrature: Quadrature::default(),
            adaptive: false,
            adaptive_tol: 1e-10,
        }
    }
}

/// `g = U^2 + U_x^2 / (2 eta_x^2)`, pointwise non-negative.
pub fn quadratic_source(state: &FlowState, eps_break: f64) -> Result<ScalarField0> {
    let a = state.min_eta_x();
    if !(a > eps_break) {
        return Err(Error::ChartViolation {
            min_derivative: a,
            threshold: eps_break,
        });
    }
    let (u, du) = (state.velocity.values(), state.velocity.derivs());
    let dv = state.eta.displacement().derivs();
    let g = (0..u.len())
        .map(|k| {
            let s = 1.0 + dv[k];
            u[k] * u[k] + du[k] * du[k] / (2.0 * s * s)
        })
        .collect();
    ScalarField0::new(*state.grid(), g)
}

/// Eulerian velocity `u = U ∘ eta^{-1}` with `u_x = (U_x / eta_x) ∘ eta^{-1}`.
pub fn reconstruct_u(state: &FlowState) -> Result<ScalarField1> {
    reconstruct_u_with(state, DEFAULT_INV_TOL)
}

pub fn reconstruct_u_with(state: &FlowState, inv_tol: f64) -> Result<ScalarField1> {
    let grid = *state.grid();
    let xi = invert_with(&state.eta, inv_tol, Execution::for_len(grid.len()))?;
    let w = xi.displacement().values();
    let v = state.eta.displacement();
    let (mut u, mut ux) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for (k, wk) in w.iter().enumerate() {
        let y = grid.x(k) + wk;
        let (uv, ud) = state.velocity.eval_unchecked(y);
        let (_, dv) = v.eval_unchecked(y);
        u.push(uv);
        ux.push(ud / (1.0 + dv));
    }
    ScalarField1::new(grid, u, ux)
}

/// `(∫ u^2 + u_x^2 dx, ∫ u dx)` by the trapezoid rule.
pub fn conserved_quantities(u: &ScalarField1) -> (f64, f64) {
    let h = u.grid().h();
    let e: Vec<f64> = u.values().iter().zip(u.derivs()).map(|(a, b)| a * a + b * b).collect();
    (trapezoid(&e, h), trapezoid(u.values(), h))
}

/// Flat channel storage `(v, v', U, U')` used inside the integrator.
#[derive(Debug, Clone)]
struct Channels([Vec<f64>; 4]);

impl Channels {
    fn of(state: &FlowState) -> Self {
        let v = state.eta.displacement();
        Self([
            v.values().to_vec(),
            v.derivs().to_vec(),
            state.velocity.values().to_vec(),
            state.velocity.derivs().to_vec(),
        ])
    }

    /// `self + c * k`
    fn offset(&self, c: f64, k: &Channels) -> Channels {
        Channels(std::array::from_fn(|i| {
            self.0[i].iter().zip(&k.0[i]).map(|(a, b)| a + c * b).collect()
        }))
    }

    fn into_state(self, grid: Grid, t: f64, eps_break: f64) -> Result<FlowState> {
        let [v, dv, u, du] = self.0;
        if v.iter().chain(&dv).chain(&u).chain(&du).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(t));
        }
        let eta = Diffeo::from_displacement_with(ScalarField1::new(grid, v, dv)?, eps_break)?;
        Ok(FlowState {
            t,
            eta,
            velocity: ScalarField1::new(grid, u, du)?,
        })
    }

    fn max_abs_diff(&self, other: &Channels) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Owns the operator workspace so repeated right-hand sides do not reallocate.
#[derive(Debug, Clone)]
pub struct LagrangianSolver {
    opts: SolverOptions,
    ws: OperatorWorkspace,
}

impl LagrangianSolver {
    pub fn new(grid: Grid, opts: SolverOptions) -> Self {
        Self {
            opts,
            ws: OperatorWorkspace::with_quadrature(grid, opts.quadrature),
        }
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// `(d eta/dt, dU/dt) = (U, -L_eta g)`.
    pub fn rhs(&mut self, state: &FlowState) -> Result<(ScalarField1, ScalarField1)> {
        let g = quadratic_source(state, self.opts.eps_break)?;
        let force = self.ws.l_eta_direct(&g, &state.eta)?.scaled(-1.0);
        Ok((state.velocity.clone(), force))
    }

    fn rhs_channels(&mut self, state: &FlowState) -> Result<Channels> {
        let (deta, du) = self.rhs(state)?;
        let (_, a, b) = deta.into_parts();
        let (_, c, d) = du.into_parts();
        Ok(Channels([a, b, c, d]))
    }

    /// Classical four-stage Runge-Kutta step; every stage is re-validated against the chart.
    pub fn rk4_step(&mut self, state: &FlowState, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidStep(dt));
        }
        let grid = *state.grid();
        let eps = self.opts.eps_break;
        let y = Channels::of(state);
        let t = state.t;
        let k1 = self.rhs_channels(state)?;
        let s2 = y.offset(0.5 * dt, &k1).into_state(grid, t + 0.5 * dt, eps)?;
        let k2 = self.rhs_channels(&s2)?;
        let s3 = y.offset(0.5 * dt, &k2).into_state(grid, t + 0.5 * dt, eps)?;
        let k3 = self.rhs_channels(&s3)?;
        let s4 = y.offset(dt, &k3).into_state(grid, t + dt, eps)?;
        let k4 = self.rhs_channels(&s4)?;
        let next = Channels(std::array::from_fn(|i| {
            (0..y.0[i].len())
                .map(|j| y.0[i][j] + dt / 6.0 * (k1.0[i][j] + 2.0 * (k2.0[i][j] + k3.0[i][j]) + k4.0[i][j]))
                .collect()
        }));
        next.into_state(grid, t + dt, eps)
    }

    fn adaptive_step(&mut self, state: &FlowState, dt: f64, depth: u32) -> Result<FlowState> {
        let full = self.rk4_step(state, dt);
        let halves = self
            .rk4_step(state, 0.5 * dt)
            .and_then(|mid| self.rk4_step(&mid, 0.5 * dt));
        match (full, halves) {
            (Ok(f), Ok(h)) => {
                let err = Channels::of(&f).max_abs_diff(&Channels::of(&h));
                if err <= self.opts.adaptive_tol || depth >= MAX_HALVINGS {
                    Ok(h)
                } else {
                    let mid = self.adaptive_step(state, 0.5 * dt, depth + 1)?;
                    self.adaptive_step(&mid, 0.5 * dt, depth + 1)
                }
            }
            (_, Err(e)) | (Err(e), _) if depth >= MAX_HALVINGS => Err(e),
            _ => {
                let mid = self.adaptive_step(state, 0.5 * dt, depth + 1)?;
                self.adaptive_step(&mid, 0.5 * dt, depth + 1)
            }
        }
    }

    /// Integrates from `(id, u0)` to `t_end`, or until the chart condition fails.
    /// Records every `record_every`-th state (plus the first and last); diagnostics every step.
    pub fn integrate(&mut self, u0: &ScalarField1, t_end: f64, dt: f64, record_every: usize) -> Result<Trajectory> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidStep(dt));
        }
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidStep(t_end));
        }
        let report = u0.check_membership(self.opts.tail_tol);
        if let Some(c) = report.failures().next() {
            return Err(Error::InvalidField(format!(
                "initial velocity violates {} (measured {:e}, threshold {:e})",
                c.name, c.measured, c.threshold
            )));
        }
        let record_every = record_every.max(1);
        let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;

        let mut state = FlowState::initial(u0.clone());
        let mut traj = Trajectory {
            states: vec![state.clone()],
            diagnostics: vec![Diagnostic::of(&state)],
            breakdown: None,
        };
        for step in 1..=steps {
            let t_next = if step == steps { t_end } else { step as f64 * dt };
            let h = t_next - state.t;
            let next = if self.opts.adaptive {
                self.adaptive_step(&state, h, 0)
            } else {
                self.rk4_step(&state, h)
            };
            match next {
                Ok(mut s) => {
                    s.t = t_next;
                    state = s;
                    traj.diagnostics.push(Diagnostic::of(&state));
                    if step % record_every == 0 || step == steps {
                        traj.states.push(state.clone());
                    }
                }
                Err(cause @ (Error::ChartViolation { .. } | Error::NonFinite(_))) => {
                    if traj.states.last().map(|s| s.t) != Some(state.t) {
                        traj.states.push(state.clone());
                    }
                    traj.breakdown = Some(Breakdown {
                        time: state.t,
                        min_eta_x: state.min_eta_x(),
                        cause,
                    });
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(traj)
    }
}

/// Convenience wrapper with default options.
pub fn integrate(u0: &ScalarField1, t_end: f64, dt: f64, record_every: usize) -> Result<Trajectory> {
    LagrangianSolver::new(*u0.grid(), SolverOptions::default()).integrate(u0, t_end, dt, record_every)
}
