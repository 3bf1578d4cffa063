//! Method-of-lines reference solver for `u_t + u u_x = -L(u^2 + u_x^2/2)` on the
//! fixed grid, used to cross-check the Lagrangian solver. `u_x` comes from
//! fourth-order centred differences with one-sided stencils at the boundary.

use crate::error::{Error, Result};
use crate::field::{ScalarField0, ScalarField1};
use crate::grid::Grid;
use crate::lagrangian::{conserved_quantities, reconstruct_u, relative_drift, Trajectory};
use crate::operators::{finite_difference_4, OperatorWorkspace, Quadrature};

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianState {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianTrajectory {
    pub grid: Grid,
    pub states: Vec<EulerianState>,
    /// `(t, energy, momentum)` after every step.
    pub diagnostics: Vec<(f64, f64, f64)>,
    /// Time of the last finite state when the run blew up.
    pub blowup: Option<f64>,
}

impl EulerianTrajectory {
    pub fn energy_drift(&self) -> f64 {
        relative_drift(self.diagnostics.iter().map(|d| d.1))
    }

    pub fn momentum_drift(&self) -> f64 {
        relative_drift(self.diagnostics.iter().map(|d| d.2))
    }

    pub fn state_at(&self, t: f64) -> Option<&EulerianState> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.states.iter().find(|s| (s.t - t).abs() <= tol)
    }
}

/// Fourth-order centred first derivative, one-sided next to the boundary.
pub fn derivative_fd4(u: &[f64], h: f64) -> Vec<f64> {
    finite_difference_4(u, h)
}

pub fn field_of(grid: Grid, u: &[f64]) -> Result<ScalarField1> {
    ScalarField1::new(grid, u.to_vec(), derivative_fd4(u, grid.h()))
}

#[derive(Debug, Clone)]
pub struct EulerianOracle {
    grid: Grid,
    ws: OperatorWorkspace,
}

impl EulerianOracle {
    pub fn new(grid: Grid, quadrature: Quadrature) -> Self {
        Self {
            grid,
            ws: OperatorWorkspace::with_quadrature(grid, quadrature),
        }
    }

    /// `u_t = -u u_x - L(u^2 + u_x^2 / 2)`.
    pub fn euler_rhs(&mut self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        let ux = derivative_fd4(u, self.grid.h());
        let src: Vec<f64> = u.iter().zip(&ux).map(|(a, b)| a * a + 0.5 * b * b).collect();
        let force = self.ws.l_op(&ScalarField0::new(self.grid, src)?)?;
        Ok((0..u.len()).map(|k| -u[k] * ux[k] - force.values()[k]).collect())
    }

    fn rk4(&mut self, u: &[f64], dt: f64) -> Result<Vec<f64>> {
        let stage =
            |base: &[f64], c: f64, k: &[f64]| -> Vec<f64> { base.iter().zip(k).map(|(a, b)| a + c * b).collect() };
        let k1 = self.euler_rhs(u)?;
        let k2 = self.euler_rhs(&stage(u, 0.5 * dt, &k1))?;
        let k3 = self.euler_rhs(&stage(u, 0.5 * dt, &k2))?;
        let k4 = self.euler_rhs(&stage(u, dt, &k3))?;
        Ok((0..u.len())
            .map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]))
            .collect())
    }

    /// Classical RK4 from `u0` to `t_end`; stops at the first non-finite value.
    pub fn integrate(
        &mut self,
        u0: &ScalarField1,
        t_end: f64,
        dt: f64,
        record_every: usize,
    ) -> Result<EulerianTrajectory> {
        if u0.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidStep(dt));
        }
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidStep(t_end));
        }
        let record_every = record_every.max(1);
        let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
        let mut state = EulerianState {
            t: 0.0,
            u: u0.values().to_vec(),
        };
        let diag = |s: &EulerianState, grid: Grid| -> Result<(f64, f64, f64)> {
            let (e, m) = conserved_quantities(&field_of(grid, &s.u)?);
            Ok((s.t, e, m))
        };
        let mut traj = EulerianTrajectory {
            grid: self.grid,
            diagnostics: vec![diag(&state, self.grid)?],
            states: vec![state.clone()],
            blowup: None,
        };
        for step in 1..=steps {
            let t_next = if step == steps { t_end } else { step as f64 * dt };
            let next = self.rk4(&state.u, t_next - state.t);
            match next {
                Ok(u) if u.iter().all(|v| v.is_finite()) => {
                    state = EulerianState { t: t_next, u };
                    traj.diagnostics.push(diag(&state, self.grid)?);
                    if step % record_every == 0 || step == steps {
                        traj.states.push(state.clone());
                    }
                }
                Ok(_) | Err(Error::InvalidField(_)) => {
                    if traj.states.last().map(|s| s.t) != Some(state.t) {
                        traj.states.push(state.clone());
                    }
                    traj.blowup = Some(state.t);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(traj)
    }
}

pub fn integrate_eulerian(u0: &ScalarField1, t_end: f64, dt: f64) -> Result<EulerianTrajectory> {
    EulerianOracle::new(*u0.grid(), Quadrature::default()).integrate(u0, t_end, dt, 1)
}

/// Anything that can produce the Eulerian velocity at recorded times.
pub trait SolutionHistory {
    fn grid(&self) -> &Grid;
    fn velocity_at(&self, t: f64) -> Result<ScalarField1>;
}

impl SolutionHistory for Trajectory {
    fn grid(&self) -> &Grid {
        self.states[0].grid()
    }

    fn velocity_at(&self, t: f64) -> Result<ScalarField1> {
        let s = self.state_at(t).ok_or(Error::TimeMismatch(t))?;
        reconstruct_u(s)
    }
}

impl SolutionHistory for EulerianTrajectory {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn velocity_at(&self, t: f64) -> Result<ScalarField1> {
        let s = self.state_at(t).ok_or(Error::TimeMismatch(t))?;
        field_of(self.grid, &s.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub sup_diff: f64,
    pub l2_diff: f64,
}

/// Sup-norm and L2 differences of the velocity at each requested time.
pub fn compare(a: &dyn SolutionHistory, b: &dyn SolutionHistory, times: &[f64]) -> Result<Vec<ComparisonRow>> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    times
        .iter()
        .map(|&t| {
            let d = a.velocity_at(t)?.sub(&b.velocity_at(t)?)?;
            Ok(ComparisonRow {
                t,
                sup_diff: d.sup_nodes(),
                l2_diff: d.l2(),
            })
        })
        .collect()
}
