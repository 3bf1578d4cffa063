//! Refinement studies: self-convergence of the Lagrangian solver and the
//! Lagrangian-versus-Eulerian gap. Levels are independent and run concurrently.

use crate::error::Result;
use crate::eulerian::{compare, EulerianOracle};
use crate::exec::{self, Execution};
use crate::field::ScalarField1;
use crate::grid::Grid;
use crate::lagrangian::{reconstruct_u, LagrangianSolver, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    /// Error measure attached to this level (meaning depends on the study).
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub levels: Vec<Level>,
    /// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive levels.
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    fn from_levels(levels: Vec<Level>) -> Self {
        let orders = levels
            .windows(2)
            .map(|w| (w[0].error / w[1].error).ln() / (w[0].h / w[1].h).ln())
            .collect();
        Self { levels, orders }
    }

    pub fn finest_order(&self) -> Option<f64> {
        self.orders.last().copied()
    }
}

/// Shared description of a refinement study.
#[derive(Clone, Copy)]
pub struct Study<'a> {
    pub x_min: f64,
    pub x_max: f64,
    pub t_end: f64,
    pub opts: SolverOptions,
    pub initial: &'a (dyn Fn(Grid) -> Result<ScalarField1> + Sync),
}

impl Study<'_> {
    fn solve_lagrangian(&self, n: usize, dt: f64) -> Result<ScalarField1> {
        let grid = Grid::from_bounds(self.x_min, self.x_max, n)?;
        let u0 = (self.initial)(grid)?;
        let traj = LagrangianSolver::new(grid, self.opts)
            .integrate(&u0, self.t_end, dt, usize::MAX)?
            .into_result()?;
        reconstruct_u(traj.final_state().expect("at least one state"))
    }

    /// Successive-difference (Richardson) estimate: the error of level `i` is the
    /// sup over its nodes of `|u_i - u_{i+1}|`, the finer solution read through its
    /// Hermite interpolant. The finest level carries no error of its own.
    pub fn self_convergence(&self, ns: &[usize], dt: f64, exec: Execution) -> Result<ConvergenceTable> {
        let sols = exec::map_slice(exec, ns, |&n| self.solve_lagrangian(n, dt));
        let sols: Vec<ScalarField1> = sols.into_iter().collect::<Result<_>>()?;
        let mut levels = Vec::new();
        for (i, pair) in sols.windows(2).enumerate() {
            let (coarse, fine) = (&pair[0], &pair[1]);
            let g = coarse.grid();
            let mut err: f64 = 0.0;
            for k in 0..g.len() {
                let (v, _) = fine.eval(g.x(k))?;
                err = err.max((coarse.values()[k] - v).abs());
            }
            levels.push(Level {
                n: ns[i],
                h: g.h(),
                dt,
                error: err,
            });
        }
        Ok(ConvergenceTable::from_levels(levels))
    }

    /// Sup-norm distance at `t_end` between the solutions from `u0` and
    /// `u0 + delta * w` for each `delta`; the runs are independent.
    pub fn perturbation(
        &self,
        n: usize,
        dt: f64,
        direction: &(dyn Fn(Grid) -> Result<ScalarField1> + Sync),
        deltas: &[f64],
        exec: Execution,
    ) -> Result<Vec<(f64, f64)>> {
        let grid = Grid::from_bounds(self.x_min, self.x_max, n)?;
        let base = (self.initial)(grid)?;
        let w = direction(grid)?;
        let mut scales = vec![0.0];
        scales.extend_from_slice(deltas);
        let sols = exec::map_slice(exec, &scales, |&d| -> Result<ScalarField1> {
            let u0 = base.combine(1.0, &w, d)?;
            let traj = LagrangianSolver::new(grid, self.opts)
                .integrate(&u0, self.t_end, dt, usize::MAX)?
                .into_result()?;
            reconstruct_u(traj.final_state().expect("at least one state"))
        });
        let sols: Vec<ScalarField1> = sols.into_iter().collect::<Result<_>>()?;
        deltas
            .iter()
            .zip(&sols[1..])
            .map(|(&d, u)| Ok((d, u.sub(&sols[0])?.sup_nodes())))
            .collect()
    }

    /// Sup-norm gap between the Lagrangian and Eulerian solutions at `t_end` under
    /// simultaneous refinement: `dt` scales with `h` from `(ns[0], dt0)`.
    pub fn cross_method(&self, ns: &[usize], dt0: f64, exec: Execution) -> Result<ConvergenceTable> {
        let h0 = (self.x_max - self.x_min) / (ns[0] - 1) as f64;
        let levels = exec::map_slice(exec, ns, |&n| -> Result<Level> {
            let grid = Grid::from_bounds(self.x_min, self.x_max, n)?;
            let dt = dt0 * grid.h() / h0;
            let u0 = (self.initial)(grid)?;
            let lag = LagrangianSolver::new(grid, self.opts)
                .integrate(&u0, self.t_end, dt, usize::MAX)?
                .into_result()?;
            let eul = EulerianOracle::new(grid, self.opts.quadrature).integrate(&u0, self.t_end, dt, usize::MAX)?;
            let t = lag.final_state().expect("state").t;
            let row = compare(&lag, &eul, &[t])?[0];
            Ok(Level {
                n,
                h: grid.h(),
                dt,
                error: row.sup_diff,
            })
        });
        Ok(ConvergenceTable::from_levels(
            levels.into_iter().collect::<Result<_>>()?,
        ))
    }
}
