//! The five subcommands. Each writes its artifacts under the output directory and
//! returns the summary report it also saved as a key-value file.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chflow_core::checks::{gateaux_sweep, group_suite, loglog_slope, operator_suite, Sample, SuiteReport};
use chflow_core::convergence::{ConvergenceTable, Study};
use chflow_core::io::{write_columns, KeyValueReport};
use chflow_core::lagrangian::reconstruct_u_with;
use chflow_core::sample::{random_diffeo, random_field, random_source};
use chflow_core::{compare, EulerianOracle, Execution, Grid, LagrangianSolver, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Format, InitialKind, SimConfig};
use crate::error::CliError;
use crate::initial::{initial_on, make_initial};

/// Accepted range for the fitted Gateaux finite-difference slope.
pub const GATEAUX_SLOPE: (f64, f64) = (1.7, 2.3);
pub const GATEAUX_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: SimConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl Context {
    fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::from_bounds(
            self.cfg.grid.x_min,
            self.cfg.grid.x_max,
            self.cfg.grid.n,
        )?)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn wants(&self, f: Format) -> bool {
        self.cfg.output.formats.contains(&f)
    }
}

fn save(report: &KeyValueReport, path: &Path) -> Result<(), CliError> {
    report
        .write(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(chflow_core::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn breakdown_of(traj: &Trajectory) -> Option<CliError> {
    traj.breakdown.as_ref().map(|b| CliError::Breakdown {
        time: b.time,
        min_eta_x: b.min_eta_x,
        cause: b.cause.clone(),
    })
}

/// Integrates the configured flow and writes `state_NNNNN.csv`, `times.csv`,
/// `diagnostics.csv` and `summary.txt`. A breakdown still writes every artifact.
pub fn cmd_run(ctx: &Context) -> Result<KeyValueReport, CliError> {
    let cfg = &ctx.cfg;
    let u0 = make_initial(cfg)?;
    let grid = *u0.grid();
    let opts = cfg.solver_options();
    let traj = LagrangianSolver::new(grid, opts).integrate(&u0, cfg.time.t_end, cfg.time.dt, cfg.time.record_every)?;

    if ctx.wants(Format::States) {
        let x: Vec<f64> = grid.nodes().collect();
        let mut times = Vec::with_capacity(traj.states.len());
        for (i, s) in traj.states.iter().enumerate() {
            let u = reconstruct_u_with(s, opts.inv_tol)?;
            let eta = s.eta.eta_values();
            let eta_x = s.eta.eta_derivs();
            let p = ctx.path(&format!("state_{i:05}.csv"));
            write_columns(
                &p,
                &["x", "eta", "eta_x", "U", "U_x", "u", "u_x"],
                &[
                    &x,
                    &eta,
                    &eta_x,
                    s.velocity.values(),
                    s.velocity.derivs(),
                    u.values(),
                    u.derivs(),
                ],
            )
            .map_err(io_err(&p))?;
            times.push(s.t);
        }
        let p = ctx.path("times.csv");
        write_columns(&p, &["t"], &[&times]).map_err(io_err(&p))?;
    }
    if ctx.wants(Format::Diagnostics) {
        let d = &traj.diagnostics;
        let col = |f: fn(&chflow_core::lagrangian::Diagnostic) -> f64| d.iter().map(f).collect::<Vec<_>>();
        let p = ctx.path("diagnostics.csv");
        write_columns(
            &p,
            &["t", "energy", "momentum", "min_eta_x", "sup_u"],
            &[
                &col(|d| d.t),
                &col(|d| d.energy),
                &col(|d| d.momentum),
                &col(|d| d.min_eta_x),
                &col(|d| d.sup_u),
            ],
        )
        .map_err(io_err(&p))?;
    }

    let first = traj.diagnostics.first().expect("initial diagnostic");
    let last = traj.diagnostics.last().expect("initial diagnostic");
    let mut r = KeyValueReport::new();
    r.text("command", "run")
        .text("status", if traj.completed() { "completed" } else { "breakdown" })
        .int("n", grid.len() as i64)
        .num("x_min", grid.x_min())
        .num("x_max", grid.x_max())
        .num("dt", cfg.time.dt)
        .num("t_end", cfg.time.t_end)
        .num("final_time", last.t)
        .int("steps", traj.diagnostics.len() as i64 - 1)
        .int("recorded_states", traj.states.len() as i64)
        .flag("breakdown", !traj.completed());
    if let Some(b) = &traj.breakdown {
        r.num("breakdown_time", b.time)
            .num("breakdown_min_eta_x", b.min_eta_x)
            .text("breakdown_cause", b.cause.to_string());
    }
    r.num("energy_initial", first.energy)
        .num("energy_final", last.energy)
        .num("energy_drift", traj.energy_drift())
        .num("momentum_initial", first.momentum)
        .num("momentum_final", last.momentum)
        .num("momentum_drift", traj.momentum_drift())
        .num("min_eta_x_final", last.min_eta_x);
    save(&r, &ctx.path("summary.txt"))?;
    match breakdown_of(&traj) {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

fn analytic_initial(ctx: &Context, what: &str) -> Result<(), CliError> {
    if ctx.cfg.initial.kind == InitialKind::CustomCsv {
        return Err(CliError::Usage(format!(
            "{what} resamples the initial data on several grids; use an analytic initial.kind"
        )));
    }
    Ok(())
}

fn write_table(path: &Path, table: &ConvergenceTable) -> Result<(), CliError> {
    let n: Vec<f64> = table.levels.iter().map(|l| l.n as f64).collect();
    let h: Vec<f64> = table.levels.iter().map(|l| l.h).collect();
    let dt: Vec<f64> = table.levels.iter().map(|l| l.dt).collect();
    let e: Vec<f64> = table.levels.iter().map(|l| l.error).collect();
    write_columns(path, &["n", "h", "dt", "error"], &[&n, &h, &dt, &e]).map_err(io_err(path))
}

fn table_keys(r: &mut KeyValueReport, prefix: &str, table: &ConvergenceTable) {
    for (i, l) in table.levels.iter().enumerate() {
        r.int(format!("{prefix}.level.{i}.n"), l.n as i64)
            .num(format!("{prefix}.level.{i}.error"), l.error);
    }
    for (i, o) in table.orders.iter().enumerate() {
        r.num(format!("{prefix}.order.{i}"), *o);
    }
    if let Some(o) = table.finest_order() {
        r.num(format!("{prefix}.measured_order"), o);
    }
}

fn with_study<T>(ctx: &Context, f: impl FnOnce(&Study) -> Result<T, CliError>) -> Result<T, CliError> {
    let cfg = &ctx.cfg;
    let init = |g: Grid| initial_on(cfg, g).map_err(|e| chflow_core::Error::InvalidField(e.to_string()));
    let study = Study {
        x_min: cfg.grid.x_min,
        x_max: cfg.grid.x_max,
        t_end: cfg.time.t_end,
        opts: cfg.solver_options(),
        initial: &init,
    };
    f(&study)
}

/// Self-convergence over `converge.levels`: the difference between consecutive
/// levels at `t_end`, and the observed order in `h`.
pub fn cmd_converge(ctx: &Context) -> Result<KeyValueReport, CliError> {
    analytic_initial(ctx, "converge")?;
    make_initial(&ctx.cfg)?;
    let levels = &ctx.cfg.converge.levels;
    let table = with_study(ctx, |s| {
        s.self_convergence(levels, ctx.cfg.time.dt, Execution::default())
            .map_err(CliError::from)
    })?;
    write_table(&ctx.path("convergence.csv"), &table)?;
    let mut r = KeyValueReport::new();
    r.text("command", "converge")
        .num("t_end", ctx.cfg.time.t_end)
        .num("dt", ctx.cfg.time.dt);
    table_keys(&mut r, "self", &table);
    save(&r, &ctx.path("convergence.txt"))?;
    Ok(r)
}

fn finish_suite(ctx: &Context, name: &str, file: &str, suite: SuiteReport) -> Result<KeyValueReport, CliError> {
    let mut r = KeyValueReport::new();
    r.text("command", name).int("seed", ctx.seed as i64);
    for (k, v) in suite.to_report().entries() {
        r.text(k.clone(), v.clone());
    }
    save(&r, &ctx.path(file))?;
    let failed = suite.checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: suite.checks.len(),
        });
    }
    Ok(r)
}

/// Operator bounds on random `(phi, eta)` pairs plus the Gateaux gradient check.
pub fn cmd_check_operators(ctx: &Context) -> Result<KeyValueReport, CliError> {
    let grid = ctx.grid()?;
    let quad = ctx.cfg.numerics.quadrature.into();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut suite = operator_suite(
        &mut rng,
        grid,
        ctx.cfg.checks.operator_instances,
        quad,
        Execution::default(),
    )?;
    let mut samples = Vec::new();
    for _ in 0..ctx.cfg.checks.gateaux_instances {
        let phi = random_source(&mut rng, grid)?;
        let eta = random_diffeo(&mut rng, grid, chflow_core::checks::MAX_SLOPE)?;
        let rho = random_field(&mut rng, grid)?;
        let sweep = gateaux_sweep(&phi, &eta, &rho, &GATEAUX_EPS, quad)?;
        let slope = loglog_slope(&sweep);
        samples.push(Sample {
            name: "gateaux_slope_min",
            measured: GATEAUX_SLOPE.0,
            allowed: slope,
        });
        samples.push(Sample {
            name: "gateaux_slope_max",
            measured: slope,
            allowed: GATEAUX_SLOPE.1,
        });
    }
    suite = suite.merge(SuiteReport::from_samples(samples));
    finish_suite(ctx, "check-operators", "operators.txt", suite)
}

/// Group axioms and the inversion / composition stability bounds on random diffeomorphisms.
pub fn cmd_check_group(ctx: &Context) -> Result<KeyValueReport, CliError> {
    let grid = ctx.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let suite = group_suite(&mut rng, grid, ctx.cfg.checks.group_instances, Execution::default())?;
    finish_suite(ctx, "check-group", "groupcheck.txt", suite)
}

/// Lagrangian against Eulerian at every recorded time, then the gap at `t_end`
/// under simultaneous refinement of `h` and `dt` over `converge.levels`.
pub fn cmd_oracle_compare(ctx: &Context) -> Result<KeyValueReport, CliError> {
    let cfg = &ctx.cfg;
    let u0 = make_initial(cfg)?;
    let grid = *u0.grid();
    let opts = cfg.solver_options();
    let every = cfg.time.record_every;
    let lag = LagrangianSolver::new(grid, opts).integrate(&u0, cfg.time.t_end, cfg.time.dt, every)?;
    if let Some(e) = breakdown_of(&lag) {
        return Err(e);
    }
    let eul = EulerianOracle::new(grid, opts.quadrature).integrate(&u0, cfg.time.t_end, cfg.time.dt, every)?;
    if let Some(t) = eul.blowup {
        return Err(CliError::Numerical(chflow_core::Error::NonFinite(t)));
    }
    let times: Vec<f64> = lag.states.iter().map(|s| s.t).collect();
    let rows = compare(&lag, &eul, &times)?;
    let p = ctx.path("comparison.csv");
    let col = |f: fn(&chflow_core::eulerian::ComparisonRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    write_columns(
        &p,
        &["t", "sup_diff", "l2_diff"],
        &[&col(|r| r.t), &col(|r| r.sup_diff), &col(|r| r.l2_diff)],
    )
    .map_err(io_err(&p))?;

    let table = if cfg.initial.kind == InitialKind::CustomCsv {
        None
    } else {
        let t = with_study(ctx, |s| {
            s.cross_method(&cfg.converge.levels, cfg.time.dt, Execution::default())
                .map_err(CliError::from)
        })?;
        write_table(&ctx.path("oracle_convergence.csv"), &t)?;
        Some(t)
    };

    let last = rows.last().expect("at least one compared time");
    let mut r = KeyValueReport::new();
    r.text("command", "oracle-compare")
        .int("n", grid.len() as i64)
        .num("dt", cfg.time.dt)
        .num("t_end", cfg.time.t_end)
        .num("final_sup_diff", last.sup_diff)
        .num("final_l2_diff", last.l2_diff)
        .num("max_sup_diff", rows.iter().map(|r| r.sup_diff).fold(0.0, f64::max))
        .num("lagrangian_energy_drift", lag.energy_drift())
        .num("lagrangian_momentum_drift", lag.momentum_drift())
        .num("eulerian_energy_drift", eul.energy_drift())
        .num("eulerian_momentum_drift", eul.momentum_drift());
    match &table {
        Some(t) => table_keys(&mut r, "cross", t),
        None => {
            r.flag("cross.skipped", true);
        }
    }
    save(&r, &ctx.path("oracle.txt"))?;
    Ok(r)
}

/// Writes the failure report; best effort, since the directory may be the problem.
pub fn write_failure(out: &Path, err: &CliError) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(out.join("failure.txt"))?);
    w.write_all(err.report().render().as_bytes())?;
    w.flush()
}

pub fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}
