//! Initial velocity fields with analytic derivative channels.

use chflow_core::{io, Grid, ScalarField1};

use crate::config::{InitialKind, SimConfig};
use crate::error::CliError;

/// The configured initial velocity on the configured grid, checked for membership.
pub fn make_initial(cfg: &SimConfig) -> Result<ScalarField1, CliError> {
    let grid = Grid::from_bounds(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n)?;
    initial_on(cfg, grid)
}

/// The configured initial velocity sampled on `grid` (analytic kinds only when
/// `grid` differs from the configured one).
pub fn initial_on(cfg: &SimConfig, grid: Grid) -> Result<ScalarField1, CliError> {
    let p = &cfg.initial;
    let (a, x0, w) = (p.amplitude, p.center, p.width);
    let f = match p.kind {
        InitialKind::Gaussian => ScalarField1::from_fn(grid, |x| {
            let s = (x - x0) / w;
            let e = a * (-s * s).exp();
            (e, -2.0 * s / w * e)
        }),
        InitialKind::AntisymmetricGaussian => ScalarField1::from_fn(grid, |x| {
            let s = (x - x0) / w;
            let e = a * (-s * s).exp();
            ((x - x0) * e, (1.0 - 2.0 * s * s) * e)
        }),
        InitialKind::CustomCsv => return read_custom(cfg, grid),
    };
    let f = f.map_err(|e| CliError::Admissibility {
        condition: "finite_samples".into(),
        detail: e.to_string(),
    })?;
    admissible(f, cfg.tolerances.tail_tol)
}

fn read_custom(cfg: &SimConfig, grid: Grid) -> Result<ScalarField1, CliError> {
    let rel = cfg
        .initial
        .path
        .as_ref()
        .ok_or_else(|| CliError::Usage("initial.path is not set".into()))?;
    let path = cfg.resolve(rel);
    let cols = io::read_columns(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let column = |name: &str, condition: &str| {
        cols.get(name).ok_or_else(|| CliError::Admissibility {
            condition: condition.into(),
            detail: format!("{} has no '{name}' column (need x, u, du)", path.display()),
        })
    };
    let x = column("x", "grid_abscissae")?;
    let u = column("u", "values")?;
    let du = column("du", "c1_derivative")?;
    if x.len() != grid.len() {
        return Err(CliError::Admissibility {
            condition: "grid_abscissae".into(),
            detail: format!("expected {} rows, found {}", grid.len(), x.len()),
        });
    }
    if let Some(k) = (0..x.len()).find(|&k| (x[k] - grid.x(k)).abs() > 1e-9 * grid.h()) {
        return Err(CliError::Admissibility {
            condition: "grid_abscissae".into(),
            detail: format!("row {k}: x = {} is not grid node {}", x[k], grid.x(k)),
        });
    }
    let f = ScalarField1::new(grid, u.clone(), du.clone()).map_err(|e| CliError::Admissibility {
        condition: "finite_samples".into(),
        detail: e.to_string(),
    })?;
    admissible(f, cfg.tolerances.tail_tol)
}

fn admissible(f: ScalarField1, tail_tol: f64) -> Result<ScalarField1, CliError> {
    let report = f.check_membership(tail_tol);
    if let Some(c) = report.failures().next() {
        return Err(CliError::Admissibility {
            condition: c.name.to_string(),
            detail: format!("measured {:e}, threshold {:e}", c.measured, c.threshold),
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use std::path::Path;

    fn cfg(initial: &str) -> SimConfig {
        let text =
            format!("[grid]\nx_min = -20.0\nx_max = 20.0\nn = 4001\n[time]\nt_end = 1.0\n[initial]\n{initial}\n");
        parse_config(&text, Path::new("")).unwrap()
    }

    #[test]
    fn zero_amplitude_is_zero() {
        let f = make_initial(&cfg("kind = \"gaussian\"\namplitude = 0.0")).unwrap();
        assert!(f.values().iter().chain(f.derivs()).all(|v| *v == 0.0));
    }

    #[test]
    fn unit_gaussian_norm() {
        let f = make_initial(&cfg("kind = \"gaussian\"")).unwrap();
        assert!((f.norm_11() - 3.44100).abs() < 1e-5, "{}", f.norm_11());
    }

    #[test]
    fn antisymmetric_derivative_is_exact() {
        let f = make_initial(&cfg(
            "kind = \"antisymmetric_gaussian\"\namplitude = -1.0\ncenter = 0.5\nwidth = 1.5",
        ))
        .unwrap();
        assert!(f.derivative_consistency() < 1e-4);
        let (v, _) = f.eval(0.5).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn wide_profile_fails_decay() {
        match make_initial(&cfg("kind = \"gaussian\"\nwidth = 10.0")) {
            Err(CliError::Admissibility { condition, .. }) => assert_eq!(condition, "boundary_decay"),
            other => panic!("{other:?}"),
        }
    }
}
