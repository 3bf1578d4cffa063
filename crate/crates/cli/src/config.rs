//! TOML run configuration. Unknown keys are rejected; every invariant violation is reported at once.

use std::fs;
use std::path::{Path, PathBuf};

use chflow_core::{Quadrature, SolverOptions};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub converge: Converge,
    #[serde(default)]
    pub checks: Checks,
    /// Directory relative paths are resolved against (the config file's directory).
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub adaptive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Gaussian,
    AntisymmetricGaussian,
    CustomCsv,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tail_tol: f64,
    pub eps_break: f64,
    pub inv_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tail_tol: d.tail_tol,
            eps_break: d.eps_break,
            inv_tol: d.inv_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureName {
    Trapezoid,
    #[default]
    EndCorrected,
}

impl From<QuadratureName> for Quadrature {
    fn from(q: QuadratureName) -> Self {
        match q {
            QuadratureName::Trapezoid => Quadrature::Trapezoid,
            QuadratureName::EndCorrected => Quadrature::EndCorrected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub quadrature: QuadratureName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    States,
    Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("output"),
            formats: vec![Format::States, Format::Diagnostics],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Converge {
    pub levels: Vec<usize>,
}

impl Default for Converge {
    fn default() -> Self {
        Self {
            levels: vec![512, 1024, 2048, 4096],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub operator_instances: usize,
    pub group_instances: usize,
    pub gateaux_instances: usize,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            operator_instances: 200,
            group_instances: 100,
            gateaux_instances: 3,
        }
    }
}

fn default_dt() -> f64 {
    1e-3
}

fn default_record_every() -> usize {
    100
}

fn one() -> f64 {
    1.0
}

impl SimConfig {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            eps_break: self.tolerances.eps_break,
            tail_tol: self.tolerances.tail_tol,
            inv_tol: self.tolerances.inv_tol,
            quadrature: self.numerics.quadrature.into(),
            adaptive: self.time.adaptive,
            ..SolverOptions::default()
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Every violated invariant, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        let g = &self.grid;
        need(
            g.x_min.is_finite() && g.x_max.is_finite(),
            format!("grid bounds must be finite (x_min = {}, x_max = {})", g.x_min, g.x_max),
        );
        need(
            g.x_min < g.x_max,
            format!("grid.x_min < grid.x_max required (got {} and {})", g.x_min, g.x_max),
        );
        need(g.n >= 16, format!("grid.n >= 16 required (got {})", g.n));
        let t = &self.time;
        need(
            t.dt > 0.0 && t.dt.is_finite(),
            format!("time.dt > 0 required (got {})", t.dt),
        );
        need(
            t.t_end > 0.0 && t.t_end.is_finite(),
            format!("time.t_end > 0 required (got {})", t.t_end),
        );
        need(t.record_every >= 1, "time.record_every >= 1 required (got 0)".into());
        let i = &self.initial;
        need(
            i.amplitude.is_finite(),
            format!("initial.amplitude must be finite (got {})", i.amplitude),
        );
        need(
            i.center.is_finite(),
            format!("initial.center must be finite (got {})", i.center),
        );
        need(
            i.width.is_finite() && i.width > 0.0,
            format!("initial.width > 0 required (got {})", i.width),
        );
        need(
            i.kind != InitialKind::CustomCsv || i.path.is_some(),
            "initial.path is required when initial.kind = \"custom_csv\"".into(),
        );
        let tol = &self.tolerances;
        need(
            tol.tail_tol > 0.0 && tol.tail_tol.is_finite(),
            format!("tolerances.tail_tol > 0 required (got {})", tol.tail_tol),
        );
        need(
            tol.eps_break > 0.0 && tol.eps_break < 1.0,
            format!("tolerances.eps_break in (0, 1) required (got {})", tol.eps_break),
        );
        need(
            tol.inv_tol > 0.0 && tol.inv_tol.is_finite(),
            format!("tolerances.inv_tol > 0 required (got {})", tol.inv_tol),
        );
        let lv = &self.converge.levels;
        need(
            lv.len() >= 2,
            format!("converge.levels needs at least 2 entries (got {})", lv.len()),
        );
        need(
            lv.iter().all(|&n| n >= 16),
            "converge.levels entries must be >= 16".into(),
        );
        need(
            lv.windows(2).all(|w| w[0] < w[1]),
            "converge.levels must be strictly increasing".into(),
        );
        v
    }
}

pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base)
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<SimConfig, CliError> {
    let mut cfg: SimConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    cfg.base_dir = base_dir.to_path_buf();
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Validation(v))
    }
}

fn parse_error(text: &str, e: &toml::de::Error) -> CliError {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let message = e.message().trim().to_string();
    let key = message.split('`').nth(1).map(str::to_string).or_else(|| {
        let s = e.span()?;
        let raw = text.get(s.clone())?.trim();
        let k = raw.split('=').next()?.trim().trim_matches(|c| c == '[' || c == ']');
        (!k.is_empty()).then(|| k.to_string())
    });
    CliError::Parse { line, key, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "[grid]\nx_min = -20.0\nx_max = 20.0\nn = 512\n\n[time]\nt_end = 1.0\n\n[initial]\nkind = \"gaussian\"\n";

    #[test]
    fn minimal_gets_defaults() {
        let c = parse_config(MINIMAL, Path::new("")).unwrap();
        assert_eq!(c.time.dt, 1e-3);
        assert_eq!(c.time.record_every, 100);
        assert_eq!(c.tolerances.tail_tol, 1e-8);
        assert_eq!(c.tolerances.eps_break, 1e-3);
        assert_eq!(c.numerics.quadrature, QuadratureName::EndCorrected);
        assert_eq!(
            (c.initial.amplitude, c.initial.center, c.initial.width),
            (1.0, 0.0, 1.0)
        );
    }

    #[test]
    fn small_grid_is_a_validation_error() {
        let text = MINIMAL.replace("n = 512", "n = 4");
        match parse_config(&text, Path::new("")) {
            Err(CliError::Validation(v)) => assert!(v.iter().any(|m| m.contains("grid.n")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let text = MINIMAL
            .replace("n = 512", "n = 4")
            .replace("x_max = 20.0", "x_max = -30.0")
            .replace("t_end = 1.0", "t_end = 0.0\ndt = -1.0");
        match parse_config(&text, Path::new("")) {
            Err(CliError::Validation(v)) => assert_eq!(v.len(), 4, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_key_is_a_parse_error() {
        let text = MINIMAL.replace("n = 512", "n = 512\nn = 1024");
        match parse_config(&text, Path::new("")) {
            Err(CliError::Parse { line, key, .. }) => {
                assert_eq!(line, Some(5));
                assert_eq!(key.as_deref(), Some("n"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        let text = MINIMAL.replace("t_end = 1.0", "t_end = 1.0\nt_final = 2.0");
        match parse_config(&text, Path::new("")) {
            Err(CliError::Parse { line, key, .. }) => {
                assert_eq!(line, Some(8));
                assert_eq!(key.as_deref(), Some("t_final"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn custom_csv_needs_path() {
        let text = MINIMAL.replace("\"gaussian\"", "\"custom_csv\"");
        assert!(matches!(
            parse_config(&text, Path::new("")),
            Err(CliError::Validation(_))
        ));
    }
}
