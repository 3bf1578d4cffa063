//! Randomized property suites for the operator bounds and the group structure.
//! Each check records `measured <= allowed`; a suite aggregates the worst ratio per check.

use rand::Rng;

use crate::diffeo::{comp1, comp2, distance, invert, Diffeo};
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::field::{ScalarField0, ScalarField1};
use crate::grid::Grid;
use crate::io::KeyValueReport;
use crate::operators::{OperatorWorkspace, Quadrature};
use crate::sample::{random_diffeo, random_displacement, random_field, random_source, BumpSum};

/// Displacement slope cap for random diffeomorphisms.
pub const MAX_SLOPE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub name: &'static str,
    pub measured: f64,
    pub allowed: f64,
}

impl Sample {
    fn new(name: &'static str, measured: f64, allowed: f64) -> Self {
        Self {
            name,
            measured,
            allowed,
        }
    }

    pub fn passed(&self) -> bool {
        self.measured <= self.allowed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub worst_ratio: f64,
    pub worst_measured: f64,
    pub worst_allowed: f64,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub checks: Vec<BoundCheck>,
}

impl SuiteReport {
    pub fn from_samples(samples: impl IntoIterator<Item = Sample>) -> Self {
        let mut checks: Vec<BoundCheck> = Vec::new();
        for s in samples {
            let ratio = s.measured / s.allowed;
            let idx = match checks.iter().position(|c| c.name == s.name) {
                Some(i) => i,
                None => {
                    checks.push(BoundCheck {
                        name: s.name,
                        instances: 0,
                        failures: 0,
                        worst_ratio: f64::NEG_INFINITY,
                        worst_measured: 0.0,
                        worst_allowed: 0.0,
                    });
                    checks.len() - 1
                }
            };
            let c = &mut checks[idx];
            c.instances += 1;
            if !s.passed() {
                c.failures += 1;
            }
            if ratio > c.worst_ratio || ratio.is_nan() {
                c.worst_ratio = ratio;
                c.worst_measured = s.measured;
                c.worst_allowed = s.allowed;
            }
        }
        Self { checks }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(BoundCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(mut self, other: SuiteReport) -> Self {
        self.checks.extend(other.checks);
        self
    }

    pub fn to_report(&self) -> KeyValueReport {
        let mut r = KeyValueReport::new();
        r.flag("passed", self.passed());
        for c in &self.checks {
            r.int(format!("{}.instances", c.name), c.instances as i64)
                .int(format!("{}.failures", c.name), c.failures as i64)
                .num(format!("{}.worst_measured", c.name), c.worst_measured)
                .num(format!("{}.worst_allowed", c.name), c.worst_allowed)
                .num(format!("{}.worst_ratio", c.name), c.worst_ratio);
        }
        r
    }
}

/// Interpolation slack `10 h^2` used by every bound.
pub fn slack(grid: &Grid) -> f64 {
    10.0 * grid.h() * grid.h()
}

#[derive(Debug, Clone)]
struct OperatorInstance {
    phi1: ScalarField0,
    phi2: ScalarField0,
    alpha: f64,
    beta: f64,
    eta: Diffeo,
}

/// Operator bounds on `count` random `(phi, eta)` pairs: the three norm bounds on
/// `L_eta`, linearity, and agreement of the direct and conjugated evaluations.
pub fn operator_suite<R: Rng + ?Sized>(
    rng: &mut R,
    grid: Grid,
    count: usize,
    quadrature: Quadrature,
    exec: Execution,
) -> Result<SuiteReport> {
    let instances = (0..count)
        .map(|_| {
            Ok(OperatorInstance {
                phi1: random_source(rng, grid)?,
                phi2: random_source(rng, grid)?,
                alpha: rng.gen_range(-2.0..=2.0),
                beta: rng.gen_range(-2.0..=2.0),
                eta: random_diffeo(rng, grid, MAX_SLOPE)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per = exec::map_slice(exec, &instances, |inst| operator_samples(inst, quadrature));
    let mut samples = Vec::new();
    for s in per {
        samples.extend(s?);
    }
    Ok(SuiteReport::from_samples(samples))
}

fn operator_samples(inst: &OperatorInstance, quadrature: Quadrature) -> Result<Vec<Sample>> {
    let grid = *inst.eta.grid();
    let mut ws = OperatorWorkspace::with_quadrature(grid, quadrature);
    let slack = slack(&grid);
    let (a, b) = inst.eta.interpolant_derivative_bounds();
    let phi = &inst.phi1;
    let f = ws.l_eta_direct(phi, &inst.eta)?;
    let nc = f.norm_components();
    let (sup_phi, l2_phi) = (phi.sup(), phi.l2());

    let f2 = ws.l_eta_direct(&inst.phi2, &inst.eta)?;
    let mix = ws.l_eta_direct(&inst.phi1.combine(inst.alpha, &inst.phi2, inst.beta)?, &inst.eta)?;
    let lin = mix.sub(&f.combine(inst.alpha, &f2, inst.beta)?)?;
    let lin_err = lin
        .values()
        .iter()
        .chain(lin.derivs())
        .fold(0.0_f64, |m, v| m.max(v.abs()));

    let conj = crate::operators::l_eta_conjugated_with(&mut ws, phi, &inst.eta)?;
    Ok(vec![
        Sample::new("l_eta_sup_bound", nc.sup_u, b / a * sup_phi + slack),
        Sample::new("l_eta_derivative_bound", nc.sup_du, (b * b / a + b) * sup_phi + slack),
        Sample::new("l_eta_h1_bound", nc.h1(), ((b / a).sqrt() + b) * l2_phi + slack),
        Sample::new("linearity", lin_err, 1e-12),
        Sample::new("direct_vs_conjugated", conj.sub(&f)?.sup_nodes(), 5.0 * slack),
    ])
}

/// Sup-norm gap between the central difference of `L_eta` in direction `rho`
/// and `gateaux_df`, for each step `eps`.
pub fn gateaux_sweep(
    phi: &ScalarField0,
    eta: &Diffeo,
    rho: &ScalarField1,
    eps: &[f64],
    quadrature: Quadrature,
) -> Result<Vec<(f64, f64)>> {
    let mut ws = OperatorWorkspace::with_quadrature(*eta.grid(), quadrature);
    let exact = ws.gateaux_df(phi, eta, rho)?;
    eps.iter()
        .map(|&e| {
            let plus = Diffeo::from_displacement(eta.displacement().combine(1.0, rho, e)?)?;
            let minus = Diffeo::from_displacement(eta.displacement().combine(1.0, rho, -e)?)?;
            let fp = ws.l_eta_direct(phi, &plus)?;
            let fm = ws.l_eta_direct(phi, &minus)?;
            let err = (0..fp.values().len())
                .map(|k| ((fp.values()[k] - fm.values()[k]) / (2.0 * e) - exact.values()[k]).abs())
                .fold(0.0, f64::max);
            Ok((e, err))
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone)]
struct GroupInstance {
    alpha: Diffeo,
    beta: Diffeo,
    gamma: Diffeo,
    eta2: Diffeo,
    phi1: ScalarField1,
    phi2: ScalarField1,
}

/// Group axioms, derivative bounds of products and inverses, metric axioms, and
/// the inversion and composition stability bounds on close pairs `(alpha, eta2)`.
pub fn group_suite<R: Rng + ?Sized>(rng: &mut R, grid: Grid, count: usize, exec: Execution) -> Result<SuiteReport> {
    let instances = (0..count)
        .map(|_| {
            let base = random_displacement(rng, grid, MAX_SLOPE)?;
            let delta = rng.gen_range(1e-3..=1e-2);
            let push = random_displacement(rng, grid, delta)?;
            let mut joined = base.bumps.clone();
            joined.extend(push.bumps);
            let phi1 = random_field(rng, grid)?;
            let sigma = rng.gen_range(1e-3..=1e-2);
            let nudge = BumpSum::random(rng).scaled(sigma).field1(grid)?;
            Ok(GroupInstance {
                alpha: Diffeo::from_displacement(base.field1(grid)?)?,
                beta: random_diffeo(rng, grid, MAX_SLOPE)?,
                gamma: random_diffeo(rng, grid, MAX_SLOPE)?,
                eta2: Diffeo::from_displacement(BumpSum { bumps: joined }.field1(grid)?)?,
                phi2: phi1.add(&nudge)?,
                phi1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per = exec::map_slice(exec, &instances, group_samples);
    let mut samples = Vec::new();
    for s in per {
        samples.extend(s?);
    }
    Ok(SuiteReport::from_samples(samples))
}

fn group_samples(inst: &GroupInstance) -> Result<Vec<Sample>> {
    let (al, be, ga) = (&inst.alpha, &inst.beta, &inst.gamma);
    let grid = *al.grid();
    let slack = slack(&grid);
    let id = Diffeo::identity(grid);
    let mut out = Vec::new();

    let ident = distance(&comp2(&id, al)?, al)?.max(distance(&comp2(al, &id)?, al)?);
    out.push(Sample::new("identity", ident, slack));

    let left = comp2(&comp2(al, be)?, ga)?;
    let right = comp2(al, &comp2(be, ga)?)?;
    out.push(Sample::new("associativity", distance(&left, &right)?, slack));

    let xi = invert(al)?;
    let round = distance(&comp2(&xi, al)?, &id)?.max(distance(&comp2(al, &xi)?, &id)?);
    out.push(Sample::new("inverse_round_trip", round, slack));

    let (a1, b1) = al.interpolant_derivative_bounds();
    let (a2, b2) = be.interpolant_derivative_bounds();
    let prod = comp2(al, be)?;
    out.push(Sample::new("product_lower_bound", a1 * a2, prod.a() + 1e-10));
    out.push(Sample::new("product_upper_bound", prod.b(), b1 * b2 + 1e-10));
    out.push(Sample::new("inverse_lower_bound", 1.0 / b1, xi.a() + 1e-10));
    out.push(Sample::new("inverse_upper_bound", xi.b(), 1.0 / a1 + 1e-10));

    let chain = grid
        .nodes()
        .zip(xi.displacement().values().iter().zip(xi.eta_derivs()))
        .map(|(x, (v, d))| al.eval(x + v).map(|(_, e)| (d * e - 1.0).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Sample::new("inverse_chain_rule", chain, 1e-12));

    let (dab, dba) = (distance(al, be)?, distance(be, al)?);
    out.push(Sample::new("metric_symmetry", (dab - dba).abs(), 1e-12));
    out.push(Sample::new(
        "metric_triangle",
        distance(al, ga)?,
        dab + distance(be, ga)? + 1e-12,
    ));

    let eta2 = &inst.eta2;
    let rho = distance(al, eta2)?;
    let xi2 = invert(eta2)?;
    let dxi = xi.displacement().sub(xi2.displacement())?;
    out.push(Sample::new(
        "inversion_stability_sup",
        dxi.sup_interp().0,
        rho / a1 + slack,
    ));
    out.push(Sample::new(
        "inversion_stability_l2",
        dxi.l2(),
        (b1 + rho).sqrt() * rho / a1 + slack,
    ));

    let c1 = inst.phi1.sup_interp().1;
    let sigma = inst.phi1.sub(&inst.phi2)?.sup_interp().0;
    let c11 = comp1(&inst.phi1, al)?;
    let c12 = comp1(&inst.phi1, eta2)?;
    let c22 = comp1(&inst.phi2, eta2)?;
    let sup_eta = al.displacement().sub(eta2.displacement())?.sup_interp().0;
    out.push(Sample::new(
        "comp1_stability",
        c11.sub(&c12)?.sup_interp().0,
        c1 * sup_eta + slack,
    ));
    out.push(Sample::new(
        "composition_sup",
        c11.sub(&c22)?.sup_interp().0,
        c1 * rho + sigma + slack,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn aggregation_keeps_worst_ratio() {
        let r = SuiteReport::from_samples([
            Sample::new("x", 1.0, 4.0),
            Sample::new("x", 3.0, 4.0),
            Sample::new("y", 2.0, 1.0),
        ]);
        let x = r.get("x").unwrap();
        assert_eq!((x.instances, x.failures, x.worst_ratio), (2, 0, 0.75));
        assert_eq!(r.get("y").unwrap().failures, 1);
        assert!(!r.passed());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = [1e-2, 1e-3, 1e-4].iter().map(|&e: &f64| (e, 3.0 * e * e)).collect();
        assert!((loglog_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn small_suites_pass() {
        let grid = Grid::from_bounds(-20.0, 20.0, 1025).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ops = operator_suite(&mut rng, grid, 8, Quadrature::default(), Execution::default()).unwrap();
        assert!(ops.passed(), "{ops:#?}");
        let grp = group_suite(&mut rng, grid, 8, Execution::default()).unwrap();
        assert!(grp.passed(), "{grp:#?}");
    }
}
