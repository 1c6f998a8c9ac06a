//! Randomized property suites over the modular, operator, discrete
//! monotonicity, and solver layers.
//!
//! Every trial draws from its own generator `named_rng(seed, "<suite>/<property>/<i>")`,
//! so results do not depend on thread scheduling and trials are reported
//! in index order.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{catalog, catalog_problem, CatalogProblem};
use crate::error::{MpsError, Result};
use crate::exponent_fields::{Domain, ExponentFields, ExponentSet, ExprField, WeightSet};
use crate::fem::{Discretization, FemSpace};
use crate::musielak::{luxemburg_norm, modular_norm_bounds_slack, PowerSum, QuadratureGrid, SampledPhases, DEFAULT_NORM_TOL};
use crate::numeric::{dot, named_rng, norm2, sub};
use crate::operator::{flux_at, power_diff_bound, scaled_flux_gap_bound, KirchhoffModel};
use crate::problem::{ProblemSpec, Rhs};
use crate::solvers::{
    convergence_study, growth_validator, solve_problem1, solve_problem2, uniqueness_probe, ManufacturedCase, SolveConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Modular,
    Operator,
    Monotone,
    Solver,
}

pub const SUITES: [Suite; 4] = [Suite::Modular, Suite::Operator, Suite::Monotone, Suite::Solver];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Modular => "modular",
            Suite::Operator => "operator",
            Suite::Monotone => "monotone",
            Suite::Solver => "solver",
        }
    }
}

impl FromStr for Suite {
    type Err = MpsError;

    fn from_str(s: &str) -> Result<Self> {
        SUITES
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| MpsError::Config(format!("unknown suite '{s}' (known: modular, operator, monotone, solver)")))
    }
}

/// Outcome of one property: how many trials passed and the smallest
/// normalized margin seen (negative beyond `-tolerance` means a failure).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub worst_slack: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyReport {
    pub fn ok(&self) -> bool {
        self.trials > 0 && self.passed == self.trials
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub properties: Vec<PropertyReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyReport::ok)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// One line per property, then the suite verdict.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            let _ = write!(
                out,
                "{} {}: {}/{} passed, worst slack {:.3e} (tolerance {:.0e})",
                if p.ok() { "PASS" } else { "FAIL" },
                p.name,
                p.passed,
                p.trials,
                p.worst_slack,
                p.tolerance
            );
            if let Some(n) = &p.note {
                let _ = write!(out, "; {n}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "suite {}: {}", self.suite.name(), if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs `suite`. `cases` overrides the number of random instances of every
/// field-based property (the suite defaults are used when `None`); the
/// pointwise sweeps keep their fixed sizes. In the solver suite `cases`
/// sets the number of uniqueness-probe starts.
pub fn run_suite(suite: Suite, seed: u64, cases: Option<usize>) -> Result<SuiteReport> {
    if cases == Some(0) {
        return Err(MpsError::Config("cases must be positive".into()));
    }
    let properties = match suite {
        Suite::Modular => modular_suite(seed, cases)?,
        Suite::Operator => operator_suite(seed, cases)?,
        Suite::Monotone => monotone_suite(seed, cases)?,
        Suite::Solver => solver_suite(seed, cases)?,
    };
    Ok(SuiteReport { suite, seed, properties })
}

struct Trial {
    slack: f64,
    ok: bool,
    note: Option<String>,
}

impl Trial {
    fn margin(slack: f64, tolerance: f64) -> Self {
        Trial { slack, ok: slack >= -tolerance, note: None }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

fn report(name: &str, tolerance: f64, trials: Vec<Trial>, note: Option<String>) -> PropertyReport {
    let passed = trials.iter().filter(|t| t.ok).count();
    let worst_slack = trials.iter().map(|t| t.slack).fold(f64::INFINITY, f64::min);
    let first_failure = trials.iter().position(|t| !t.ok).map(|i| {
        let detail = trials[i].note.clone().unwrap_or_default();
        format!("first failure at trial {i} {detail}")
    });
    PropertyReport {
        name: name.to_string(),
        trials: trials.len(),
        passed,
        worst_slack,
        tolerance,
        note: first_failure.or(note),
    }
}

fn par_trials<F>(seed: u64, tag: &str, n: usize, f: F) -> Result<Vec<Trial>>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Result<Trial> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = named_rng(seed, &format!("{tag}/{i}"));
            f(&mut rng, i)
        })
        .collect()
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..=hi.log10()))
}

/// A catalog-form field with values in `[lo, hi]` on the domain.
fn random_field(rng: &mut impl Rng, lo: f64, hi: f64) -> ExprField {
    match rng.random_range(0..3) {
        0 => ExprField::constant(rng.random_range(lo..=hi)),
        1 => {
            let a = rng.random_range(lo..=hi);
            let b = rng.random_range(lo..=hi);
            ExprField::affine(a, b - a, 0.0)
        }
        _ => {
            let base = 0.5 * (lo + hi);
            let amp = rng.random_range(0.0..=0.5 * (hi - lo));
            ExprField::sinusoidal(base, amp, rng.random_range(0.25..=2.0), rng.random_range(0..2))
        }
    }
}

fn shifted(f: &ExprField, d: f64) -> ExprField {
    match *f {
        ExprField::Constant { value } => ExprField::constant(value + d),
        ExprField::Affine { offset, slope_x, slope_y } => ExprField::affine(offset + d, slope_x, slope_y),
        ExprField::Sinusoidal { base, amp, freq, axis } => ExprField::sinusoidal(base + d, amp, freq, axis),
    }
}

fn random_grid(rng: &mut impl Rng) -> QuadratureGrid {
    if rng.random::<bool>() {
        QuadratureGrid::uniform_gauss(Domain::unit_interval(), 16)
    } else {
        QuadratureGrid::uniform_gauss(Domain::unit_square(), 6)
    }
}

fn random_values(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let scale = log_uniform(rng, 0.03, 30.0);
    (0..n)
        .map(|_| if rng.random::<f64>() < 0.05 { 0.0 } else { scale * rng.random_range(-1.0..=1.0) })
        .collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

// ---------------------------------------------------------------- modular

fn modular_suite(seed: u64, cases: Option<usize>) -> Result<Vec<PropertyReport>> {
    let n = cases.unwrap_or(500);
    let tag = |p: &str| format!("modular/{p}");
    let mut out = Vec::new();

    let t = par_trials(seed, &tag("lebesgue-norm-bounds"), n, |rng, _| {
        let grid = random_grid(rng);
        let h = random_field(rng, 1.1, 5.0);
        let u = random_values(rng, grid.len());
        let ps = PowerSum::lebesgue(&u, &grid.sample(&h), &grid)?;
        let norm = luxemburg_norm(&ps, DEFAULT_NORM_TOL)?;
        let (lo, hi) = h.exact_extrema(grid.domain());
        let (slack, consistent) = modular_norm_bounds_slack(ps.value(), norm, lo, hi);
        Ok(Trial { slack, ok: slack >= -1e-8 && consistent, note: Some(format!("norm {norm:e}, h {h:?}")) })
    })?;
    out.push(report("lebesgue-norm-bounds", 1e-8, t, None));

    let t = par_trials(seed, &tag("multiphase-norm-bounds"), n, |rng, _| {
        let grid = random_grid(rng);
        let p = random_field(rng, 1.2, 3.0);
        let q = shifted(&p, rng.random_range(0.05..=1.0));
        let r = shifted(&q, rng.random_range(0.05..=1.0));
        let s = shifted(&r, 0.5);
        let fields = ExponentFields { p, q, r, s, alpha: ExprField::constant(1.05) };
        let exps = ExponentSet::new(fields, grid.domain());
        let weights = WeightSet { mu1: random_field(rng, 0.0, 2.0), mu2: random_field(rng, 0.0, 2.0) };
        let u = random_values(rng, grid.len());
        let phases = SampledPhases::sample(&exps, &weights, &grid);
        let ps = PowerSum::multiphase(&u, &phases, &grid)?;
        let norm = luxemburg_norm(&ps, DEFAULT_NORM_TOL)?;
        let (slack, consistent) = modular_norm_bounds_slack(ps.value(), norm, exps.p_range().min, exps.r_range().max);
        Ok(Trial { slack, ok: slack >= -1e-8 && consistent, note: Some(format!("norm {norm:e}")) })
    })?;
    out.push(report("multiphase-norm-bounds", 1e-8, t, None));

    let t = par_trials(seed, &tag("constant-exponent-closed-form"), n, |rng, _| {
        let grid = random_grid(rng);
        let p = rng.random_range(1.1..=6.0);
        let u = random_values(rng, grid.len());
        let ps = PowerSum::lebesgue(&u, &vec![p; grid.len()], &grid)?;
        let norm = luxemburg_norm(&ps, DEFAULT_NORM_TOL)?;
        let powers: Vec<f64> = u.iter().map(|v| v.abs().powf(p)).collect();
        let closed = grid.integrate(&powers).powf(1.0 / p);
        Ok(Trial::margin(-rel_err(norm, closed), 1e-10))
    })?;
    out.push(report("constant-exponent-closed-form", 1e-10, t, None));

    let t = par_trials(seed, &tag("power-composition"), n, |rng, _| {
        let grid = random_grid(rng);
        let h = rng.random_range(1.5..=3.0);
        let h2 = grid.sample(&random_field(rng, 1.1, 3.0));
        let u = random_values(rng, grid.len());
        let uh: Vec<f64> = u.iter().map(|v| v.abs().powf(h)).collect();
        let lhs = luxemburg_norm(&PowerSum::lebesgue(&uh, &h2, &grid)?, DEFAULT_NORM_TOL)?;
        let hh2: Vec<f64> = h2.iter().map(|e| h * e).collect();
        let rhs = luxemburg_norm(&PowerSum::lebesgue(&u, &hh2, &grid)?, DEFAULT_NORM_TOL)?.powf(h);
        Ok(Trial::margin(-rel_err(lhs, rhs), 1e-8))
    })?;
    out.push(report("power-composition", 1e-8, t, None));

    let t = par_trials(seed, &tag("homogeneity"), n, |rng, _| {
        let grid = random_grid(rng);
        let h = grid.sample(&random_field(rng, 1.1, 5.0));
        let u = random_values(rng, grid.len());
        let c = log_uniform(rng, 1e-2, 1e2) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
        let a = luxemburg_norm(&PowerSum::lebesgue(&cu, &h, &grid)?, DEFAULT_NORM_TOL)?;
        let b = c.abs() * luxemburg_norm(&PowerSum::lebesgue(&u, &h, &grid)?, DEFAULT_NORM_TOL)?;
        Ok(Trial::margin(-rel_err(a, b), 1e-10))
    })?;
    out.push(report("homogeneity", 1e-10, t, None));

    let t = par_trials(seed, &tag("triangle-inequality"), cases.unwrap_or(200), |rng, _| {
        let grid = random_grid(rng);
        let h = grid.sample(&random_field(rng, 1.1, 5.0));
        let u = random_values(rng, grid.len());
        let v = random_values(rng, grid.len());
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let nrm = |x: &[f64]| luxemburg_norm(&PowerSum::lebesgue(x, &h, &grid)?, DEFAULT_NORM_TOL);
        let (nu, nv, nw) = (nrm(&u)?, nrm(&v)?, nrm(&w)?);
        Ok(Trial::margin((nu + nv - nw) / (nu + nv).max(f64::MIN_POSITIVE), 1e-9))
    })?;
    out.push(report("triangle-inequality", 1e-9, t, None));

    Ok(out)
}

// --------------------------------------------------------------- operator

struct Prepared {
    problem: CatalogProblem,
    spec: ProblemSpec,
    space: FemSpace,
}

fn prepare(problems: Vec<CatalogProblem>) -> Result<Vec<Prepared>> {
    problems
        .into_iter()
        .map(|problem| {
            let spec = problem.spec();
            let space = problem.space()?;
            Ok(Prepared { problem, spec, space })
        })
        .collect()
}

fn discretizations(prep: &[Prepared]) -> Vec<Discretization<'_>> {
    prep.iter()
        .map(|p| Discretization::new(&p.space, p.spec.exponents(), p.spec.weights(), *p.spec.kirchhoff()))
        .collect()
}

fn random_coeffs(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.random_range(-1.0..=1.0)).collect()
}

fn random_coeffs_scaled(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let scale = log_uniform(rng, lo, hi);
    random_coeffs(rng, n, scale)
}

fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let n = norm2(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn random_vector(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    let m = log_uniform(rng, lo, hi);
    random_unit_vector(rng, dim).into_iter().map(|x| m * x).collect()
}

/// Flux-gap samples: 10⁵ draws over `N ∈ {1,2,3}`, `p ∈ [1,6]`.
const FLUX_GAP_SAMPLES: usize = 100_000;
const FLUX_MONOTONE_SAMPLES: usize = 10_000;
const POWER_DIFF_SAMPLES: usize = 20_000;

fn operator_suite(seed: u64, cases: Option<usize>) -> Result<Vec<PropertyReport>> {
    let n = cases.unwrap_or(200);
    let tag = |p: &str| format!("operator/{p}");
    let prep = prepare(catalog())?;
    let discs = discretizations(&prep);
    let mut out = Vec::new();

    let t = par_trials(seed, &tag("pairing-identity"), n, |rng, i| {
        let d = &discs[i % discs.len()];
        let u = random_coeffs_scaled(rng, d.space().n_dofs(), 0.1, 10.0);
        let pairing = d.pairing(&u, &u)?;
        let modular = d.gradient_modular(&u)?;
        Ok(Trial::margin(-rel_err(pairing, modular), 1e-12))
    })?;
    out.push(report("pairing-identity", 1e-12, t, None));

    let t = par_trials(seed, &tag("energy-sandwich"), n, |rng, i| {
        let k = i % discs.len();
        let d = &discs[k];
        let e = prep[k].spec.exponents();
        let u = random_coeffs_scaled(rng, d.space().n_dofs(), 0.1, 10.0);
        let rho = d.gradient_modular(&u)?;
        let energy = d.energy(&u)?.rho;
        let slack = (energy - rho / e.r_range().max).min(rho / e.p_range().min - energy) / rho;
        Ok(Trial::margin(slack, 1e-12))
    })?;
    out.push(report("energy-sandwich", 1e-12, t, None));

    let t = par_trials(seed, &tag("norm-energy-bounds"), n, |rng, i| {
        let k = i % discs.len();
        let d = &discs[k];
        let e = prep[k].spec.exponents();
        let (pm, rp) = (e.p_range().min, e.r_range().max);
        let u = random_coeffs_scaled(rng, d.space().n_dofs(), 1e-3, 10.0);
        let norm = d.norm(&u, DEFAULT_NORM_TOL)?;
        let energy = d.energy(&u)?.rho;
        let (lo, hi) = if norm > 1.0 {
            (norm.powf(pm) / rp, norm.powf(rp) / pm)
        } else {
            (norm.powf(rp) / rp, norm.powf(pm) / pm)
        };
        let slack = (energy - lo).min(hi - energy) / energy;
        Ok(Trial::margin(slack, 1e-9).with_note(format!("norm {norm:e}")))
    })?;
    out.push(report("norm-energy-bounds", 1e-9, t, None));

    let t = par_trials(seed, &tag("flux-monotone"), FLUX_MONOTONE_SAMPLES, |rng, i| {
        let d = &discs[i % discs.len()];
        let ph = d.phases().get(rng.random_range(0..d.phases().len()));
        let dim = d.space().dim();
        let xi = random_vector(rng, dim, 1e-3, 1e2);
        let eta = random_vector(rng, dim, 1e-3, 1e2);
        let df = sub(&flux_at(ph, &xi), &flux_at(ph, &eta));
        let dx = sub(&xi, &eta);
        let scale = norm2(&df) * norm2(&dx);
        let slack = if scale == 0.0 { 0.0 } else { dot(&df, &dx) / scale };
        Ok(Trial::margin(slack, 1e-12))
    })?;
    out.push(report("flux-monotone", 1e-12, t, None));

    out.extend(flux_gap_properties(seed)?);

    let mut trials = Vec::new();
    let mut consts = Vec::new();
    for m in [2.0, 3.0, 4.0] {
        let mut worst = 0.0f64;
        for dim in 1..=3 {
            let mut rng = named_rng(seed, &tag(&format!("power-diff/{m}/{dim}")));
            worst = worst.max(crate::operator::sampled_power_diff_constant(m, dim, POWER_DIFF_SAMPLES, &mut rng));
        }
        // the sampled constant must make the bound hold at the extremal pair a = (1, 0), b = 0
        let check = power_diff_bound(&[1.0, 0.0], &[0.0, 0.0], m, worst.max(1.0));
        consts.push(format!("c_{m} = {worst:.6}"));
        trials.push(Trial { slack: 1.0 - worst, ok: worst <= 1.0 + 1e-12 && check.holds, note: None });
    }
    out.push(report("power-diff-constant", 1e-12, trials, Some(consts.join(", "))));

    let t = par_trials(seed, &tag("kirchhoff-antiderivative"), n, |rng, _| {
        let model = KirchhoffModel::new(
            rng.random_range(0.1..=5.0),
            rng.random_range(0.0..=3.0),
            rng.random_range(1.5..=4.0),
        )?;
        let t = log_uniform(rng, 1e-3, 100.0);
        let quad = simpson(|v| model.value(t * v * v) * 2.0 * t * v, 20_000);
        Ok(Trial::margin(-rel_err(model.antiderivative(t), quad), 1e-10))
    })?;
    out.push(report("kirchhoff-antiderivative", 1e-10, t, None));

    Ok(out)
}

/// Composite Simpson rule on `[0, 1]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

struct GapSample {
    dim: usize,
    p: f64,
    a: f64,
    b: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn flux_gap_properties(seed: u64) -> Result<Vec<PropertyReport>> {
    let samples: Vec<(GapSample, crate::operator::FluxGapBound)> = (0..FLUX_GAP_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let mut rng = named_rng(seed, &format!("operator/flux-gap/{i}"));
            let dim = rng.random_range(1..=3);
            let p = rng.random_range(1.0..=6.0);
            let a = log_uniform(&mut rng, 1e-2, 1e2);
            let b = if rng.random::<f64>() < 0.1 { a } else { log_uniform(&mut rng, 1e-2, 1e2) };
            let x = random_vector(&mut rng, dim, 1e-3, 1e2);
            let y = if rng.random::<f64>() < 0.1 { x.clone() } else { random_vector(&mut rng, dim, 1e-3, 1e2) };
            let bound = scaled_flux_gap_bound(a, b, &x, &y, p);
            (GapSample { dim, p, a, b, x, y }, bound)
        })
        .collect();

    let corrected: Vec<Trial> = samples
        .iter()
        .map(|(_, b)| Trial { slack: (b.rhs - b.lhs) / (1.0 + b.rhs), ok: b.holds, note: None })
        .collect();
    let in_ball: Vec<Trial> = samples
        .iter()
        .filter(|(_, b)| b.in_unit_ball)
        .map(|(_, b)| Trial { slack: (b.unit_ball_rhs - b.lhs) / (1.0 + b.unit_ball_rhs), ok: b.unit_ball_holds, note: None })
        .collect();

    // the literal statement, outside the unit ball
    let sampled = samples.iter().find(|(s, b)| !b.unit_ball_holds && norm2(&s.x) > 1.0);
    let fixed = scaled_flux_gap_bound(2.0, 1.0, &[2.0, 0.0], &[2.0, 0.0], 2.0);
    let found = sampled.is_some() && !fixed.unit_ball_holds;
    let note = match sampled {
        Some((s, b)) => format!(
            "literal form fails at N={}, p={:.4}, a={:.4e}, b={:.4e}, x={:?}, y={:?}: lhs {:.4e} > rhs {:.4e}; \
             also at x=y=(2,0), p=2, a=2, b=1: lhs {} > rhs {}",
            s.dim, s.p, s.a, s.b, s.x, s.y, b.lhs, b.unit_ball_rhs, fixed.lhs, fixed.unit_ball_rhs
        ),
        None => "no counterexample to the literal form found".into(),
    };
    let counter = vec![Trial { slack: 0.0, ok: found, note: None }];

    Ok(vec![
        report("flux-gap-corrected", 1e-9, corrected, None),
        report("flux-gap-literal-unit-ball", 1e-9, in_ball, None),
        report("flux-gap-literal-counterexample", 0.0, counter, Some(note)),
    ])
}

// --------------------------------------------------------------- monotone

const FD_PER_PROBLEM: usize = 20;
const FD_TOL: f64 = 1e-6;

fn monotone_suite(seed: u64, cases: Option<usize>) -> Result<Vec<PropertyReport>> {
    let tag = |p: &str| format!("monotone/{p}");
    let prep = prepare(catalog())?;
    let discs = discretizations(&prep);
    let mut out = Vec::new();

    let per = cases.unwrap_or(FD_PER_PROBLEM);
    let t = par_trials(seed, &tag("gradient-fd"), per * discs.len(), |rng, i| {
        let k = i % discs.len();
        let d = &discs[k];
        let u = random_coeffs_scaled(rng, d.space().n_dofs(), 0.3, 3.0);
        let g = d.gradient(&u)?;
        let mut fd = vec![0.0; u.len()];
        let mut w = u.clone();
        for j in 0..u.len() {
            let h = 1e-6 * (1.0 + u[j].abs());
            w[j] = u[j] + h;
            let jp = d.energy(&w)?.kirchhoff_energy;
            w[j] = u[j] - h;
            let jm = d.energy(&w)?.kirchhoff_energy;
            w[j] = u[j];
            fd[j] = (jp - jm) / (2.0 * h);
        }
        let err = norm2(&sub(&g, &fd)) / norm2(&g);
        Ok(Trial::margin(-err, FD_TOL).with_note(format!("on {}", prep[k].problem.id)))
    })?;
    out.push(report("gradient-fd", FD_TOL, t, Some(format!("{per} points on each of {} catalog problems", discs.len()))));

    let n_pairs = cases.unwrap_or(200);
    let strict = std::sync::atomic::AtomicUsize::new(0);
    let t = par_trials(seed, &tag("strict-monotonicity"), n_pairs, |rng, i| {
        let k = i % discs.len();
        let d = &discs[k];
        let n = d.space().n_dofs();
        let u = random_coeffs_scaled(rng, n, 0.1, 10.0);
        let v = random_coeffs_scaled(rng, n, 0.1, 10.0);
        let dg = sub(&d.gradient(&u)?, &d.gradient(&v)?);
        let du = sub(&u, &v);
        let inner = dot(&dg, &du);
        if inner > 0.0 {
            strict.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
        let scale = norm2(&dg) * norm2(&du);
        Ok(Trial::margin(inner / scale, 1e-12).with_note(format!("on {}", prep[k].problem.id)))
    })?;
    let kirchhoff = prep.iter().filter(|p| p.problem.kirchhoff_active()).count();
    let note = format!(
        "{} of {n_pairs} strictly positive across {} problems ({kirchhoff} with active Kirchhoff term)",
        strict.into_inner(),
        discs.len()
    );
    out.push(report("strict-monotonicity", 1e-12, t, Some(note)));

    let t = par_trials(seed, &tag("coercivity"), cases.unwrap_or(100), |rng, i| {
        let k = i % discs.len();
        let d = &discs[k];
        let e = prep[k].spec.exponents();
        let mut u = random_coeffs(rng, d.space().n_dofs(), 1.0);
        let target = log_uniform(rng, 1.01, 10.0);
        let scale = target / d.norm(&u, DEFAULT_NORM_TOL)?;
        u.iter_mut().for_each(|x| *x *= scale);
        let norm = d.norm(&u, DEFAULT_NORM_TOL)?;
        let lhs = dot(&d.gradient(&u)?, &u);
        let rhs = d.model().m0 / e.r_range().max * norm.powf(e.p_range().min);
        let ok = norm > 1.0 && lhs >= rhs - 1e-9;
        Ok(Trial { slack: (lhs - rhs) / rhs.max(1.0), ok, note: Some(format!("norm {norm:e}")) })
    })?;
    out.push(report("coercivity", 1e-9, t, None));

    let hemi = prep.iter().position(|p| p.problem.id == "kirchhoff-multiphase-1d").expect("catalog entry");
    let d = &discs[hemi];
    let t = par_trials(seed, &tag("hemicontinuity"), cases.unwrap_or(10).min(50), |rng, _| {
        let n = d.space().n_dofs();
        let u = random_coeffs(rng, n, 1.0);
        let w = random_coeffs(rng, n, 1.0);
        let v = random_coeffs(rng, n, 1.0);
        let jump = |m: usize| -> Result<f64> {
            let phi = (0..m)
                .map(|k| {
                    let th = k as f64 / (m - 1) as f64;
                    let x: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + th * b).collect();
                    Ok(dot(&d.gradient(&x)?, &v))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(phi.windows(2).map(|p| (p[1] - p[0]).abs()).fold(0.0, f64::max))
        };
        let (j32, j64) = (jump(32)?, jump(64)?);
        let ratio = j64 / j32;
        Ok(Trial::margin(0.8 - ratio, 0.0).with_note(format!("jump ratio {ratio:.4}")))
    })?;
    out.push(report("hemicontinuity", 0.0, t, Some("on kirchhoff-multiphase-1d".into())));

    Ok(out)
}

// ----------------------------------------------------------------- solver

fn solver_suite(seed: u64, cases: Option<usize>) -> Result<Vec<PropertyReport>> {
    let config = SolveConfig { seed, ..SolveConfig::default() };
    let mut out = Vec::new();

    let mut trials = Vec::new();
    for p in crate::catalog::dual_source_problems() {
        let (_, rep) = solve_problem1(&p.spec(), &p.space()?, &config)?;
        let slack = rep
            .energies
            .windows(2)
            .map(|w| (w[0] - w[1]) / (1.0 + w[0].abs()))
            .fold(f64::INFINITY, f64::min);
        let slack = if slack.is_finite() { slack } else { 0.0 };
        trials.push(Trial {
            slack,
            ok: rep.converged && slack >= -1e-12,
            note: Some(format!("on {}: {} steps", p.id, rep.iterations)),
        });
    }
    out.push(report("energy-descent", 1e-12, trials, None));

    let linear = catalog_problem("linear-1d")?;
    let space = linear.space()?;
    let (u1, rep) = solve_problem1(&linear.spec(), &space, &config)?;
    let res = rep.final_residual();
    out.push(report(
        "linear-residual",
        0.0,
        vec![Trial { slack: 1e-10 - res, ok: rep.converged && res <= 1e-10, note: None }],
        Some(format!("residual {res:e}")),
    ));

    let Rhs::Source { field } = linear.spec().rhs().clone() else { unreachable!("linear-1d has a dual source") };
    let doubled = linear.spec().with_rhs(Rhs::Source { field: scale_field(&field, 2.0) });
    let (u2, _) = solve_problem1(&doubled, &space, &config)?;
    let diff: Vec<f64> = u1.iter().zip(u2.iter()).map(|(a, b)| 2.0 * a - b).collect();
    let rel = norm2(&diff) / norm2(&u2);
    out.push(report("linear-scaling", 1e-9, vec![Trial::margin(-rel, 1e-9)], None));

    let starts = cases.unwrap_or(5).max(2);
    let mut trials = Vec::new();
    for id in ["kirchhoff-multiphase-1d", "kirchhoff-multiphase-2d"] {
        let p = catalog_problem(id)?;
        let rep = uniqueness_probe(&p.spec(), &p.space()?, &config, starts)?;
        trials.push(Trial {
            slack: (rep.threshold - rep.max_distance) / rep.threshold,
            ok: rep.passed,
            note: Some(format!("on {id}: max distance {:e}", rep.max_distance)),
        });
    }
    out.push(report("uniqueness-probe", 0.0, trials, Some(format!("{starts} starts per problem"))));

    let mut trials = Vec::new();
    for id in ["log-gradient", "gradient-free"] {
        let p = catalog_problem(id)?;
        let spec = p.spec();
        let space = p.space()?;
        let (u, rep) = solve_problem2(&spec, &space, &config)?;
        let rel = picard_certificate(&spec, &space, &u)?;
        trials.push(Trial {
            slack: 1e-8 - rel,
            ok: rep.converged && rel <= 1e-8 && rep.nontrivial == Some(true),
            note: Some(format!("on {id}: {} outer steps, relative residual {rel:e}, norm {:e}", rep.iterations, rep.norm)),
        });
    }
    out.push(report("picard-certificate", 0.0, trials, None));

    let mut trials = Vec::new();
    for (case, meshes) in [
        (ManufacturedCase::PoissonSin, &[64, 128][..]),
        (ManufacturedCase::KirchhoffSin, &[64, 128][..]),
        (ManufacturedCase::TorsionP3, &[16, 32, 64, 128][..]),
    ] {
        let t = convergence_study(case, meshes, &config)?;
        let slack = match case {
            ManufacturedCase::TorsionP3 => {
                t.rows.windows(2).map(|w| (w[0].err_max - w[1].err_max) / w[0].err_max).fold(f64::INFINITY, f64::min)
            }
            _ => t.rows.iter().filter_map(|r| r.order).fold(f64::INFINITY, f64::min) - 1.9,
        };
        trials.push(Trial { slack, ok: t.passed, note: Some(format!("on {case}")) });
    }
    out.push(report("manufactured-convergence", 0.0, trials, None));

    let mut trials = Vec::new();
    for id in ["kirchhoff-multiphase-1d", "log-gradient"] {
        let p = catalog_problem(id)?;
        let spec = p.spec();
        let space = p.space()?;
        let run = || match spec.rhs() {
            Rhs::Source { .. } => solve_problem1(&spec, &space, &config),
            Rhs::Nonlinearity(_) => solve_problem2(&spec, &space, &config),
        };
        let (ua, ra) = run()?;
        let (ub, rb) = run()?;
        let same = ra.to_json() == rb.to_json() && ua.iter().zip(ub.iter()).all(|(a, b)| a.to_bits() == b.to_bits());
        trials.push(Trial { slack: 0.0, ok: same, note: Some(format!("on {id}")) });
    }
    out.push(report("determinism", 0.0, trials, None));

    let free = catalog_problem("gradient-free")?;
    let logg = catalog_problem("log-gradient")?;
    let mut trials = Vec::new();
    let mut notes = Vec::new();
    for (p, want_pass) in [(&free, true), (&logg, false)] {
        let spec = p.spec();
        let Rhs::Nonlinearity(nl) = spec.rhs() else { unreachable!("nonlinear catalog entry") };
        let rep = growth_validator(nl, spec.exponents(), spec.domain(), 5000, seed)?;
        let f3 = rep.clause("f3").expect("f3 clause");
        let verdicts: Vec<String> =
            rep.clauses.iter().map(|c| format!("{} {}", c.clause, if c.passed { "pass" } else { "fail" })).collect();
        notes.push(format!("{}: {}", p.id, verdicts.join(", ")));
        // the log-gradient term outgrows the f3 denominator
        let ok = if want_pass { rep.passed() } else { rep.clause("f1").is_some_and(|c| c.passed) && !f3.passed };
        trials.push(Trial { slack: 0.0, ok, note: None });
    }
    out.push(report("growth-conditions", 0.0, trials, Some(notes.join("; "))));

    Ok(out)
}

fn scale_field(f: &ExprField, c: f64) -> ExprField {
    match *f {
        ExprField::Constant { value } => ExprField::constant(c * value),
        ExprField::Affine { offset, slope_x, slope_y } => ExprField::affine(c * offset, c * slope_x, c * slope_y),
        ExprField::Sinusoidal { base, amp, freq, axis } => ExprField::sinusoidal(c * base, c * amp, freq, axis),
    }
}

/// `‖G(u) − F(u)‖₂ / (1 + ‖F(u)‖₂)`, recomputed from scratch.
pub fn picard_certificate(spec: &ProblemSpec, space: &FemSpace, u: &[f64]) -> Result<f64> {
    let Rhs::Nonlinearity(nl) = spec.rhs() else {
        return Err(MpsError::Config("certificate needs a nonlinearity right-hand side".into()));
    };
    let src = nl.bind(spec.exponents());
    let disc = Discretization::new(space, spec.exponents(), spec.weights(), *spec.kirchhoff());
    let load = space.assemble_load(&src, Some(u))?;
    let g = disc.gradient(u)?;
    Ok(norm2(&sub(&g, &load)) / (1.0 + norm2(&load)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in SUITES {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("bogus".parse::<Suite>(), Err(MpsError::Config(_))));
    }

    #[test]
    fn small_modular_run_passes_and_is_deterministic() {
        let a = run_suite(Suite::Modular, 3, Some(20)).unwrap();
        assert!(a.passed(), "{}", a.render());
        let b = run_suite(Suite::Modular, 3, Some(20)).unwrap();
        assert_eq!(a, b);
        assert!(a.render().lines().count() == a.properties.len() + 1);
    }

    #[test]
    fn zero_cases_rejected() {
        assert!(run_suite(Suite::Modular, 0, Some(0)).is_err());
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        assert!((simpson(|x| x * x * x, 4) - 0.25).abs() < 1e-15);
    }
}
