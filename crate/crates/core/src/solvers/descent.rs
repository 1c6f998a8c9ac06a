use std::time::Instant;

use crate::error::{check_len, MpsError, Result};
use crate::fem::{Discretization, FemSpace, NodalField};
use crate::linalg::SpdFactor;
use crate::musielak::DEFAULT_NORM_TOL;
use crate::numeric::{dot, norm2, sub};
use crate::problem::{ProblemSpec, Rhs};

use super::{Preconditioner, SolveConfig, SolveReport};

const MAX_BACKTRACKS: usize = 60;
/// Energy differences below this many ulps of the energy scale are noise.
const ROUNDOFF_ULPS: f64 = 64.0;

/// Minimizes `J(U) = M̂(ϱ_h(U)) − F·U` for the problem's dual source,
/// starting from zero.
pub fn solve_problem1(problem: &ProblemSpec, space: &FemSpace, config: &SolveConfig) -> Result<(NodalField, SolveReport)> {
    solve_problem1_from(problem, space, config, None)
}

pub fn solve_problem1_from(
    problem: &ProblemSpec,
    space: &FemSpace,
    config: &SolveConfig,
    u0: Option<&[f64]>,
) -> Result<(NodalField, SolveReport)> {
    let Rhs::Source { field } = problem.rhs() else {
        return Err(MpsError::Config("this solver needs a dual source right-hand side".into()));
    };
    let disc = Discretization::new(space, problem.exponents(), problem.weights(), *problem.kirchhoff());
    let load = space.assemble_load(field, None)?;
    solve_dual(&disc, &load, u0, config)
}

struct Point {
    u: Vec<f64>,
    j: f64,
    /// `|M̂(ϱ)| + |F·U|`, the scale for round-off comparisons
    j_scale: f64,
    r: Vec<f64>,
    rn: f64,
}

fn evaluate(disc: &Discretization, load: &[f64], u: Vec<f64>) -> Result<Point> {
    let (ev, g) = disc.energy_and_gradient(&u)?;
    let fu = dot(load, &u);
    let j = ev.kirchhoff_energy - fu;
    if !j.is_finite() {
        return Err(MpsError::Numeric(format!("energy is not finite ({j})")));
    }
    let r = sub(&g, load);
    let rn = norm2(&r);
    Ok(Point { u, j, j_scale: ev.kirchhoff_energy.abs() + fu.abs(), r, rn })
}

enum Direction {
    Newton,
    Fixed(SpdFactor),
    Identity,
}

impl Direction {
    fn new(disc: &Discretization, kind: Preconditioner) -> Result<Self> {
        Ok(match kind {
            Preconditioner::Newton => Direction::Newton,
            Preconditioner::Stiffness => Direction::Fixed(disc.space().stiffness_matrix()?.factor()?),
            Preconditioner::Identity => Direction::Identity,
        })
    }

    /// Solves `P d = −r`; `None` when the preconditioner is unusable here.
    fn compute(&self, disc: &Discretization, at: &Point) -> Result<Option<Vec<f64>>> {
        let y = match self {
            Direction::Identity => return Ok(None),
            Direction::Fixed(k) => k.solve(&at.r),
            Direction::Newton => {
                let tangent = disc.tangent(&at.u)?;
                let Ok(factor) = tangent.matrix.factor() else {
                    return Ok(None);
                };
                let mut y = factor.solve(&at.r);
                if let Some((beta, g)) = &tangent.rank_one {
                    let z = factor.solve(g);
                    let coef = beta * dot(g, &y) / (1.0 + beta * dot(g, &z));
                    for (yi, zi) in y.iter_mut().zip(&z) {
                        *yi -= coef * zi;
                    }
                }
                y
            }
        };
        Ok(Some(y.into_iter().map(|v| -v).collect()))
    }
}

/// Armijo descent on `J(U) = M̂(ϱ_h(U)) − F·U` from `u0` (zero if `None`).
///
/// Converged when `‖G(U) − F‖₂ ≤ tol·(1 + ‖F‖₂)`. Energies never increase
/// beyond floating-point round-off between accepted steps; among
/// energy-decreasing trial steps one that also does not increase the
/// residual is preferred.
pub fn solve_dual(
    disc: &Discretization,
    load: &[f64],
    u0: Option<&[f64]>,
    config: &SolveConfig,
) -> Result<(NodalField, SolveReport)> {
    config.validate()?;
    let clock = Instant::now();
    let n = disc.space().n_dofs();
    check_len(n, load.len())?;
    let u0 = match u0 {
        Some(u) => {
            check_len(n, u.len())?;
            u.to_vec()
        }
        None => vec![0.0; n],
    };
    let target = config.tol * (1.0 + norm2(load));
    let dir = Direction::new(disc, config.preconditioner)?;

    let mut cur = evaluate(disc, load, u0)?;
    let mut residuals = vec![cur.rn];
    let mut energies = vec![cur.j];
    let mut converged = cur.rn <= target;
    let mut iterations = 0;
    let mut message = None;
    let mut t_init = 1.0;

    while !converged && iterations < config.max_inner {
        let (d, slope) = match dir.compute(disc, &cur)? {
            Some(d) if dot(&cur.r, &d) < 0.0 && d.iter().all(|v| v.is_finite()) => {
                let s = dot(&cur.r, &d);
                (d, s)
            }
            _ => (cur.r.iter().map(|v| -v).collect(), -cur.rn * cur.rn),
        };
        let eps_j = ROUNDOFF_ULPS * f64::EPSILON * (cur.j_scale + 1.0);

        let mut t = t_init;
        let mut accepted = None;
        let mut fallback = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = cur.u.iter().zip(&d).map(|(u, d)| u + t * d).collect();
            let next = match evaluate(disc, load, trial) {
                Ok(p) => p,
                Err(MpsError::Numeric(_)) => {
                    t *= config.backtrack;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let armijo = next.j <= cur.j + config.armijo * t * slope;
            let roundoff = (t * slope).abs() <= eps_j && next.j <= cur.j + eps_j;
            if armijo || roundoff {
                if next.rn <= cur.rn {
                    accepted = Some((t, next));
                    break;
                }
                if armijo && fallback.is_none() {
                    fallback = Some((t, next));
                }
            }
            t *= config.backtrack;
        }
        let Some((t, next)) = accepted.or(fallback) else {
            message = Some(format!("line search stalled at residual {:e}", cur.rn));
            break;
        };
        if matches!(config.preconditioner, Preconditioner::Identity) {
            t_init = (2.0 * t).min(1e6);
        }
        cur = next;
        iterations += 1;
        residuals.push(cur.rn);
        energies.push(cur.j);
        converged = cur.rn <= target;
    }
    if !converged && message.is_none() {
        message = Some(format!("iteration budget exhausted at residual {:e}", cur.rn));
    }

    let norm = disc.norm(&cur.u, DEFAULT_NORM_TOL)?;
    let report = SolveReport {
        converged,
        iterations,
        residuals,
        energies,
        norm,
        seconds: config.record_time.then(|| clock.elapsed().as_secs_f64()),
        nontrivial: None,
        message,
    };
    Ok((NodalField::new(cur.u)?, report))
}
