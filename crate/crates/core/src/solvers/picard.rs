use std::time::Instant;

use crate::error::{MpsError, Result};
use crate::fem::{Discretization, FemSpace, NodalField, Source};
use crate::musielak::DEFAULT_NORM_TOL;
use crate::numeric::{dot, norm2, sub};
use crate::problem::{ProblemSpec, Rhs};

use super::{solve_dual, SolveConfig, SolveReport};

/// Consecutive residual increases that count as oscillation.
const OSCILLATION_RUN: usize = 5;
const MAX_DAMPING_HALVINGS: usize = 3;
/// Solutions with a discrete norm above this are reported nontrivial.
pub const NONTRIVIAL_THRESHOLD: f64 = 1e-8;

struct Coupled {
    load: Vec<f64>,
    residual: f64,
    energy: f64,
}

fn coupled(disc: &Discretization, source: &dyn Source, u: &[f64]) -> Result<Coupled> {
    let load = disc.space().assemble_load(source, Some(u))?;
    let (ev, g) = disc.energy_and_gradient(u)?;
    let residual = norm2(&sub(&g, &load));
    let energy = ev.kirchhoff_energy - dot(&load, u);
    Ok(Coupled { load, residual, energy })
}

/// Damped Picard iteration `u ← (1−ω)u + ω·ũ` where `ũ` solves the
/// dual problem with the load frozen at `u`.
///
/// Converged when the step satisfies `‖Δu‖₂ ≤ tol·(1 + ‖u‖₂)` and the
/// coupled residual `‖G(u) − F(u)‖₂ ≤ 10·tol·(1 + ‖F(u)‖₂)`. The residual
/// history holds the coupled residual per outer iterate; the energy
/// history holds `M̂(ϱ_h(u)) − F(u)·u`.
pub fn solve_problem2(problem: &ProblemSpec, space: &FemSpace, config: &SolveConfig) -> Result<(NodalField, SolveReport)> {
    let Rhs::Nonlinearity(spec) = problem.rhs() else {
        return Err(MpsError::Config("this solver needs a nonlinearity right-hand side".into()));
    };
    config.validate()?;
    let clock = Instant::now();
    let source = spec.bind(problem.exponents());
    let disc = Discretization::new(space, problem.exponents(), problem.weights(), *problem.kirchhoff());

    let mut u = vec![0.0; space.n_dofs()];
    let mut state = coupled(&disc, &source, &u)?;
    let mut residuals = vec![state.residual];
    let mut energies = vec![state.energy];
    let mut omega = config.omega;
    let mut halvings = 0;
    let mut increases = 0;
    let mut converged = false;
    let mut message = None;

    for _ in 0..config.max_outer {
        let (target, inner) = solve_dual(&disc, &state.load, Some(&u), config)?;
        if !inner.converged {
            message = Some(format!(
                "inner solve failed at outer iteration {}: {}",
                residuals.len(),
                inner.message.unwrap_or_default()
            ));
            break;
        }
        let next: Vec<f64> = u.iter().zip(target.iter()).map(|(a, b)| (1.0 - omega) * a + omega * b).collect();
        let step = norm2(&sub(&next, &u));
        let u_norm = norm2(&u);
        let prev = state.residual;
        u = next;
        state = coupled(&disc, &source, &u)?;
        residuals.push(state.residual);
        energies.push(state.energy);

        if step <= config.tol * (1.0 + u_norm) && state.residual <= 10.0 * config.tol * (1.0 + norm2(&state.load)) {
            converged = true;
            break;
        }
        increases = if state.residual > prev { increases + 1 } else { 0 };
        if increases >= OSCILLATION_RUN {
            if halvings == MAX_DAMPING_HALVINGS {
                message = Some(format!(
                    "oscillation: coupled residual rose on {OSCILLATION_RUN} consecutive outer steps at omega = {omega}; \
                     retry with omega < {omega}"
                ));
                break;
            }
            omega *= 0.5;
            halvings += 1;
            increases = 0;
        }
    }
    let iterations = residuals.len() - 1;
    if !converged && message.is_none() {
        message = Some(format!(
            "outer budget exhausted; coupled residual plateau {:e}",
            residuals.last().copied().unwrap_or(f64::NAN)
        ));
    }
    let norm = disc.norm(&u, DEFAULT_NORM_TOL)?;
    let report = SolveReport {
        converged,
        iterations,
        residuals,
        energies,
        norm,
        seconds: config.record_time.then(|| clock.elapsed().as_secs_f64()),
        nontrivial: Some(norm > NONTRIVIAL_THRESHOLD),
        message,
    };
    Ok((NodalField::new(u)?, report))
}
