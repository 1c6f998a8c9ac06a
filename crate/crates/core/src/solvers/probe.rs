use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::fem::FemSpace;
use crate::numeric::{named_rng, norm2, sub};
use crate::problem::ProblemSpec;

use super::{solve_problem1_from, SolveConfig};

/// Relative distance allowed between solutions from different starts.
pub const UNIQUENESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub starts: usize,
    /// Every start converged; otherwise the probe is inconclusive.
    pub conclusive: bool,
    pub passed: bool,
    pub max_distance: f64,
    pub mean_norm: f64,
    pub threshold: f64,
    pub iterations: Vec<usize>,
}

/// Solves the dual-source problem from `starts` random initial iterates
/// (nodal values i.i.d. uniform in `[−1, 1]`) and compares the solutions.
///
/// Distances and norms are `ℓ2` over interior coefficients; the probe
/// passes iff every start converged and the largest pairwise distance is
/// at most `1e−6·(1 + mean norm)`.
pub fn uniqueness_probe(
    problem: &ProblemSpec,
    space: &FemSpace,
    config: &SolveConfig,
    starts: usize,
) -> Result<UniquenessReport> {
    if starts < 2 {
        return Err(MpsError::Config(format!("uniqueness probe needs at least 2 starts, got {starts}")));
    }
    let mut sols = Vec::with_capacity(starts);
    let mut iterations = Vec::with_capacity(starts);
    let mut conclusive = true;
    for k in 0..starts {
        let mut rng = named_rng(config.seed, &format!("uniqueness-start-{k}"));
        let u0: Vec<f64> = (0..space.n_dofs()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let (u, rep) = solve_problem1_from(problem, space, config, Some(&u0))?;
        conclusive &= rep.converged;
        iterations.push(rep.iterations);
        sols.push(u.into_vec());
    }
    let mut max_distance: f64 = 0.0;
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            max_distance = max_distance.max(norm2(&sub(&sols[i], &sols[j])));
        }
    }
    let mean_norm = sols.iter().map(|u| norm2(u)).sum::<f64>() / starts as f64;
    let threshold = UNIQUENESS_TOL * (1.0 + mean_norm);
    Ok(UniquenessReport {
        starts,
        conclusive,
        passed: conclusive && max_distance <= threshold,
        max_distance,
        mean_norm,
        threshold,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent_fields::{Domain, ExponentFields, ExprField, WeightSet};
    use crate::operator::KirchhoffModel;
    use crate::problem::{ProblemConfig, Rhs};

    fn linear() -> ProblemSpec {
        let c = ExprField::constant;
        ProblemSpec::new(ProblemConfig {
            domain: Domain::unit_interval(),
            exponents: ExponentFields { p: c(2.0), q: c(2.5), r: c(3.0), s: c(3.5), alpha: c(1.5) },
            weights: WeightSet::zero(),
            kirchhoff: KirchhoffModel::local(),
            rhs: Rhs::Source { field: c(1.0) },
        })
        .unwrap()
    }

    #[test]
    fn linear_probe_agrees_tightly() {
        let prob = linear();
        let space = FemSpace::uniform(prob.domain(), 32).unwrap();
        let rep = uniqueness_probe(&prob, &space, &SolveConfig::default(), 3).unwrap();
        assert!(rep.passed && rep.conclusive);
        assert!(rep.max_distance <= 1e-10, "{}", rep.max_distance);
    }

    #[test]
    fn single_start_rejected() {
        let prob = linear();
        let space = FemSpace::uniform(prob.domain(), 8).unwrap();
        assert!(matches!(uniqueness_probe(&prob, &space, &SolveConfig::default(), 1), Err(MpsError::Config(_))));
    }

    #[test]
    fn failed_start_is_inconclusive() {
        let prob = linear();
        let space = FemSpace::uniform(prob.domain(), 16).unwrap();
        let cfg = SolveConfig { max_inner: 1, preconditioner: super::super::Preconditioner::Identity, ..Default::default() };
        let rep = uniqueness_probe(&prob, &space, &cfg, 2).unwrap();
        assert!(!rep.conclusive);
        assert!(!rep.passed);
    }
}
