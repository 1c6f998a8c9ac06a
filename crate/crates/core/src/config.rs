//! JSON run configuration consumed by the command-line front end.

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::fem::{FemSpace, NodalField};
use crate::problem::{ProblemConfig, ProblemSpec, Rhs};
use crate::solvers::{solve_problem1, solve_problem2, SolveConfig, SolveReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Cells per axis.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub solution: String,
    pub report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { solution: "solution.csv".into(), report: "report.json".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A parsed and validated run.
pub struct PreparedRun {
    pub config: RunConfig,
    pub problem: ProblemSpec,
    pub space: FemSpace,
}

impl RunConfig {
    /// Parses JSON; syntax and shape errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| MpsError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn prepare(self) -> Result<PreparedRun> {
        self.solver.validate()?;
        let problem = ProblemSpec::new(self.problem.clone())?;
        let space = FemSpace::uniform(problem.domain(), self.mesh.n)?;
        Ok(PreparedRun { config: self, problem, space })
    }
}

impl PreparedRun {
    /// Dispatches on the right-hand side: energy descent for a dual
    /// source, damped Picard iteration for a nonlinearity.
    pub fn solve(&self) -> Result<(NodalField, SolveReport)> {
        match self.problem.rhs() {
            Rhs::Source { .. } => solve_problem1(&self.problem, &self.space, &self.config.solver),
            Rhs::Nonlinearity(_) => solve_problem2(&self.problem, &self.space, &self.config.solver),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const POISSON: &str = r#"{
  "problem": {
    "domain": {"kind": "interval", "x0": 0.0, "x1": 1.0},
    "exponents": {
      "p": {"form": "constant", "params": {"value": 2.0}},
      "q": {"form": "constant", "params": {"value": 2.5}},
      "r": {"form": "constant", "params": {"value": 3.0}},
      "s": {"form": "constant", "params": {"value": 3.5}},
      "alpha": {"form": "constant", "params": {"value": 1.5}}
    },
    "weights": {
      "mu1": {"form": "constant", "params": {"value": 0.0}},
      "mu2": {"form": "constant", "params": {"value": 0.0}}
    },
    "kirchhoff": {"m0": 1.0},
    "rhs": {"kind": "source", "field": {"form": "sinusoidal", "params": {"base": 0.0, "amp": 9.869604401089358, "freq": 0.5}}}
  },
  "mesh": {"n": 32}
}"#;

    #[test]
    fn parses_and_solves() {
        let run = RunConfig::parse(POISSON).unwrap();
        assert_eq!(run.solver, SolveConfig::default());
        assert_eq!(run.output, OutputConfig::default());
        let prepared = run.prepare().unwrap();
        let (_, rep) = prepared.solve().unwrap();
        assert!(rep.converged);
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = POISSON.replace("\"mesh\": {\"n\": 32}", "\"mesh\": {\"n\": 32, \"cells\": 4}");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 18"), "{err}");
        assert!(err.contains("cells"), "{err}");
    }

    #[test]
    fn hypothesis_violation_names_clause() {
        let text = POISSON.replace("\"value\": 2.5}", "\"value\": 1.8}");
        let err = RunConfig::parse(&text).unwrap().prepare().err().unwrap();
        assert!(matches!(err, MpsError::Hypothesis(_)));
        assert!(err.to_string().contains("p(x) < q(x)"));
    }
}
