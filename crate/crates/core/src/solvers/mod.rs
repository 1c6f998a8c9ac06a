//! Solvers for the dual-source problem (convex energy descent) and the
//! state-dependent problem (damped Picard iteration), plus uniqueness
//! probes, growth-condition checks, and manufactured-solution studies.

mod descent;
mod growth;
mod picard;
mod probe;
mod study;

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};

pub use descent::{solve_dual, solve_problem1, solve_problem1_from};
pub use growth::{growth_validator, GrowthClause, GrowthReport, MIN_GROWTH_SAMPLES};
pub use picard::solve_problem2;
pub use probe::{uniqueness_probe, UniquenessReport};
pub use study::{convergence_study, ConvergenceRow, ConvergenceTable, ManufacturedCase, MANUFACTURED_CASES};

/// Direction used by the descent solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    /// Linearized operator with the Kirchhoff rank-one term (modified Newton).
    #[default]
    Newton,
    /// Fixed `p ≡ 2` stiffness matrix.
    Stiffness,
    /// Raw negative residual.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub armijo: f64,
    pub backtrack: f64,
    /// Picard damping `ω ∈ (0, 1]`.
    pub omega: f64,
    pub seed: u64,
    pub preconditioner: Preconditioner,
    /// Fill `SolveReport::seconds`; off by default so reports are reproducible.
    pub record_time: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-10,
            max_outer: 200,
            max_inner: 5000,
            armijo: 1e-4,
            backtrack: 0.5,
            omega: 0.7,
            seed: 0,
            preconditioner: Preconditioner::Newton,
            record_time: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(MpsError::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(MpsError::Config(format!("omega must lie in (0, 1], got {}", self.omega)));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(MpsError::Config(format!("armijo must lie in (0, 1), got {}", self.armijo)));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(MpsError::Config(format!("backtrack must lie in (0, 1), got {}", self.backtrack)));
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err(MpsError::Config("iteration budgets must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a solve.
///
/// `residuals[k]` and `energies[k]` belong to iterate `k`; both histories
/// have `iterations + 1` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub energies: Vec<f64>,
    /// Luxemburg norm of the gradient of the returned solution.
    pub norm: f64,
    pub seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nontrivial: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().unwrap_or(&f64::NAN)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let c: SolveConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, SolveConfig::default());
        assert!(c.validate().is_ok());
        let bad = SolveConfig { omega: 1.5, ..c.clone() };
        assert!(matches!(bad.validate(), Err(MpsError::Config(_))));
        let bad = SolveConfig { tol: 0.0, ..c };
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<SolveConfig>(r#"{"tolerance": 1}"#).is_err());
    }

    #[test]
    fn report_json_keys() {
        let r = SolveReport {
            converged: true,
            iterations: 1,
            residuals: vec![1.0, 0.0],
            energies: vec![0.0, -1.0],
            norm: 2.0,
            seconds: None,
            nontrivial: None,
            message: None,
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["converged", "energies", "iterations", "norm", "residuals", "seconds"]);
        assert!(r.to_json().find("converged").unwrap() < r.to_json().find("seconds").unwrap());
    }
}
