//! Problem data: domain, exponents, weights, the Kirchhoff coefficient, and
//! the right-hand side (a fixed dual source or a state-dependent
//! nonlinearity).

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::exponent_fields::{
    validate_hypotheses_on_grid, Domain, ExponentFields, ExponentSet, ExprField, Point, ValidationReport,
    WeightSet, DEFAULT_VALIDATION_GRID,
};
use crate::fem::Source;
use crate::operator::{euclid, KirchhoffModel};

/// Constants of the growth conditions checked by the growth validator.
///
/// Unset entries default to the natural dominating choice for the catalog
/// nonlinearity: `g = h = |ĝ|`, `a₁ = â₁`, `a₂ = â₂`, `β₁ = β₂ = 1`, `λ = 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ExprField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<ExprField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<ExprField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<ExprField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// The catalog nonlinearity
/// `f(x, t, η) = ĝ(x)·sin(t + 1) + â₁|t|^{s(x)−1}e^{−|t|} + â₂|η|^{p(x)−1}ln(1 + |η|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub g_hat: ExprField,
    pub a1_hat: f64,
    pub a2_hat: f64,
    /// Exponent of the reaction term; defaults to the problem's `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction_exponent: Option<ExprField>,
    #[serde(default)]
    pub growth: GrowthData,
}

impl NonlinearitySpec {
    pub fn new(g_hat: ExprField, a1_hat: f64, a2_hat: f64) -> Self {
        NonlinearitySpec { g_hat, a1_hat, a2_hat, reaction_exponent: None, growth: GrowthData::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a1_hat", self.a1_hat), ("a2_hat", self.a2_hat)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(MpsError::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Binds the spec to the exponents it reads (`s` and `p`).
    pub fn bind<'a>(&'a self, exps: &'a ExponentSet) -> Nonlinearity<'a> {
        Nonlinearity {
            spec: self,
            s: self.reaction_exponent.as_ref().unwrap_or(exps.s()),
            p: exps.p(),
        }
    }
}

/// A [`NonlinearitySpec`] bound to its exponent fields.
#[derive(Debug, Clone, Copy)]
pub struct Nonlinearity<'a> {
    pub spec: &'a NonlinearitySpec,
    pub s: &'a ExprField,
    pub p: &'a ExprField,
}

impl Nonlinearity<'_> {
    /// `f(x, t, η)` at normalized coordinates, with `|η|` given.
    pub fn value_normalized(&self, xh: [f64; 2], t: f64, eta_norm: f64) -> f64 {
        let sp = self.spec;
        let mut v = sp.g_hat.eval_normalized(xh) * (t + 1.0).sin();
        if sp.a1_hat != 0.0 {
            let s = self.s.eval_normalized(xh);
            let at = t.abs();
            v += sp.a1_hat * at.powf(s - 1.0) * (-at).exp();
        }
        if sp.a2_hat != 0.0 && eta_norm != 0.0 {
            let p = self.p.eval_normalized(xh);
            v += sp.a2_hat * eta_norm.powf(p - 1.0) * eta_norm.ln_1p();
        }
        v
    }
}

impl Source for Nonlinearity<'_> {
    fn eval(&self, domain: &Domain, x: Point, u: f64, grad: &[f64]) -> f64 {
        self.value_normalized(domain.normalize(x), u, euclid(grad))
    }

    fn is_state_dependent(&self) -> bool {
        true
    }
}

/// Right-hand side of the problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rhs {
    /// A fixed source `f(x)`.
    Source { field: ExprField },
    /// A state-dependent nonlinearity `f(x, u, ∇u)`.
    Nonlinearity(NonlinearitySpec),
}

/// Serializable problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: Domain,
    pub exponents: ExponentFields,
    pub weights: WeightSet,
    pub kirchhoff: KirchhoffModel,
    pub rhs: Rhs,
}

/// A validated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    domain: Domain,
    exponents: ExponentSet,
    weights: WeightSet,
    kirchhoff: KirchhoffModel,
    rhs: Rhs,
}

impl ProblemSpec {
    /// Validates the domain, the Kirchhoff model, the exponent/weight
    /// hypotheses on the default validation grid, and the right-hand side.
    pub fn new(config: ProblemConfig) -> Result<Self> {
        Self::with_validation_grid(config, DEFAULT_VALIDATION_GRID)
    }

    pub fn with_validation_grid(config: ProblemConfig, grid_n: usize) -> Result<Self> {
        let ProblemConfig { domain, exponents, weights, kirchhoff, rhs } = config;
        domain.validate()?;
        kirchhoff.validate()?;
        let exponents = ExponentSet::new(exponents, &domain);
        validate_hypotheses_on_grid(&exponents, &weights, &domain, grid_n).into_result()?;
        if let Rhs::Nonlinearity(nl) = &rhs {
            nl.validate()?;
            if let Some(s) = &nl.reaction_exponent {
                let (lo, _) = s.exact_extrema(&domain);
                if !(lo > 1.0) {
                    return Err(MpsError::Hypothesis(format!("reaction exponent must exceed 1, min is {lo}")));
                }
            }
        }
        Ok(ProblemSpec { domain, exponents, weights, kirchhoff, rhs })
    }

    pub fn validation_report(&self) -> ValidationReport {
        validate_hypotheses_on_grid(&self.exponents, &self.weights, &self.domain, DEFAULT_VALIDATION_GRID)
    }

    pub fn to_config(&self) -> ProblemConfig {
        ProblemConfig {
            domain: self.domain,
            exponents: self.exponents.fields().clone(),
            weights: self.weights.clone(),
            kirchhoff: self.kirchhoff,
            rhs: self.rhs.clone(),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn exponents(&self) -> &ExponentSet {
        &self.exponents
    }
    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }
    pub fn kirchhoff(&self) -> &KirchhoffModel {
        &self.kirchhoff
    }
    pub fn rhs(&self) -> &Rhs {
        &self.rhs
    }

    /// Same data with a different right-hand side.
    pub fn with_rhs(&self, rhs: Rhs) -> Self {
        ProblemSpec { rhs, ..self.clone() }
    }
}
