//! Named problems used by the property suites, benches, and examples.

use std::f64::consts::PI;

use crate::error::{MpsError, Result};
use crate::exponent_fields::{Domain, ExponentFields, ExprField, WeightSet};
use crate::fem::FemSpace;
use crate::operator::KirchhoffModel;
use crate::problem::{NonlinearitySpec, ProblemConfig, ProblemSpec, Rhs};

#[derive(Debug, Clone)]
pub struct CatalogProblem {
    pub id: &'static str,
    pub description: &'static str,
    pub config: ProblemConfig,
    /// Cells per axis of the default mesh.
    pub mesh_n: usize,
}

impl CatalogProblem {
    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec::new(self.config.clone()).expect("catalog problems satisfy the hypotheses")
    }

    pub fn space(&self) -> Result<FemSpace> {
        FemSpace::uniform(&self.config.domain, self.mesh_n)
    }

    pub fn kirchhoff_active(&self) -> bool {
        self.config.kirchhoff.c > 0.0
    }

    pub fn has_dual_source(&self) -> bool {
        matches!(self.config.rhs, Rhs::Source { .. })
    }
}

fn c(v: f64) -> ExprField {
    ExprField::constant(v)
}

fn sine(base: f64, amp: f64, freq: f64) -> ExprField {
    ExprField::Sinusoidal { base, amp, freq, axis: 0 }
}

fn constants(p: f64, q: f64, r: f64, s: f64, alpha: f64) -> ExponentFields {
    ExponentFields { p: c(p), q: c(q), r: c(r), s: c(s), alpha: c(alpha) }
}

/// All catalog problems; the first five have dual sources.
pub fn catalog() -> Vec<CatalogProblem> {
    let kirchhoff = |m0, cc, gamma| KirchhoffModel::new(m0, cc, gamma).expect("valid model");
    vec![
        CatalogProblem {
            id: "linear-1d",
            description: "p = 2, no extra phases, M = 1, f = pi^2 sin(pi x)",
            config: ProblemConfig {
                domain: Domain::unit_interval(),
                exponents: constants(2.0, 2.5, 3.0, 3.5, 1.5),
                weights: WeightSet::zero(),
                kirchhoff: KirchhoffModel::local(),
                rhs: Rhs::Source { field: sine(0.0, PI * PI, 0.5) },
            },
            mesh_n: 64,
        },
        CatalogProblem {
            id: "kirchhoff-multiphase-1d",
            description: "three phases with a varying weight, M(t) = 1 + 0.5 t",
            config: ProblemConfig {
                domain: Domain::unit_interval(),
                exponents: constants(2.2, 2.8, 3.4, 4.0, 1.5),
                weights: WeightSet { mu1: sine(0.5, 0.3, 1.0), mu2: ExprField::affine(0.1, 0.2, 0.0) },
                kirchhoff: kirchhoff(1.0, 0.5, 2.0),
                rhs: Rhs::Source { field: c(10.0) },
            },
            mesh_n: 64,
        },
        CatalogProblem {
            id: "kirchhoff-multiphase-2d",
            description: "unit square, two active phases, M(t) = 1 + t^0.5",
            config: ProblemConfig {
                domain: Domain::unit_square(),
                exponents: constants(2.2, 2.6, 3.0, 3.5, 1.5),
                weights: WeightSet::constants(0.4, 0.2),
                kirchhoff: kirchhoff(1.0, 1.0, 1.5),
                rhs: Rhs::Source { field: ExprField::affine(5.0, 5.0, 0.0) },
            },
            mesh_n: 16,
        },
        CatalogProblem {
            id: "singular-p-lt-2",
            description: "p = 1.6 below the quadratic regime, M(t) = 1 + 0.3 t",
            config: ProblemConfig {
                domain: Domain::unit_interval(),
                exponents: constants(1.6, 1.9, 2.3, 3.0, 1.3),
                weights: WeightSet::constants(0.5, 0.25),
                kirchhoff: kirchhoff(1.0, 0.3, 2.0),
                rhs: Rhs::Source { field: c(1.0) },
            },
            mesh_n: 64,
        },
        CatalogProblem {
            id: "variable-exponent-1d",
            description: "oscillating p and q, affine r, M(t) = 0.5 + t^1.5",
            config: ProblemConfig {
                domain: Domain::unit_interval(),
                exponents: ExponentFields {
                    p: sine(2.4, 0.3, 1.0),
                    q: sine(2.9, 0.3, 1.0),
                    r: ExprField::affine(3.4, 0.2, 0.0),
                    s: c(4.5),
                    alpha: c(1.5),
                },
                weights: WeightSet { mu1: ExprField::affine(0.5, 0.5, 0.0), mu2: c(0.3) },
                kirchhoff: kirchhoff(0.5, 1.0, 2.5),
                rhs: Rhs::Source { field: sine(3.0, 2.0, 1.0) },
            },
            mesh_n: 64,
        },
        CatalogProblem {
            id: "log-gradient",
            description: "f = sin(t+1) + 0.05|t|^(s-1)e^-|t| + 0.05|eta|^(p-1)ln(1+|eta|)",
            config: ProblemConfig {
                domain: Domain::unit_interval(),
                exponents: constants(2.0, 2.5, 3.0, 3.5, 1.5),
                weights: WeightSet::constants(0.5, 0.25),
                kirchhoff: kirchhoff(1.0, 0.5, 2.0),
                rhs: Rhs::Nonlinearity(NonlinearitySpec::new(c(1.0), 0.05, 0.05)),
            },
            mesh_n: 64,
        },
        CatalogProblem {
            id: "gradient-free",
            description: "f = sin(t+1) + 0.1|t|^1.5 e^-|t|, p = 2, mu1 = 0.5, q = 2.5",
            config: ProblemConfig {
                domain: Domain::unit_interval(),
                exponents: constants(2.0, 2.5, 3.0, 3.5, 1.5),
                weights: WeightSet::constants(0.5, 0.0),
                kirchhoff: KirchhoffModel::local(),
                rhs: Rhs::Nonlinearity(NonlinearitySpec {
                    reaction_exponent: Some(c(2.5)),
                    ..NonlinearitySpec::new(c(1.0), 0.1, 0.0)
                }),
            },
            mesh_n: 64,
        },
    ]
}

pub fn catalog_problem(id: &str) -> Result<CatalogProblem> {
    catalog().into_iter().find(|p| p.id == id).ok_or_else(|| {
        let ids: Vec<&str> = catalog().iter().map(|p| p.id).collect();
        MpsError::Config(format!("unknown catalog problem '{id}' (known: {})", ids.join(", ")))
    })
}

/// Catalog problems with a dual source.
pub fn dual_source_problems() -> Vec<CatalogProblem> {
    catalog().into_iter().filter(|p| p.has_dual_source()).collect()
}
