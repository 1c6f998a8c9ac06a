//! Galerkin discretization and monotone-operator solvers for the nonlocal
//! multi-phase Dirichlet problem
//!
//! ```text
//! −M(ϱ(u)) div(|∇u|^{p(x)−2}∇u + μ1(x)|∇u|^{q(x)−2}∇u + μ2(x)|∇u|^{r(x)−2}∇u) = f   in Ω,
//!  u = 0 on ∂Ω,
//! ```
//!
//! with `ϱ(u) = ∫ (|∇u|^p/p + μ1|∇u|^q/q + μ2|∇u|^r/r) dx`, together with
//! the modular/norm machinery of the underlying Musielak–Orlicz spaces and
//! property suites that check the structural inequalities numerically.

// `!(x > 0.0)` is how NaN gets rejected along with nonpositive values;
// index loops mirror the element formulas; the MSRV predates is_multiple_of.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::large_enum_variant,
    clippy::manual_is_multiple_of
)]

pub mod catalog;
pub mod config;
pub mod error;
pub mod exponent_fields;
pub mod fem;
pub mod linalg;
pub mod musielak;
pub mod numeric;
pub mod operator;
pub mod problem;
pub mod solvers;
pub mod verify;

pub use error::{MpsError, Result};
pub use exponent_fields::{Domain, ExponentFields, ExponentSet, ExprField, Point, WeightSet};
pub use fem::{build_mesh, Discretization, FemSpace, Mesh, NodalField, Source};
pub use musielak::{QuadratureGrid, SampledScalar};
pub use operator::{GradSample, KirchhoffModel};
pub use problem::{NonlinearitySpec, ProblemConfig, ProblemSpec, Rhs};
pub use solvers::{SolveConfig, SolveReport};
