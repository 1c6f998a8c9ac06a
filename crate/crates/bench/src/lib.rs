//! Fixtures shared by the criterion benches.

use mps_core::catalog::catalog_problem;
use mps_core::fem::FemSpace;
use mps_core::ProblemSpec;

/// A catalog problem with its default mesh replaced by `n` cells per axis.
pub fn fixture(id: &str, n: usize) -> (ProblemSpec, FemSpace) {
    let p = catalog_problem(id).expect("known catalog id");
    let space = FemSpace::uniform(&p.config.domain, n).expect("valid mesh");
    (p.spec(), space)
}
