use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::exponent_fields::{Domain, ExponentSet, ExprField, Point, WeightSet};
use crate::fem::{Discretization, FemSpace, FnSource, Source};
use crate::operator::KirchhoffModel;

use super::{solve_dual, SolveConfig};

/// Built-in problems with closed-form solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManufacturedCase {
    /// `f ≡ 0`, `u ≡ 0`.
    ZeroSource,
    /// `p ≡ 2`, `M ≡ 1`, `u = sin(πx)`.
    PoissonSin,
    /// `p ≡ 3`, `f ≡ 1`, `u = (2/3)((1/2)^{3/2} − |x − 1/2|^{3/2})`.
    TorsionP3,
    /// `p ≡ 2`, `M(t) = 1 + t`, `u = sin(πx)`.
    KirchhoffSin,
    /// `p ≡ 2`, `M ≡ 1` on the unit square, `u = sin(πx)sin(πy)`.
    #[serde(rename = "poisson-sin-2d")]
    PoissonSin2d,
}

pub const MANUFACTURED_CASES: [ManufacturedCase; 5] = [
    ManufacturedCase::ZeroSource,
    ManufacturedCase::PoissonSin,
    ManufacturedCase::TorsionP3,
    ManufacturedCase::KirchhoffSin,
    ManufacturedCase::PoissonSin2d,
];

/// Smallest acceptable observed order for the smooth cases.
pub const MIN_ORDER: f64 = 1.9;
const ZERO_TOL: f64 = 1e-14;

impl ManufacturedCase {
    pub fn id(self) -> &'static str {
        match self {
            ManufacturedCase::ZeroSource => "zero-source",
            ManufacturedCase::PoissonSin => "poisson-sin",
            ManufacturedCase::TorsionP3 => "torsion-p3",
            ManufacturedCase::KirchhoffSin => "kirchhoff-sin",
            ManufacturedCase::PoissonSin2d => "poisson-sin-2d",
        }
    }

    fn p(self) -> f64 {
        if self == ManufacturedCase::TorsionP3 {
            3.0
        } else {
            2.0
        }
    }

    pub fn domain(self) -> Domain {
        if self == ManufacturedCase::PoissonSin2d {
            Domain::unit_square()
        } else {
            Domain::unit_interval()
        }
    }

    pub fn kirchhoff(self) -> KirchhoffModel {
        if self == ManufacturedCase::KirchhoffSin {
            KirchhoffModel { m0: 1.0, c: 1.0, gamma: 2.0 }
        } else {
            KirchhoffModel::local()
        }
    }

    pub fn exponents(self) -> ExponentSet {
        let p = self.p();
        ExponentSet::constants(p, p + 0.5, p + 1.0, p + 2.0, 1.2, &self.domain())
    }

    pub fn exact(self, x: Point) -> f64 {
        match self {
            ManufacturedCase::ZeroSource => 0.0,
            ManufacturedCase::PoissonSin | ManufacturedCase::KirchhoffSin => (PI * x[0]).sin(),
            ManufacturedCase::TorsionP3 => 2.0 / 3.0 * (0.5f64.powf(1.5) - (x[0] - 0.5).abs().powf(1.5)),
            ManufacturedCase::PoissonSin2d => (PI * x[0]).sin() * (PI * x[1]).sin(),
        }
    }

    fn source(self) -> Box<dyn Source> {
        let sine = |amp: f64| ExprField::Sinusoidal { base: 0.0, amp, freq: 0.5, axis: 0 };
        match self {
            ManufacturedCase::ZeroSource => Box::new(ExprField::constant(0.0)),
            ManufacturedCase::PoissonSin => Box::new(sine(PI * PI)),
            ManufacturedCase::TorsionP3 => Box::new(ExprField::constant(1.0)),
            // ϱ(sin πx) = π²/4
            ManufacturedCase::KirchhoffSin => Box::new(sine((1.0 + PI * PI / 4.0) * PI * PI)),
            ManufacturedCase::PoissonSin2d => Box::new(FnSource::spatial(|x: Point, _: f64, _: &[f64]| {
                2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()
            })),
        }
    }

    /// What the table must show for the case to pass.
    pub fn criterion(self) -> &'static str {
        match self {
            ManufacturedCase::ZeroSource => "all errors vanish",
            ManufacturedCase::TorsionP3 => "max-norm error strictly decreasing",
            _ => "every observed L2 order >= 1.9",
        }
    }
}

impl FromStr for ManufacturedCase {
    type Err = MpsError;

    fn from_str(s: &str) -> Result<Self> {
        MANUFACTURED_CASES.into_iter().find(|c| c.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = MANUFACTURED_CASES.iter().map(|c| c.id()).collect();
            MpsError::Config(format!("unknown manufactured case '{s}' (known: {})", ids.join(", ")))
        })
    }
}

impl fmt::Display for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub err_l2: f64,
    pub err_max: f64,
    /// `log(e_prev / e) / log(h_prev / h)`; absent on the first row or
    /// when an error vanishes.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub case: ManufacturedCase,
    pub rows: Vec<ConvergenceRow>,
    pub all_converged: bool,
    pub passed: bool,
}

impl ConvergenceTable {
    /// Columns `h,err_l2,err_max,order`; the order cell is empty when absent.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "h,err_l2,err_max,order")?;
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:e}")).unwrap_or_default();
            writeln!(w, "{:e},{:e},{:e},{}", r.h, r.err_l2, r.err_max, order)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Solves `case` on each mesh (`n` cells per axis) and tabulates the
/// errors against the closed-form solution. Needs at least two meshes.
pub fn convergence_study(case: ManufacturedCase, meshes: &[usize], config: &SolveConfig) -> Result<ConvergenceTable> {
    if meshes.len() < 2 {
        return Err(MpsError::Config(format!("a convergence study needs at least 2 meshes, got {}", meshes.len())));
    }
    let domain = case.domain();
    let exps = case.exponents();
    let weights = WeightSet::zero();
    let source = case.source();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(meshes.len());
    let mut all_converged = true;
    for &n in meshes {
        let space = FemSpace::uniform(&domain, n)?;
        let disc = Discretization::new(&space, &exps, &weights, case.kirchhoff());
        let load = space.assemble_load(source.as_ref(), None)?;
        let (u, rep) = solve_dual(&disc, &load, None, config)?;
        all_converged &= rep.converged;

        let grid = space.grid();
        let vals = space.values_at_quadrature(&u)?;
        let sq: Vec<f64> = vals.iter().zip(grid.points()).map(|(v, &x)| (v - case.exact(x)).powi(2)).collect();
        let err_l2 = grid.integrate(&sq).sqrt();
        let full = space.full_nodal(&u);
        let err_max = full
            .iter()
            .zip(space.mesh().nodes())
            .map(|(v, &x)| (v - case.exact(x)).abs())
            .fold(0.0, f64::max);
        let h = space.mesh().h();
        let order = rows.last().and_then(|prev| {
            (prev.err_l2 > 0.0 && err_l2 > 0.0).then(|| (prev.err_l2 / err_l2).ln() / (prev.h / h).ln())
        });
        rows.push(ConvergenceRow { n, h, err_l2, err_max, order });
    }
    let meets = match case {
        ManufacturedCase::ZeroSource => rows.iter().all(|r| r.err_l2 <= ZERO_TOL && r.err_max <= ZERO_TOL),
        ManufacturedCase::TorsionP3 => rows.windows(2).all(|w| w[1].err_max < w[0].err_max),
        _ => rows.iter().skip(1).all(|r| r.order.is_some_and(|o| o >= MIN_ORDER)),
    };
    Ok(ConvergenceTable { case, rows, all_converged, passed: all_converged && meets })
}
