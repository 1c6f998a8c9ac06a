//! Domains, the closed catalog of coefficient fields, and validation of the
//! structural hypotheses on the exponents and weights.
//!
//! Every field is evaluated in normalized coordinates `x̂ = (x - x0)/(x1 - x0)`
//! (and likewise `ŷ`), so the same parameters describe the same shape on any
//! box. Points are always `[x, y]`; in 1D the second coordinate is ignored.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{MpsError, Result};

/// A point of the (at most two-dimensional) domain. `y` is ignored in 1D.
pub type Point = [f64; 2];

/// Default number of validation-grid points per axis.
pub const DEFAULT_VALIDATION_GRID: usize = 1024;

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Interval { x0: f64, x1: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Domain {
    pub fn interval(x0: f64, x1: f64) -> Result<Self> {
        let d = Domain::Interval { x0, x1 };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let d = Domain::Rectangle { x0, x1, y0, y1 };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_interval() -> Self {
        Domain::Interval { x0: 0.0, x1: 1.0 }
    }

    pub fn unit_square() -> Self {
        Domain::Rectangle { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && a < b;
        let valid = match *self {
            Domain::Interval { x0, x1 } => ok(x0, x1),
            Domain::Rectangle { x0, x1, y0, y1 } => ok(x0, x1) && ok(y0, y1),
        };
        if valid {
            Ok(())
        } else {
            Err(MpsError::Domain(format!(
                "degenerate or non-finite bounds: {self:?}"
            )))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { x0, x1 } => x1 - x0,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
        }
    }

    /// `(lower, upper)` bounds per axis; the y-range of an interval is `[0, 0]`.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Domain::Interval { x0, x1 } => ([x0, 0.0], [x1, 0.0]),
            Domain::Rectangle { x0, x1, y0, y1 } => ([x0, y0], [x1, y1]),
        }
    }

    pub fn contains(&self, point: Point) -> bool {
        let (lo, hi) = self.bounds();
        (0..self.dim()).all(|k| {
            let tol = BOUNDARY_TOL * (1.0 + hi[k].abs().max(lo[k].abs()));
            point[k] >= lo[k] - tol && point[k] <= hi[k] + tol
        })
    }

    /// Map a physical point to normalized coordinates in `[0, 1]^N`.
    pub fn normalize(&self, point: Point) -> [f64; 2] {
        let (lo, hi) = self.bounds();
        let mut out = [0.0; 2];
        for k in 0..self.dim() {
            out[k] = (point[k] - lo[k]) / (hi[k] - lo[k]);
        }
        out
    }

    pub fn from_normalized(&self, xh: [f64; 2]) -> Point {
        let (lo, hi) = self.bounds();
        let mut out = [0.0; 2];
        for k in 0..self.dim() {
            out[k] = lo[k] + xh[k] * (hi[k] - lo[k]);
        }
        out
    }

    /// Uniform grid with `n` points per axis, endpoints included.
    pub fn grid_points(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        let t = |i: usize| i as f64 / (n - 1) as f64;
        match self.dim() {
            1 => (0..n).map(|i| self.from_normalized([t(i), 0.0])).collect(),
            _ => (0..n)
                .flat_map(|j| (0..n).map(move |i| (i, j)))
                .map(|(i, j)| self.from_normalized([t(i), t(j)]))
                .collect(),
        }
    }
}

/// A coefficient field from the closed catalog.
///
/// Serialized as `{"form": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExprField {
    Constant {
        value: f64,
    },
    /// `offset + slope_x·x̂ + slope_y·ŷ`
    Affine {
        offset: f64,
        #[serde(default)]
        slope_x: f64,
        #[serde(default)]
        slope_y: f64,
    },
    /// `base + amp·sin(2π·freq·ẑ)` where `ẑ` is the normalized coordinate
    /// along `axis` (0 = x, 1 = y).
    Sinusoidal {
        base: f64,
        amp: f64,
        freq: f64,
        #[serde(default)]
        axis: usize,
    },
}

impl ExprField {
    pub fn constant(value: f64) -> Self {
        ExprField::Constant { value }
    }

    pub fn affine(offset: f64, slope_x: f64, slope_y: f64) -> Self {
        ExprField::Affine { offset, slope_x, slope_y }
    }

    pub fn sinusoidal(base: f64, amp: f64, freq: f64, axis: usize) -> Self {
        ExprField::Sinusoidal { base, amp, freq, axis }
    }

    pub fn is_exact_form(&self) -> bool {
        !matches!(self, ExprField::Sinusoidal { .. })
    }

    /// Evaluate at normalized coordinates. No containment check.
    #[inline]
    pub fn eval_normalized(&self, xh: [f64; 2]) -> f64 {
        match *self {
            ExprField::Constant { value } => value,
            ExprField::Affine { offset, slope_x, slope_y } => offset + slope_x * xh[0] + slope_y * xh[1],
            ExprField::Sinusoidal { base, amp, freq, axis } => {
                base + amp * (2.0 * PI * freq * xh[axis.min(1)]).sin()
            }
        }
    }

    /// Evaluate at a physical point of `domain`.
    pub fn eval(&self, domain: &Domain, point: Point) -> Result<f64> {
        if !domain.contains(point) {
            return Err(MpsError::Domain(format!("point {point:?} outside {domain:?}")));
        }
        Ok(self.eval_normalized(domain.normalize(point)))
    }

    /// Exact `(min, max)` over the closed domain.
    pub fn exact_extrema(&self, domain: &Domain) -> (f64, f64) {
        match *self {
            ExprField::Constant { value } => (value, value),
            ExprField::Affine { offset, slope_x, slope_y } => {
                let sy = if domain.dim() == 2 { slope_y } else { 0.0 };
                let lo = offset + slope_x.min(0.0) + sy.min(0.0);
                let hi = offset + slope_x.max(0.0) + sy.max(0.0);
                (lo, hi)
            }
            ExprField::Sinusoidal { base, amp, freq, axis } => {
                if domain.dim() == 1 && axis >= 1 {
                    // ŷ ≡ 0 in 1D
                    return (base, base);
                }
                let (smin, smax) = sine_range(0.0, 2.0 * PI * freq);
                let a = base + amp * smin;
                let b = base + amp * smax;
                (a.min(b), a.max(b))
            }
        }
    }

    pub fn sup_norm(&self, domain: &Domain) -> f64 {
        let (lo, hi) = self.exact_extrema(domain);
        lo.abs().max(hi.abs())
    }
}

/// Range of `sin` over the closed interval between `a` and `b`.
fn sine_range(a: f64, b: f64) -> (f64, f64) {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let contains = |target: f64| {
        // is there an integer m with target + 2πm in [a, b]?
        let m = ((a - target) / (2.0 * PI)).ceil();
        target + 2.0 * PI * m <= b
    };
    let ends = [a.sin(), b.sin()];
    let mut lo = ends[0].min(ends[1]);
    let mut hi = ends[0].max(ends[1]);
    if contains(PI / 2.0) {
        hi = 1.0;
    }
    if contains(-PI / 2.0) {
        lo = -1.0;
    }
    (lo, hi)
}

/// Evaluate `field` at `point`.
pub fn eval_field(field: &ExprField, domain: &Domain, point: Point) -> Result<f64> {
    field.eval(domain, point)
}

/// `(min, max)` of `field` over a uniform grid of `grid_n` points per axis.
///
/// `grid_n` below 64 is raised to 64. Exact for constant and affine fields
/// since their extrema sit on grid corners.
pub fn field_extrema(field: &ExprField, domain: &Domain, grid_n: usize) -> (f64, f64) {
    let n = grid_n.max(64);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in domain.grid_points(n) {
        let v = field.eval_normalized(domain.normalize(x));
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Sobolev critical exponent `N·h/(N − h)`, or `+∞` when `h ≥ N`.
pub fn critical_exponent(h: f64, dim: usize) -> f64 {
    let n = dim as f64;
    if h < n {
        n * h / (n - h)
    } else {
        f64::INFINITY
    }
}

/// The raw exponent fields, as they appear in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentFields {
    pub p: ExprField,
    pub q: ExprField,
    pub r: ExprField,
    pub s: ExprField,
    pub alpha: ExprField,
}

/// Closed interval `[min, max]` of a field over the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(field: &ExprField, domain: &Domain) -> Self {
        let (min, max) = field.exact_extrema(domain);
        Range { min, max }
    }
}

/// The variable exponents `p, q, r, s, α` with their cached extrema.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSet {
    fields: ExponentFields,
    p: Range,
    q: Range,
    r: Range,
    s: Range,
    alpha: Range,
}

impl ExponentSet {
    pub fn new(fields: ExponentFields, domain: &Domain) -> Self {
        ExponentSet {
            p: Range::of(&fields.p, domain),
            q: Range::of(&fields.q, domain),
            r: Range::of(&fields.r, domain),
            s: Range::of(&fields.s, domain),
            alpha: Range::of(&fields.alpha, domain),
            fields,
        }
    }

    /// All five exponents constant.
    pub fn constants(p: f64, q: f64, r: f64, s: f64, alpha: f64, domain: &Domain) -> Self {
        let c = ExprField::constant;
        Self::new(
            ExponentFields { p: c(p), q: c(q), r: c(r), s: c(s), alpha: c(alpha) },
            domain,
        )
    }

    pub fn fields(&self) -> &ExponentFields {
        &self.fields
    }
    pub fn p(&self) -> &ExprField {
        &self.fields.p
    }
    pub fn q(&self) -> &ExprField {
        &self.fields.q
    }
    pub fn r(&self) -> &ExprField {
        &self.fields.r
    }
    pub fn s(&self) -> &ExprField {
        &self.fields.s
    }
    pub fn alpha(&self) -> &ExprField {
        &self.fields.alpha
    }

    pub fn p_range(&self) -> Range {
        self.p
    }
    pub fn q_range(&self) -> Range {
        self.q
    }
    pub fn r_range(&self) -> Range {
        self.r
    }
    pub fn s_range(&self) -> Range {
        self.s
    }
    pub fn alpha_range(&self) -> Range {
        self.alpha
    }

    /// p⁻
    pub fn p_minus(&self) -> f64 {
        self.p.min
    }
    /// r⁺
    pub fn r_plus(&self) -> f64 {
        self.r.max
    }
}

/// The nonnegative weights `μ1, μ2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSet {
    pub mu1: ExprField,
    pub mu2: ExprField,
}

impl WeightSet {
    pub fn new(mu1: ExprField, mu2: ExprField) -> Self {
        WeightSet { mu1, mu2 }
    }

    pub fn constants(mu1: f64, mu2: f64) -> Self {
        Self::new(ExprField::constant(mu1), ExprField::constant(mu2))
    }

    pub fn zero() -> Self {
        Self::constants(0.0, 0.0)
    }

    /// `(|μ1|_∞, |μ2|_∞)`
    pub fn sup_norms(&self, domain: &Domain) -> (f64, f64) {
        (self.mu1.sup_norm(domain), self.mu2.sup_norm(domain))
    }
}

/// Outcome of one hypothesis clause on the validation grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseReport {
    pub clause: &'static str,
    pub passed: bool,
    /// Smallest slack of the clause over the grid (negative on failure).
    pub worst_margin: f64,
    pub worst_point: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub clauses: Vec<ClauseReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClauseReport> {
        self.clauses.iter().filter(|c| !c.passed)
    }

    /// Converts the first failing clause into an error naming it.
    pub fn into_result(self) -> Result<()> {
        match self.failures().next() {
            None => Ok(()),
            Some(c) => Err(MpsError::Hypothesis(format!(
                "clause \"{}\" fails at {:?} (margin {:.3e})",
                c.clause, c.worst_point, c.worst_margin
            ))),
        }
    }
}

pub const CLAUSE_P_ABOVE_ONE: &str = "1 < p^-";
pub const CLAUSE_P_LT_Q: &str = "p(x) < q(x)";
pub const CLAUSE_Q_LT_R: &str = "q(x) < r(x)";
pub const CLAUSE_R_LT_S: &str = "r(x) < s(x)";
pub const CLAUSE_S_LT_PSTAR: &str = "s(x) < p*(x)";
pub const CLAUSE_ALPHA_ABOVE_ONE: &str = "1 < alpha^-";
pub const CLAUSE_ALPHA_LT_P: &str = "alpha^+ < p^-";
pub const CLAUSE_MU1: &str = "mu1(x) >= 0";
pub const CLAUSE_MU2: &str = "mu2(x) >= 0";

struct Tracker {
    clause: &'static str,
    strict: bool,
    worst: f64,
    at: Point,
}

impl Tracker {
    fn new(clause: &'static str, strict: bool) -> Self {
        Tracker { clause, strict, worst: f64::INFINITY, at: [0.0; 2] }
    }

    fn observe(&mut self, margin: f64, at: Point) {
        // NaN margins count as the worst possible
        let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if m < self.worst {
            self.worst = m;
            self.at = at;
        }
    }

    fn finish(self) -> ClauseReport {
        let passed = if self.strict { self.worst > 0.0 } else { self.worst >= 0.0 };
        ClauseReport { clause: self.clause, passed, worst_margin: self.worst, worst_point: self.at }
    }
}

/// Check the ordering chain on the exponents and nonnegativity of the
/// weights pointwise on a uniform grid with `grid_n` points per axis.
pub fn validate_hypotheses_on_grid(
    exps: &ExponentSet,
    weights: &WeightSet,
    domain: &Domain,
    grid_n: usize,
) -> ValidationReport {
    let dim = domain.dim();
    let mut p_one = Tracker::new(CLAUSE_P_ABOVE_ONE, true);
    let mut pq = Tracker::new(CLAUSE_P_LT_Q, true);
    let mut qr = Tracker::new(CLAUSE_Q_LT_R, true);
    let mut rs = Tracker::new(CLAUSE_R_LT_S, true);
    let mut s_crit = Tracker::new(CLAUSE_S_LT_PSTAR, true);
    let mut a_one = Tracker::new(CLAUSE_ALPHA_ABOVE_ONE, true);
    let mut mu1 = Tracker::new(CLAUSE_MU1, false);
    let mut mu2 = Tracker::new(CLAUSE_MU2, false);

    let mut p_min = (f64::INFINITY, [0.0; 2]);
    let mut a_max = (f64::NEG_INFINITY, [0.0; 2]);

    let f = exps.fields();
    for x in domain.grid_points(grid_n) {
        let xh = domain.normalize(x);
        let p = f.p.eval_normalized(xh);
        let q = f.q.eval_normalized(xh);
        let r = f.r.eval_normalized(xh);
        let s = f.s.eval_normalized(xh);
        let a = f.alpha.eval_normalized(xh);
        p_one.observe(p - 1.0, x);
        pq.observe(q - p, x);
        qr.observe(r - q, x);
        rs.observe(s - r, x);
        let pstar = critical_exponent(p, dim);
        s_crit.observe(if pstar.is_infinite() { f64::INFINITY } else { pstar - s }, x);
        a_one.observe(a - 1.0, x);
        mu1.observe(weights.mu1.eval_normalized(xh), x);
        mu2.observe(weights.mu2.eval_normalized(xh), x);
        if p < p_min.0 {
            p_min = (p, x);
        }
        if a > a_max.0 {
            a_max = (a, x);
        }
    }

    let mut a_p = Tracker::new(CLAUSE_ALPHA_LT_P, true);
    a_p.observe(p_min.0 - a_max.0, a_max.1);

    ValidationReport {
        clauses: vec![
            p_one.finish(),
            pq.finish(),
            qr.finish(),
            rs.finish(),
            s_crit.finish(),
            a_one.finish(),
            a_p.finish(),
            mu1.finish(),
            mu2.finish(),
        ],
    }
}

/// [`validate_hypotheses_on_grid`] with the default 1024-point grid.
pub fn validate_hypotheses(exps: &ExponentSet, weights: &WeightSet, domain: &Domain) -> ValidationReport {
    validate_hypotheses_on_grid(exps, weights, domain, DEFAULT_VALIDATION_GRID)
}
