//! Modulars and Luxemburg norms on a discrete quadrature measure.
//!
//! All quantities here live on a *discrete* Musielak–Orlicz space: integrals
//! are weighted sums over a [`QuadratureGrid`]. The modular/norm relations
//! checked by the property suites are identities of the modular functional,
//! so they hold for any positive measure, this one included.

use serde::Serialize;

use crate::error::{check_len, MpsError, Result};
use crate::exponent_fields::{Domain, ExponentSet, ExprField, Point, WeightSet};
use crate::numeric::pairwise_sum;

/// Default tolerance on `|ρ(u/ζ) − 1|` for Luxemburg bisection.
pub const DEFAULT_NORM_TOL: f64 = 1e-12;

const MAX_BRACKET_STEPS: usize = 200;
const MAX_BISECTION_STEPS: usize = 400;

/// Quadrature nodes and positive weights realizing `∫_Ω · dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    domain: Domain,
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(domain: Domain, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        check_len(points.len(), weights.len())?;
        if points.is_empty() {
            return Err(MpsError::Config("empty quadrature grid".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(MpsError::Numeric(format!("quadrature weight {w} is not positive")));
        }
        if let Some(x) = points.iter().find(|x| !domain.contains(**x)) {
            return Err(MpsError::Domain(format!("quadrature point {x:?} outside {domain:?}")));
        }
        Ok(QuadratureGrid { domain, points, weights })
    }

    /// Two-point Gauss rule on `n` uniform cells per axis (tensor rule in 2D).
    pub fn uniform_gauss(domain: Domain, n: usize) -> Self {
        let n = n.max(1);
        let g = 0.5 / 3f64.sqrt();
        let nodes = [0.5 - g, 0.5 + g];
        let mut pts1 = Vec::with_capacity(2 * n);
        for i in 0..n {
            for t in nodes {
                pts1.push((i as f64 + t) / n as f64);
            }
        }
        let cell = domain.measure() / (n.pow(domain.dim() as u32) as f64);
        let (points, weights): (Vec<Point>, Vec<f64>) = match domain.dim() {
            1 => pts1
                .iter()
                .map(|&t| (domain.from_normalized([t, 0.0]), cell / 2.0))
                .unzip(),
            _ => pts1
                .iter()
                .flat_map(|&ty| pts1.iter().map(move |&tx| [tx, ty]))
                .map(|xh| (domain.from_normalized(xh), cell / 4.0))
                .unzip(),
        };
        QuadratureGrid { domain, points, weights }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total mass; equals `|Ω|` for the rules built in this crate.
    pub fn measure(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Sample a field at every node.
    pub fn sample(&self, field: &ExprField) -> Vec<f64> {
        self.points
            .iter()
            .map(|x| field.eval_normalized(self.domain.normalize(*x)))
            .collect()
    }

    /// `Σ wᵢ vᵢ`
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = self.weights.iter().zip(values).map(|(w, v)| w * v).collect();
        pairwise_sum(&terms)
    }
}

/// A scalar sampled at the nodes of a quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledScalar(Vec<f64>);

impl SampledScalar {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MpsError::Numeric(format!("sample {i} is not finite: {}", values[i])));
        }
        Ok(SampledScalar(values))
    }

    pub fn constant(value: f64, len: usize) -> Self {
        SampledScalar(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        SampledScalar(self.0.iter().map(|v| c * v).collect())
    }
}

/// The three-phase integrand data at one point: exponents `p, q, r` and
/// weights `μ1, μ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointPhases {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl PointPhases {
    pub fn at(exps: &ExponentSet, weights: &WeightSet, domain: &Domain, x: Point) -> Self {
        let xh = domain.normalize(x);
        let f = exps.fields();
        PointPhases {
            p: f.p.eval_normalized(xh),
            q: f.q.eval_normalized(xh),
            r: f.r.eval_normalized(xh),
            mu1: weights.mu1.eval_normalized(xh),
            mu2: weights.mu2.eval_normalized(xh),
        }
    }

    /// `t^p + μ1 t^q + μ2 t^r` for `t ≥ 0`.
    #[inline]
    pub fn modular_density(&self, t: f64) -> f64 {
        t.powf(self.p) + self.mu1 * t.powf(self.q) + self.mu2 * t.powf(self.r)
    }

    /// `t^p/p + μ1 t^q/q + μ2 t^r/r` for `t ≥ 0`.
    #[inline]
    pub fn energy_density(&self, t: f64) -> f64 {
        t.powf(self.p) / self.p + self.mu1 * t.powf(self.q) / self.q + self.mu2 * t.powf(self.r) / self.r
    }

    /// Scalar flux factor `t^{p−2} + μ1 t^{q−2} + μ2 t^{r−2}`, zero at `t = 0`
    /// (the flux itself vanishes there).
    #[inline]
    pub fn flux_factor(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        t.powf(self.p - 2.0) + self.mu1 * t.powf(self.q - 2.0) + self.mu2 * t.powf(self.r - 2.0)
    }

    /// `t·(d/dt) flux_factor(t) = (p−2)t^{p−2} + μ1(q−2)t^{q−2} + μ2(r−2)t^{r−2}`.
    #[inline]
    pub fn flux_factor_log_slope(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        (self.p - 2.0) * t.powf(self.p - 2.0)
            + self.mu1 * (self.q - 2.0) * t.powf(self.q - 2.0)
            + self.mu2 * (self.r - 2.0) * t.powf(self.r - 2.0)
    }
}

/// Exponents and weights sampled at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPhases(Vec<PointPhases>);

impl SampledPhases {
    pub fn sample(exps: &ExponentSet, weights: &WeightSet, grid: &QuadratureGrid) -> Self {
        let d = grid.domain();
        SampledPhases(grid.points().iter().map(|x| PointPhases::at(exps, weights, d, *x)).collect())
    }

    pub fn from_points(phases: Vec<PointPhases>) -> Self {
        SampledPhases(phases)
    }

    pub fn get(&self, i: usize) -> &PointPhases {
        &self.0[i]
    }

    pub fn as_slice(&self) -> &[PointPhases] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A modular evaluated along the ray `ζ ↦ ρ(u/ζ)`.
pub trait ScaledModular {
    /// `ρ(u/ζ)` for `ζ > 0`.
    fn at_scale(&self, zeta: f64) -> f64;

    /// True when `ρ(u) = 0`, i.e. the norm is zero.
    fn is_zero(&self) -> bool;
}

/// A finite sum `Σ cₖ |uₖ|^{hₖ}` with positive coefficients; every modular
/// in this crate (Lebesgue, weighted, multi-phase) has this shape.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerSum {
    terms: Vec<(f64, f64, f64)>,
}

impl PowerSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coef·|value|^exponent`; terms with zero contribution are dropped.
    pub fn push(&mut self, coef: f64, value: f64, exponent: f64) {
        let a = value.abs();
        if coef != 0.0 && a != 0.0 {
            self.terms.push((coef, a, exponent));
        }
    }

    /// `∫ |u|^{h(x)} dx` with the exponent given per node.
    pub fn lebesgue(u: &[f64], exponents: &[f64], grid: &QuadratureGrid) -> Result<Self> {
        check_len(grid.len(), u.len())?;
        check_len(grid.len(), exponents.len())?;
        let mut s = PowerSum::new();
        for ((w, v), h) in grid.weights().iter().zip(u).zip(exponents) {
            s.push(*w, *v, *h);
        }
        Ok(s)
    }

    /// `∫ μ(x) |u|^{h(x)} dx`
    pub fn weighted(u: &[f64], exponents: &[f64], mu: &[f64], grid: &QuadratureGrid) -> Result<Self> {
        check_len(grid.len(), u.len())?;
        check_len(grid.len(), exponents.len())?;
        check_len(grid.len(), mu.len())?;
        let mut s = PowerSum::new();
        for (((w, v), h), m) in grid.weights().iter().zip(u).zip(exponents).zip(mu) {
            s.push(w * m, *v, *h);
        }
        Ok(s)
    }

    /// `∫ (|u|^p + μ1|u|^q + μ2|u|^r) dx`
    pub fn multiphase(u: &[f64], phases: &SampledPhases, grid: &QuadratureGrid) -> Result<Self> {
        check_len(grid.len(), u.len())?;
        check_len(grid.len(), phases.len())?;
        let mut s = PowerSum::new();
        for ((w, v), ph) in grid.weights().iter().zip(u).zip(phases.as_slice()) {
            s.push(*w, *v, ph.p);
            s.push(w * ph.mu1, *v, ph.q);
            s.push(w * ph.mu2, *v, ph.r);
        }
        Ok(s)
    }

    /// Unscaled value `ρ(u)`.
    pub fn value(&self) -> f64 {
        self.at_scale(1.0)
    }

    /// Smallest and largest exponent carried by a term, if any.
    pub fn exponent_window(&self) -> Option<(f64, f64)> {
        self.terms.iter().fold(None, |acc, &(_, _, h)| match acc {
            None => Some((h, h)),
            Some((lo, hi)) => Some((lo.min(h), hi.max(h))),
        })
    }
}

impl ScaledModular for PowerSum {
    fn at_scale(&self, zeta: f64) -> f64 {
        let vals: Vec<f64> = self.terms.iter().map(|&(c, a, h)| c * (a / zeta).powf(h)).collect();
        pairwise_sum(&vals)
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

fn check_modular_value(v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(MpsError::Numeric("modular evaluated to NaN".into()))
    } else {
        Ok(v)
    }
}

/// Luxemburg norm `inf{ζ > 0 : ρ(u/ζ) ≤ 1}`.
///
/// Brackets the root of `ρ(u/ζ) = 1` by doubling or halving from `ζ = 1`,
/// then bisects until `|ρ(u/ζ) − 1| ≤ tol` or the bracket reaches machine
/// resolution. Returns 0 for the zero modular.
pub fn luxemburg_norm<M: ScaledModular + ?Sized>(modular: &M, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(MpsError::Config(format!("norm tolerance must be positive, got {tol}")));
    }
    if modular.is_zero() {
        return Ok(0.0);
    }
    let excess = |z: f64| check_modular_value(modular.at_scale(z) - 1.0);

    let v1 = excess(1.0)?;
    if v1.abs() <= tol {
        return Ok(1.0);
    }
    // ρ(u/ζ) is decreasing in ζ: lo has excess > 0, hi has excess < 0
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut bracketed = false;
    for _ in 0..MAX_BRACKET_STEPS {
        if v1 > 0.0 {
            lo = hi;
            hi *= 2.0;
            if excess(hi)? <= 0.0 {
                bracketed = true;
                break;
            }
        } else {
            hi = lo;
            lo *= 0.5;
            if excess(lo)? >= 0.0 {
                bracketed = true;
                break;
            }
        }
    }
    if !bracketed {
        return Err(MpsError::Numeric(format!(
            "Luxemburg bracket not found within {MAX_BRACKET_STEPS} doublings"
        )));
    }

    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTION_STEPS {
        mid = 0.5 * (lo + hi);
        let e = excess(mid)?;
        if e.abs() <= tol {
            return Ok(mid);
        }
        if e > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid)
}

/// `∫ |u|^{h(x)} dx` on the grid.
pub fn lebesgue_modular(u: &SampledScalar, h: &ExprField, grid: &QuadratureGrid) -> Result<f64> {
    let hs = grid.sample(h);
    let v = PowerSum::lebesgue(u.values(), &hs, grid)?.value();
    finite(v, "Lebesgue modular")
}

/// `∫ (|u|^p + μ1|u|^q + μ2|u|^r) dx` on the grid.
pub fn multiphase_modular(
    u: &SampledScalar,
    exps: &ExponentSet,
    weights: &WeightSet,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let phases = SampledPhases::sample(exps, weights, grid);
    let v = PowerSum::multiphase(u.values(), &phases, grid)?.value();
    finite(v, "multi-phase modular")
}

/// Luxemburg norm of `u` in the variable-exponent Lebesgue space `L^{h(·)}`.
pub fn lebesgue_norm(u: &SampledScalar, h: &ExprField, grid: &QuadratureGrid, tol: f64) -> Result<f64> {
    let hs = grid.sample(h);
    luxemburg_norm(&PowerSum::lebesgue(u.values(), &hs, grid)?, tol)
}

/// Luxemburg norm of `u` under the multi-phase modular.
pub fn multiphase_norm(
    u: &SampledScalar,
    exps: &ExponentSet,
    weights: &WeightSet,
    grid: &QuadratureGrid,
    tol: f64,
) -> Result<f64> {
    let phases = SampledPhases::sample(exps, weights, grid);
    luxemburg_norm(&PowerSum::multiphase(u.values(), &phases, grid)?, tol)
}

/// The μ-weighted seminorm: the Luxemburg scale of `∫ μ (|u|/ς)^{h} dx`.
pub fn weighted_seminorm(
    u: &SampledScalar,
    h: &ExprField,
    mu: &ExprField,
    grid: &QuadratureGrid,
    tol: f64,
) -> Result<f64> {
    let hs = grid.sample(h);
    let ms = grid.sample(mu);
    if let Some(m) = ms.iter().find(|m| **m < 0.0) {
        return Err(MpsError::Hypothesis(format!("weight is negative ({m}) at a quadrature node")));
    }
    luxemburg_norm(&PowerSum::weighted(u.values(), &hs, &ms, grid)?, tol)
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MpsError::Numeric(format!("{what} is not finite ({v})")))
    }
}

/// Checks the two-sided modular/norm bounds for a modular whose exponents
/// lie in `[h_lo, h_hi]`:
/// `‖u‖ > 1 ⇒ ‖u‖^{h_lo} ≤ ρ(u) ≤ ‖u‖^{h_hi}` and
/// `‖u‖ ≤ 1 ⇒ ‖u‖^{h_hi} ≤ ρ(u) ≤ ‖u‖^{h_lo}`.
///
/// Returns the smallest relative slack of the two inequalities (negative
/// means violated) together with whether `sign(‖u‖ − 1) = sign(ρ(u) − 1)`.
pub fn modular_norm_bounds_slack(rho: f64, norm: f64, h_lo: f64, h_hi: f64) -> (f64, bool) {
    let (lower, upper) = if norm > 1.0 {
        (norm.powf(h_lo), norm.powf(h_hi))
    } else {
        (norm.powf(h_hi), norm.powf(h_lo))
    };
    let scale = rho.abs().max(f64::MIN_POSITIVE);
    let slack = ((rho - lower) / scale).min((upper - rho) / scale);
    let sign = |v: f64, eps: f64| if v > eps { 1 } else if v < -eps { -1 } else { 0 };
    // norm is resolved to ~1e-12 around the unit sphere
    let consistent = {
        let sn = sign(norm - 1.0, 1e-10);
        let sr = sign(rho - 1.0, 1e-9);
        sn == 0 || sr == 0 || sn == sr
    };
    (slack, consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent_fields::ExponentFields;
    use proptest::prelude::*;
    use rand::Rng;

    fn unit_grid(n: usize) -> QuadratureGrid {
        QuadratureGrid::uniform_gauss(Domain::unit_interval(), n)
    }

    fn c(v: f64) -> ExprField {
        ExprField::constant(v)
    }

    #[test]
    fn grid_measure_and_validation() {
        let g = unit_grid(10);
        assert!((g.measure() - 1.0).abs() < 1e-14);
        let g2 = QuadratureGrid::uniform_gauss(Domain::rectangle(0.0, 2.0, -1.0, 0.5).unwrap(), 7);
        assert!((g2.measure() - 3.0).abs() < 1e-12);
        assert!(QuadratureGrid::new(Domain::unit_interval(), vec![[0.5, 0.0]], vec![0.0]).is_err());
        assert!(QuadratureGrid::new(Domain::unit_interval(), vec![[1.5, 0.0]], vec![1.0]).is_err());
        assert!(SampledScalar::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn lebesgue_modular_examples() {
        let g = unit_grid(8);
        let n = g.len();
        let one = SampledScalar::constant(1.0, n);
        assert!((lebesgue_modular(&one, &c(2.0), &g).unwrap() - 1.0).abs() < 1e-14);
        let two = SampledScalar::constant(2.0, n);
        assert!((lebesgue_modular(&two, &c(2.0), &g).unwrap() - 4.0).abs() < 1e-14);
        let h = ExprField::affine(2.0, 1.0, 0.0);
        assert!((lebesgue_modular(&one, &h, &g).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(lebesgue_modular(&SampledScalar::constant(0.0, n), &h, &g).unwrap(), 0.0);
    }

    #[test]
    fn multiphase_modular_examples() {
        let d = Domain::unit_interval();
        let g = unit_grid(8);
        let n = g.len();
        let e = ExponentSet::constants(2.0, 3.0, 4.0, 5.0, 1.5, &d);
        let one = SampledScalar::constant(1.0, n);
        let w = WeightSet::constants(1.0, 0.0);
        assert!((multiphase_modular(&one, &e, &w, &g).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(multiphase_modular(&SampledScalar::constant(0.0, n), &e, &w, &g).unwrap(), 0.0);
        let w = WeightSet::constants(0.5, 0.25);
        let two = SampledScalar::constant(2.0, n);
        assert!((multiphase_modular(&two, &e, &w, &g).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn luxemburg_examples() {
        let g = unit_grid(16);
        let n = g.len();
        let one = SampledScalar::constant(1.0, n);
        let two = SampledScalar::constant(2.0, n);
        assert!((lebesgue_norm(&one, &c(2.0), &g, DEFAULT_NORM_TOL).unwrap() - 1.0).abs() < 1e-12);
        assert!((lebesgue_norm(&two, &c(2.0), &g, DEFAULT_NORM_TOL).unwrap() - 2.0).abs() < 1e-12);
        let zero = SampledScalar::constant(0.0, n);
        assert_eq!(lebesgue_norm(&zero, &c(2.0), &g, DEFAULT_NORM_TOL).unwrap(), 0.0);
    }

    /// Independent oracle: 10^6-point trapezoid rule for `∫₀¹ ζ^{−(2+x)} dx`
    /// plus its own bisection.
    fn variable_exponent_norm_oracle() -> f64 {
        let m = 1_000_000usize;
        let integral = |z: f64| {
            let f = |x: f64| z.powf(-(2.0 + x));
            let inner: f64 = (1..m).map(|i| f(i as f64 / m as f64)).sum();
            (0.5 * (f(0.0) + f(1.0)) + inner) / m as f64
        };
        let (mut lo, mut hi) = (0.5, 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if integral(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn variable_exponent_norm_matches_dense_oracle() {
        let oracle = variable_exponent_norm_oracle();
        // frozen value of the oracle
        assert!((oracle - 1.0).abs() < 1e-12, "oracle {oracle}");
        let g = unit_grid(2000);
        let one = SampledScalar::constant(1.0, g.len());
        let z = lebesgue_norm(&one, &ExprField::affine(2.0, 1.0, 0.0), &g, DEFAULT_NORM_TOL).unwrap();
        assert!((z - oracle).abs() < 1e-9, "{z} vs {oracle}");
    }

    #[test]
    fn variable_exponent_norm_of_nonunit_constant() {
        // u ≡ 3, h = 2 + x: ∫ (3/ζ)^{2+x} dx = 1, oracle by closed-form
        // antiderivative and bisection
        let closed = |z: f64| {
            let a = 3.0 / z;
            if (a - 1.0).abs() < 1e-15 {
                1.0
            } else {
                a * a * (a - 1.0) / a.ln()
            }
        };
        let (mut lo, mut hi) = (1.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if closed(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let g = unit_grid(2000);
        let u = SampledScalar::constant(3.0, g.len());
        let z = lebesgue_norm(&u, &ExprField::affine(2.0, 1.0, 0.0), &g, DEFAULT_NORM_TOL).unwrap();
        assert!((z - oracle).abs() < 1e-8 * oracle, "{z} vs {oracle}");
    }

    #[test]
    fn weighted_seminorm_examples() {
        let g = unit_grid(64);
        let n = g.len();
        let u = SampledScalar::constant(1.0, n);
        assert_eq!(weighted_seminorm(&u, &c(2.0), &c(0.0), &g, DEFAULT_NORM_TOL).unwrap(), 0.0);
        let three = SampledScalar::constant(3.0, n);
        let v = weighted_seminorm(&three, &c(2.0), &c(1.0), &g, DEFAULT_NORM_TOL).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        let v = weighted_seminorm(&u, &c(2.0), &ExprField::affine(0.0, 1.0, 0.0), &g, DEFAULT_NORM_TOL).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-12, "{v}");
        assert!(weighted_seminorm(&u, &c(2.0), &c(-1.0), &g, DEFAULT_NORM_TOL).is_err());
    }

    #[test]
    fn overflow_scale_input_is_a_bracket_error() {
        let g = unit_grid(2);
        let huge = SampledScalar::constant(1e300, g.len());
        let err = lebesgue_norm(&huge, &c(2.0), &g, DEFAULT_NORM_TOL).unwrap_err();
        assert!(matches!(err, MpsError::Numeric(_)));
    }

    #[test]
    fn constant_exponent_norm_is_classical_lp() {
        let g = QuadratureGrid::uniform_gauss(Domain::unit_square(), 6);
        let mut rng = crate::numeric::named_rng(3, "lp");
        for p in [1.3, 2.0, 3.7, 6.0] {
            let vals: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let u = SampledScalar::new(vals.clone()).unwrap();
            let closed = g.integrate(&vals.iter().map(|v| v.abs().powf(p)).collect::<Vec<_>>()).powf(1.0 / p);
            let z = lebesgue_norm(&u, &c(p), &g, DEFAULT_NORM_TOL).unwrap();
            assert!((z - closed).abs() <= 1e-10 * closed, "p={p}: {z} vs {closed}");
        }
    }

    fn random_sample(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        let scale = 10f64.powf(rng.random_range(-1.5..1.5));
        (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
    }

    fn catalog_exponent(k: u64) -> ExprField {
        match k % 3 {
            0 => ExprField::constant(2.5),
            1 => ExprField::affine(1.4, 1.2, 0.0),
            _ => ExprField::sinusoidal(2.2, 0.7, 1.0, 0),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lebesgue_modular_norm_relations(seed in any::<u64>()) {
            let d = Domain::unit_interval();
            let g = unit_grid(12);
            let h = catalog_exponent(seed);
            let (hlo, hhi) = h.exact_extrema(&d);
            let mut rng = crate::numeric::named_rng(seed, "prop");
            let u = SampledScalar::new(random_sample(&mut rng, g.len())).unwrap();
            let rho = lebesgue_modular(&u, &h, &g).unwrap();
            let nrm = lebesgue_norm(&u, &h, &g, DEFAULT_NORM_TOL).unwrap();
            let (slack, consistent) = modular_norm_bounds_slack(rho, nrm, hlo, hhi);
            prop_assert!(consistent);
            prop_assert!(slack >= -1e-8, "slack {}", slack);
        }

        #[test]
        fn luxemburg_homogeneity(seed in any::<u64>(), c in -20.0..20.0f64) {
            let g = unit_grid(10);
            let h = catalog_exponent(seed);
            let mut rng = crate::numeric::named_rng(seed, "hom");
            let u = SampledScalar::new(random_sample(&mut rng, g.len())).unwrap();
            let n1 = lebesgue_norm(&u, &h, &g, DEFAULT_NORM_TOL).unwrap();
            let n2 = lebesgue_norm(&u.scaled(c), &h, &g, DEFAULT_NORM_TOL).unwrap();
            prop_assert!((n2 - c.abs() * n1).abs() <= 1e-10 * (c.abs() * n1).max(1e-300));
        }

        #[test]
        fn luxemburg_triangle_inequality(seed in any::<u64>()) {
            let d = Domain::unit_interval();
            let g = unit_grid(10);
            let mut rng = crate::numeric::named_rng(seed, "tri");
            let e = ExponentSet::new(ExponentFields {
                p: catalog_exponent(seed),
                q: ExprField::constant(3.5),
                r: ExprField::constant(4.0),
                s: ExprField::constant(5.0),
                alpha: ExprField::constant(1.1),
            }, &d);
            let w = WeightSet::new(ExprField::affine(0.0, 1.0, 0.0), ExprField::constant(0.3));
            let a = random_sample(&mut rng, g.len());
            let b = random_sample(&mut rng, g.len());
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let nrm = |v: Vec<f64>| multiphase_norm(&SampledScalar::new(v).unwrap(), &e, &w, &g, DEFAULT_NORM_TOL).unwrap();
            let (na, nb, ns) = (nrm(a), nrm(b), nrm(sum));
            prop_assert!(ns <= na + nb + 1e-9);
        }
    }
}
