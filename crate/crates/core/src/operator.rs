//! Pointwise kernels of the multi-phase operator: flux, energy density,
//! duality pairings, the Kirchhoff coefficient, and the vector inequalities
//! used in the continuity and monotonicity arguments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, MpsError, Result};
use crate::exponent_fields::{Domain, ExponentSet, Point, WeightSet};
use crate::musielak::{PointPhases, QuadratureGrid, SampledPhases};
use crate::numeric::pairwise_sum;

/// Nonlocal coefficient `M(t) = m0 + c·t^{γ−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KirchhoffModel {
    pub m0: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    2.0
}

impl KirchhoffModel {
    pub fn new(m0: f64, c: f64, gamma: f64) -> Result<Self> {
        let m = KirchhoffModel { m0, c, gamma };
        m.validate()?;
        Ok(m)
    }

    /// `M ≡ 1`
    pub fn local() -> Self {
        KirchhoffModel { m0: 1.0, c: 0.0, gamma: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(MpsError::Hypothesis(format!("Kirchhoff m0 must be > 0, got {}", self.m0)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(MpsError::Hypothesis(format!("Kirchhoff scale c must be >= 0, got {}", self.c)));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(MpsError::Hypothesis(format!("Kirchhoff gamma must be > 1, got {}", self.gamma)));
        }
        Ok(())
    }

    /// `M(t)`
    pub fn value(&self, t: f64) -> f64 {
        self.m0 + self.c * t.max(0.0).powf(self.gamma - 1.0)
    }

    /// `M̂(t) = ∫₀ᵗ M(s) ds = m0·t + (c/γ)·t^γ`
    pub fn antiderivative(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        self.m0 * t + self.c / self.gamma * t.powf(self.gamma)
    }

    /// `M'(t)`; infinite at `t = 0` when `γ < 2` and `c > 0`.
    pub fn derivative(&self, t: f64) -> f64 {
        if self.c == 0.0 || self.gamma == 2.0 {
            return self.c;
        }
        self.c * (self.gamma - 1.0) * t.max(0.0).powf(self.gamma - 2.0)
    }

    /// Smallest `κ` with `M(t) ≤ κ·t^{γ−1}` on `[t_min, ∞)`, `t_min > 0`.
    ///
    /// `M(t)/t^{γ−1} = m0·t^{1−γ} + c` decreases in `t`, so the supremum
    /// sits at `t_min`.
    pub fn effective_kappa(&self, t_min: f64) -> f64 {
        if t_min <= 0.0 {
            return f64::INFINITY;
        }
        self.m0 * t_min.powf(1.0 - self.gamma) + self.c
    }
}

/// `M(t)`
pub fn kirchhoff(model: &KirchhoffModel, t: f64) -> f64 {
    model.value(t)
}

/// `M̂(t)`
pub fn kirchhoff_antiderivative(model: &KirchhoffModel, t: f64) -> f64 {
    model.antiderivative(t)
}

/// A vector of dimension `dim` at every quadrature node.
#[derive(Debug, Clone, PartialEq)]
pub struct GradSample {
    dim: usize,
    data: Vec<f64>,
}

impl GradSample {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(MpsError::Config(format!(
                "gradient data of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(MpsError::Numeric(format!("gradient entry {i} is not finite")));
        }
        Ok(GradSample { dim, data })
    }

    /// The same vector at `len` nodes.
    pub fn constant(v: &[f64], len: usize) -> Self {
        GradSample { dim: v.len(), data: v.repeat(len) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.chunks(self.dim).map(euclid).collect()
    }
}

#[inline]
pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|ξ|^{p−2}ξ + μ1|ξ|^{q−2}ξ + μ2|ξ|^{r−2}ξ` with the phases of one point;
/// zero at `ξ = 0`.
pub fn flux_at(phases: &PointPhases, xi: &[f64]) -> Vec<f64> {
    let f = phases.flux_factor(euclid(xi));
    xi.iter().map(|v| f * v).collect()
}

/// The three-phase flux at the physical point `x`.
pub fn flux(x: Point, xi: &[f64], exps: &ExponentSet, weights: &WeightSet, domain: &Domain) -> Vec<f64> {
    flux_at(&PointPhases::at(exps, weights, domain, x), xi)
}

fn check_grads(grad: &GradSample, grid: &QuadratureGrid) -> Result<()> {
    check_len(grid.len(), grad.len())?;
    check_len(grid.domain().dim(), grad.dim())
}

/// `ϱ(u) = ∫ (|∇u|^p/p + μ1|∇u|^q/q + μ2|∇u|^r/r) dx` from sampled phases.
pub fn energy_sampled(u_grad: &GradSample, phases: &SampledPhases, grid: &QuadratureGrid) -> Result<f64> {
    check_grads(u_grad, grid)?;
    check_len(grid.len(), phases.len())?;
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| grid.weights()[i] * phases.get(i).energy_density(euclid(u_grad.get(i))))
        .collect();
    let e = pairwise_sum(&terms);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(MpsError::Numeric(format!("energy is not finite ({e})")))
    }
}

pub fn energy(u_grad: &GradSample, exps: &ExponentSet, weights: &WeightSet, grid: &QuadratureGrid) -> Result<f64> {
    energy_sampled(u_grad, &SampledPhases::sample(exps, weights, grid), grid)
}

/// `⟨ϱ'(u), φ⟩ = ∫ flux(∇u)·∇φ dx` from sampled phases.
pub fn pairing_sampled(
    u_grad: &GradSample,
    phi_grad: &GradSample,
    phases: &SampledPhases,
    grid: &QuadratureGrid,
) -> Result<f64> {
    check_grads(u_grad, grid)?;
    check_grads(phi_grad, grid)?;
    check_len(grid.len(), phases.len())?;
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| {
            let g = u_grad.get(i);
            grid.weights()[i] * phases.get(i).flux_factor(euclid(g)) * dot(g, phi_grad.get(i))
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

pub fn pairing(
    u_grad: &GradSample,
    phi_grad: &GradSample,
    exps: &ExponentSet,
    weights: &WeightSet,
    grid: &QuadratureGrid,
) -> Result<f64> {
    pairing_sampled(u_grad, phi_grad, &SampledPhases::sample(exps, weights, grid), grid)
}

/// `M(ϱ(u))·⟨ϱ'(u), φ⟩`
pub fn nonlocal_pairing(
    u_grad: &GradSample,
    phi_grad: &GradSample,
    model: &KirchhoffModel,
    exps: &ExponentSet,
    weights: &WeightSet,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let phases = SampledPhases::sample(exps, weights, grid);
    let rho = energy_sampled(u_grad, &phases, grid)?;
    Ok(model.value(rho) * pairing_sampled(u_grad, phi_grad, &phases, grid)?)
}

/// `|x|^{p−2}x`, taken as 0 at `x = 0`.
pub fn signed_power(x: &[f64], p: f64) -> Vec<f64> {
    let n = euclid(x);
    if n == 0.0 {
        return vec![0.0; x.len()];
    }
    let f = n.powf(p - 2.0);
    x.iter().map(|v| f * v).collect()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Both sides of the scaled flux-gap inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxGapBound {
    /// `|a|x|^{p−2}x − b|y|^{p−2}y|`
    pub lhs: f64,
    /// `(a + |a−b|)·||x|^{p−2}x − |y|^{p−2}y| + |a−b|·max(|x|,|y|)^{p−1}`
    pub rhs: f64,
    pub holds: bool,
    /// The same bound with the last factor replaced by 1 (the form that is
    /// only valid inside the unit ball).
    pub unit_ball_rhs: f64,
    pub unit_ball_holds: bool,
    /// Whether `|x| ≤ 1` and `|y| ≤ 1`.
    pub in_unit_ball: bool,
}

fn holds_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-9 * (1.0 + rhs)
}

/// Evaluates the scale-invariant flux-gap bound for `a, b > 0`, `p ≥ 1`.
///
/// Follows from `|aX − bY| ≤ a|X − Y| + |a − b||Y|` with `X = |x|^{p−2}x`,
/// `Y = |y|^{p−2}y` and `|Y| ≤ max(|x|,|y|)^{p−1}`.
pub fn scaled_flux_gap_bound(a: f64, b: f64, x: &[f64], y: &[f64], p: f64) -> FluxGapBound {
    let sx = signed_power(x, p);
    let sy = signed_power(y, p);
    let combo: Vec<f64> = sx.iter().zip(&sy).map(|(u, v)| a * u - b * v).collect();
    let lhs = euclid(&combo);
    let gap = diff_norm(&sx, &sy);
    let ab = (a - b).abs();
    let big = euclid(x).max(euclid(y));
    // max(|x|,|y|)^{p−1}; for p = 1 and x = y = 0 both X and Y vanish
    let growth = if big == 0.0 { 0.0 } else { big.powf(p - 1.0) };
    let rhs = (a + ab) * gap + ab * growth;
    let unit_ball_rhs = (a + ab) * gap + ab;
    FluxGapBound {
        lhs,
        rhs,
        holds: holds_with_slack(lhs, rhs),
        unit_ball_rhs,
        unit_ball_holds: holds_with_slack(lhs, unit_ball_rhs),
        in_unit_ball: euclid(x) <= 1.0 && euclid(y) <= 1.0,
    }
}

/// Both sides of `||a|^{m−2}a − |b|^{m−2}b| ≤ c_m |a−b| (|a|+|b|)^{m−2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerDiffBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn power_diff_bound(a: &[f64], b: &[f64], m: f64, c_m: f64) -> PowerDiffBound {
    let na = euclid(a);
    let nb = euclid(b);
    if na + nb == 0.0 {
        return PowerDiffBound { lhs: 0.0, rhs: 0.0, holds: true };
    }
    let lhs = diff_norm(&signed_power(a, m), &signed_power(b, m));
    let rhs = c_m * diff_norm(a, b) * (na + nb).powf(m - 2.0);
    PowerDiffBound { lhs, rhs, holds: lhs <= rhs + 1e-12 * (1.0 + rhs) }
}

/// Largest sampled ratio `lhs/(|a−b|(|a|+|b|)^{m−2})` over random pairs in
/// the unit ball of `ℝ^dim`: the smallest admissible `c_m` on the sample.
pub fn sampled_power_diff_constant(m: f64, dim: usize, samples: usize, rng: &mut impl Rng) -> f64 {
    let mut worst = 0.0f64;
    let draw = |rng: &mut dyn rand::RngCore| -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            if euclid(&v) <= 1.0 {
                return v;
            }
        }
    };
    for _ in 0..samples {
        let a = draw(rng);
        let b = draw(rng);
        let base = power_diff_bound(&a, &b, m, 1.0);
        if base.rhs > 0.0 {
            worst = worst.max(base.lhs / base.rhs);
        }
    }
    worst
}
