use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::exponent_fields::{Domain, ExponentSet, DEFAULT_VALIDATION_GRID};
use crate::numeric::named_rng;
use crate::problem::NonlinearitySpec;

pub const MIN_GROWTH_SAMPLES: usize = 1000;
/// Sampled `|t|` and `|η|` range over `[10^LO, 10^HI]`.
const LOG10_LO: f64 = -3.0;
const LOG10_HI: f64 = 3.0;
const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: [f64; 2],
    pub t: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthClause {
    pub clause: String,
    pub passed: bool,
    /// Worst sampled value of the clause's statistic.
    pub value: f64,
    /// Level the statistic is compared against.
    pub bound: f64,
    pub witness: Option<Witness>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub samples: usize,
    pub seed: u64,
    pub clauses: Vec<GrowthClause>,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&GrowthClause> {
        self.clauses.iter().find(|c| c.clause == name)
    }
}

fn log_uniform(rng: &mut impl Rng) -> f64 {
    10f64.powf(rng.random_range(LOG10_LO..=LOG10_HI))
}

/// Samples `(x, t, η)` and checks the growth hypotheses of the
/// nonlinearity:
///
/// - `f1`: `f(·, 0, 0) ≠ 0` somewhere on the validation grid;
/// - `f2`: `|f| ≤ g + a₁|t|^{s−1} + a₂|η|^{p(s−1)/s}`, reported as the
///   worst ratio of `|f|` to the bound;
/// - `f3`: `f / (h + β₁|t|^{α⁻−1} + β₂|η|^{α−1}) ≤ λ` at the largest
///   sampled `|η|`, reported as the worst ratio.
///
/// Unset growth data take the defaults documented on
/// [`GrowthData`](crate::problem::GrowthData).
pub fn growth_validator(
    spec: &NonlinearitySpec,
    exps: &ExponentSet,
    domain: &Domain,
    samples: usize,
    seed: u64,
) -> Result<GrowthReport> {
    if samples < MIN_GROWTH_SAMPLES {
        return Err(MpsError::Config(format!("growth validator needs at least {MIN_GROWTH_SAMPLES} samples, got {samples}")));
    }
    let f = spec.bind(exps);
    let gd = &spec.growth;
    let a1 = gd.a1.unwrap_or(spec.a1_hat);
    let a2 = gd.a2.unwrap_or(spec.a2_hat);
    let lambda = gd.lambda.unwrap_or(1.0);
    let alpha_minus = exps.alpha_range().min;
    let g_at = |xh| gd.g.as_ref().map_or_else(|| spec.g_hat.eval_normalized(xh).abs(), |g| g.eval_normalized(xh));
    let h_at = |xh| gd.h.as_ref().map_or_else(|| spec.g_hat.eval_normalized(xh).abs(), |h| h.eval_normalized(xh));
    let b1_at = |xh| gd.beta1.as_ref().map_or(1.0, |b| b.eval_normalized(xh));
    let b2_at = |xh| gd.beta2.as_ref().map_or(1.0, |b| b.eval_normalized(xh));

    let mut clauses = Vec::with_capacity(3);

    // f1
    let mut best = (0.0, [0.0; 2]);
    for x in domain.grid_points(DEFAULT_VALIDATION_GRID) {
        let v = f.value_normalized(domain.normalize(x), 0.0, 0.0).abs();
        if v > best.0 {
            best = (v, x);
        }
    }
    clauses.push(GrowthClause {
        clause: "f1".into(),
        passed: best.0 > 0.0,
        value: best.0,
        bound: 0.0,
        witness: (best.0 > 0.0).then_some(Witness { x: best.1, t: 0.0, eta: 0.0 }),
        detail: "max |f(x, 0, 0)| over the validation grid".into(),
    });

    let mut rng = named_rng(seed, "growth-validator");
    let pts: Vec<Witness> = (0..samples)
        .map(|_| {
            let xh = [rng.random::<f64>(), rng.random::<f64>()];
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let t = sign * log_uniform(&mut rng);
            let eta = log_uniform(&mut rng);
            Witness { x: domain.from_normalized(xh), t, eta }
        })
        .collect();

    // f2
    let mut worst = (f64::NEG_INFINITY, None);
    for w in &pts {
        let xh = domain.normalize(w.x);
        let s = f.s.eval_normalized(xh);
        let p = f.p.eval_normalized(xh);
        let val = f.value_normalized(xh, w.t, w.eta).abs();
        let bound = g_at(xh) + a1 * w.t.abs().powf(s - 1.0) + a2 * w.eta.powf(p * (s - 1.0) / s);
        let ratio = if val == 0.0 { 0.0 } else { val / bound };
        if ratio > worst.0 {
            worst = (ratio, Some(*w));
        }
    }
    clauses.push(GrowthClause {
        clause: "f2".into(),
        passed: worst.0 <= 1.0 + RATIO_SLACK,
        value: worst.0,
        bound: 1.0,
        witness: worst.1,
        detail: "max |f| / (g + a1|t|^(s-1) + a2|eta|^(p(s-1)/s))".into(),
    });

    // f3
    let eta_max = pts.iter().map(|w| w.eta).fold(0.0, f64::max);
    let ratio_at = |w: &Witness, eta: f64| {
        let xh = domain.normalize(w.x);
        let den = h_at(xh)
            + b1_at(xh) * w.t.abs().powf(alpha_minus - 1.0)
            + b2_at(xh) * eta.powf(exps.alpha().eval_normalized(xh) - 1.0);
        f.value_normalized(xh, w.t, eta) / den
    };
    let mut worst = (f64::NEG_INFINITY, None);
    let mut worst_tenth = f64::NEG_INFINITY;
    for w in &pts {
        let r = ratio_at(w, eta_max);
        if r > worst.0 {
            worst = (r, Some(Witness { eta: eta_max, ..*w }));
        }
        worst_tenth = worst_tenth.max(ratio_at(w, eta_max / 10.0));
    }
    clauses.push(GrowthClause {
        clause: "f3".into(),
        passed: worst.0 <= lambda,
        value: worst.0,
        bound: lambda,
        witness: worst.1,
        detail: format!(
            "max f / (h + b1|t|^(alpha^- - 1) + b2|eta|^(alpha - 1)) at |eta| = {eta_max:.6e} (at |eta|/10: {worst_tenth:.6e})"
        ),
    });

    Ok(GrowthReport { samples, seed, clauses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent_fields::ExprField;

    fn exps(p: f64, s: f64) -> (Domain, ExponentSet) {
        let d = Domain::unit_interval();
        let q = p + (s - p) / 3.0;
        let r = p + 2.0 * (s - p) / 3.0;
        let e = ExponentSet::constants(p, q, r, s, 1.5, &d);
        (d, e)
    }

    #[test]
    fn constant_source_passes_f2() {
        let (d, e) = exps(2.0, 3.5);
        for (a1, a2) in [(0.0, 0.0), (0.4, 0.0), (0.0, 0.0)] {
            let mut nl = NonlinearitySpec::new(ExprField::constant(2.0), 0.0, 0.0);
            nl.growth.a1 = Some(a1);
            nl.growth.a2 = Some(a2);
            let rep = growth_validator(&nl, &e, &d, 2000, 1).unwrap();
            assert!(rep.clause("f2").unwrap().passed);
            assert!(rep.clause("f1").unwrap().passed);
        }
    }

    #[test]
    fn reaction_term_dominated() {
        let (d, e) = exps(2.0, 3.5);
        let nl = NonlinearitySpec::new(ExprField::constant(0.0), 0.3, 0.0);
        let rep = growth_validator(&nl, &e, &d, 2000, 2).unwrap();
        let f2 = rep.clause("f2").unwrap();
        assert!(f2.passed, "{f2:?}");
        assert!(!rep.clause("f1").unwrap().passed);
    }

    #[test]
    fn gradient_log_term_flagged_when_s_near_p() {
        let (d, e) = exps(2.0, 2.5);
        let nl = NonlinearitySpec::new(ExprField::constant(1.0), 0.05, 0.05);
        let rep = growth_validator(&nl, &e, &d, 5000, 3).unwrap();
        let f2 = rep.clause("f2").unwrap();
        assert!(!f2.passed, "{f2:?}");
        let w = f2.witness.unwrap();
        // independent check at the witness
        let val = (w.t + 1.0).sin() + 0.05 * w.t.abs().powf(1.5) * (-w.t.abs()).exp() + 0.05 * w.eta * w.eta.ln_1p();
        let bound = 1.0 + 0.05 * w.t.abs().powf(1.5) + 0.05 * w.eta.powf(1.2);
        assert!(val.abs() > bound);
        // and the log term outgrows the alpha-power in f3
        assert!(!rep.clause("f3").unwrap().passed);
    }

    #[test]
    fn far_apart_exponents_pass() {
        let (d, e) = exps(2.0, 6.0);
        let nl = NonlinearitySpec::new(ExprField::constant(1.0), 0.05, 0.05);
        let rep = growth_validator(&nl, &e, &d, 3000, 4).unwrap();
        assert!(rep.clause("f2").unwrap().passed);
    }

    #[test]
    fn gradient_free_satisfies_f3() {
        let (d, e) = exps(2.0, 3.5);
        let nl = NonlinearitySpec::new(ExprField::constant(1.0), 0.1, 0.0);
        let rep = growth_validator(&nl, &e, &d, 1000, 5).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn too_few_samples_rejected() {
        let (d, e) = exps(2.0, 3.5);
        let nl = NonlinearitySpec::new(ExprField::constant(1.0), 0.0, 0.0);
        assert!(matches!(growth_validator(&nl, &e, &d, 999, 0), Err(MpsError::Config(_))));
    }

    #[test]
    fn deterministic() {
        let (d, e) = exps(2.0, 2.5);
        let nl = NonlinearitySpec::new(ExprField::constant(1.0), 0.05, 0.05);
        let a = growth_validator(&nl, &e, &d, 1000, 9).unwrap();
        let b = growth_validator(&nl, &e, &d, 1000, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
