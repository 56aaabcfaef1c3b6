//! Exact counterparts of every estimator by enumeration of `{0,1}^d`.

use serde::{Deserialize, Serialize};

use crate::discrete::DiscreteModel;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::proposals::ProposalParams;
use crate::weighting::WeightFn;

/// Tolerance on probability sums when locating exact quantiles.
const PROB_TOL: f64 = 1e-12;

/// One level set of `f` with its quantile pair and preference under the
/// current proposal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelClass {
    pub f: f64,
    pub prob: f64,
    pub q_lt: f64,
    pub q_leq: f64,
    pub preference: f64,
}

/// Exact Rényi divergences of the target to both proposals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRenyi {
    pub alpha: f64,
    pub prev: f64,
    pub next: f64,
}

/// Every diagnostic quantity for one `(prev, next)` pair, computed exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    pub z_w: f64,
    pub classes: Vec<LevelClass>,
    pub j: f64,
    pub q_prev: f64,
    pub q_next: f64,
    pub kl_target_prev: f64,
    pub kl_target_next: f64,
    pub delta: f64,
    pub renyi_target: Vec<ExactRenyi>,
    /// `J ≥ exp(Δ)·Z_w` (exact arithmetic up to 1e-12 relative slack).
    pub improvement_holds: bool,
    /// `KL(π, p_prev) ≤ −ln Z_w`, checked without tolerance.
    pub kl_bound_holds: bool,
}

/// Exact distribution of `f` over level sets, sorted by value.
fn level_sets(values: &[f64], probs: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (f, p) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == f => last.1 += p,
            _ => out.push((f, p)),
        }
    }
    out
}

/// Largest level `u` with `P[f ≤ u] ≥ q` and `P[f ≥ u] ≥ 1 − q`.
fn exact_quantile(levels: &[(f64, f64)], q: f64) -> f64 {
    let total: f64 = levels.iter().map(|l| l.1).sum();
    let mut below = 0.0;
    let mut best = levels[0].0;
    for &(f, p) in levels {
        let at_most = below + p;
        let at_least = total - below;
        if at_most >= q - PROB_TOL && at_least >= 1.0 - q - PROB_TOL {
            best = f;
        }
        below = at_most;
    }
    best
}

/// Builds the level classes of `f` under `probs` with preferences from `w`.
pub fn level_classes(values: &[f64], probs: &[f64], w: &WeightFn) -> Vec<LevelClass> {
    let mut below = 0.0_f64;
    level_sets(values, probs)
        .into_iter()
        .map(|(f, p)| {
            let q_lt = below.min(1.0);
            let q_leq = (below + p).min(1.0).max(q_lt);
            below += p;
            LevelClass { f, prob: p, q_lt, q_leq, preference: w.preference_unchecked(q_lt, q_leq) }
        })
        .collect()
}

pub fn exact_report(
    model: &DiscreteModel,
    obj: &Objective,
    w: &WeightFn,
    prev: &ProposalParams,
    next: &ProposalParams,
    alphas: &[f64],
    q: f64,
) -> Result<ExactReport> {
    if obj.dim() != model.dim() {
        return Err(Error::Domain("objective and model dimensions differ".into()));
    }
    let p_prev = model.probabilities(prev)?;
    let p_next = model.probabilities(next)?;
    let points = model.points();
    let values: Vec<f64> = points.iter().map(|x| obj.eval(x)).collect();
    let classes = level_classes(&values, &p_prev, w);
    let pref_of = |f: f64| {
        let i = classes.partition_point(|c| c.f < f);
        classes[i].preference
    };
    let pref: Vec<f64> = values.iter().map(|&f| pref_of(f)).collect();
    let z_w = w.mass();
    let ln_z = z_w.ln();

    let j: f64 = p_next.iter().zip(&pref).map(|(p, wv)| p * wv).sum();
    let pi: Vec<f64> = p_prev.iter().zip(&pref).map(|(p, wv)| wv * p / z_w).collect();
    let kl_to = |other: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..pi.len() {
            if pi[i] > 0.0 {
                if other[i] == 0.0 {
                    return f64::INFINITY;
                }
                acc += pi[i] * (pref[i].ln() + p_prev[i].ln() - other[i].ln());
            }
        }
        acc - ln_z
    };
    let kl_prev = kl_to(&p_prev);
    let kl_next = kl_to(&p_next);
    let renyi_to = |other: &[f64], alpha: f64| -> f64 {
        let s: f64 = (0..pi.len())
            .filter(|&i| pi[i] > 0.0)
            .map(|i| (alpha * pi[i].ln() + (1.0 - alpha) * other[i].ln()).exp())
            .sum();
        s.ln() / (alpha - 1.0)
    };
    let renyi_target = alphas
        .iter()
        .map(|&alpha| {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Domain(format!("Rényi order must lie in (0, 1), got {alpha}")));
            }
            Ok(ExactRenyi { alpha, prev: renyi_to(&p_prev, alpha), next: renyi_to(&p_next, alpha) })
        })
        .collect::<Result<Vec<_>>>()?;
    let delta = kl_prev - kl_next;
    let q_prev = exact_quantile(&level_sets(&values, &p_prev), q);
    let q_next = exact_quantile(&level_sets(&values, &p_next), q);
    Ok(ExactReport {
        z_w,
        classes,
        j,
        q_prev,
        q_next,
        kl_target_prev: kl_prev,
        kl_target_next: kl_next,
        delta,
        renyi_target,
        improvement_holds: j >= delta.exp() * z_w * (1.0 - 1e-12),
        kl_bound_holds: kl_prev <= -ln_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::DomainKind;
    use crate::proposals::BernoulliParams;

    fn popcount() -> Objective {
        Objective::new("popcount", DomainKind::Bits(2), |x| x.sum())
    }

    #[test]
    fn uniform_popcount_instance() {
        let m = DiscreteModel::new(2).unwrap();
        let w = WeightFn::indicator(0.5).unwrap();
        let p = ProposalParams::Bernoulli(BernoulliParams::uniform(2).unwrap());
        let r = exact_report(&m, &popcount(), &w, &p, &p, &[0.5], 0.5).unwrap();
        let prefs: Vec<f64> = r.classes.iter().map(|c| c.preference).collect();
        assert_eq!(prefs, vec![1.0, 0.5, 0.0]);
        assert_eq!(r.j, 0.5);
        assert!((r.kl_target_prev - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(r.q_prev, 1.0);
        assert!(r.kl_bound_holds && r.improvement_holds);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn quantile_below_smallest_atom_concentrates_on_argmin() {
        let m = DiscreteModel::new(2).unwrap();
        let w = WeightFn::indicator(0.1).unwrap();
        let p = ProposalParams::Bernoulli(BernoulliParams::uniform(2).unwrap());
        let r = exact_report(&m, &popcount(), &w, &p, &p, &[], 0.5).unwrap();
        // π is p restricted to {f = 0}, which has probability 1/4.
        assert!((r.kl_target_prev - 4f64.ln()).abs() < 1e-12);
        assert_eq!(r.classes[0].preference, 0.4);
    }
}
