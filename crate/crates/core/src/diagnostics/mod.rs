//! Estimators of the quantities the improvement statements talk about, and
//! per-iteration checks built on them.
//!
//! Each iteration draws three fresh batches on their own substreams: a target
//! batch from the current proposal (divergences and `Q̂_prev`), and the
//! reference/next pair of the `J` estimator (`Q̂_next` is read off the next
//! sample). None of them is the batch the stepper consumed.

mod checks;
mod estimators;
mod exact;

use serde::{Deserialize, Serialize};

use crate::algorithms::{Rule, StepConfig};
use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::proposals::ProposalParams;
use crate::rng::{Purpose, StreamKey};
use crate::weighting::WeightFn;

pub use checks::{
    check_igo_delta_formula, check_improvement_bound, check_kl_decrease, predicted_delta, quantile_bound_check,
    quantile_not_above, CheckOutcome, CheckStatus, ImprovementChecks, QuantileBound,
};
pub use estimators::{
    estimate_j, estimate_target_kl, estimate_target_renyi, estimate_target_renyi_general, j_from_samples,
    quantile_estimate, Divergence, Estimate, JSample, QuantileEstimate, TOL_SIGMAS,
};
pub use exact::{exact_report, level_classes, ExactRenyi, ExactReport, LevelClass};

use estimators::{
    delta_se, kl_from_sample, log_densities, renyi_binary_from_sample, renyi_general_from_sample, sample_j, sorted_copy,
    TargetSample,
};

type RenyiFromSample = fn(&TargetSample<'_>, &[f64], f64) -> Result<Divergence>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Size `M` of every diagnostic batch; `None` uses the step batch size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    /// Rényi orders in `(0, 1)` to estimate alongside the KL.
    #[serde(default)]
    pub renyi_alphas: Vec<f64>,
    /// Quantile level of `Q̂`; `None` uses the indicator level, or 1/2 for
    /// table weightings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile_level: Option<f64>,
}

impl DiagnosticsConfig {
    pub fn batch_size_for(&self, step: &StepConfig) -> usize {
        self.batch_size.unwrap_or(step.batch_size)
    }

    pub fn level_for(&self, w: &WeightFn) -> f64 {
        self.quantile_level.or_else(|| w.indicator_level()).unwrap_or(0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.batch_size {
            if m < 2 {
                return Err(Error::Config(format!("diagnostic batch size must be at least 2, got {m}")));
            }
        }
        if let Some(q) = self.quantile_level {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Config(format!("quantile level must lie in (0, 1), got {q}")));
            }
        }
        if let Some(a) = self.renyi_alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Config(format!("Rényi order must lie in (0, 1), got {a}")));
        }
        Ok(())
    }
}

/// How a Rényi entry was estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenyiMethod {
    /// `{0,1}`-valued preferences on a tie-free batch.
    Binary,
    /// Fractional preferences, batch-means standard errors.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenyiEntry {
    pub alpha: f64,
    pub method: RenyiMethod,
    pub prev: Divergence,
    pub next: Divergence,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundChecks {
    pub improvement: CheckOutcome,
    pub strict_increase: CheckOutcome,
    pub quantile_decrease: CheckOutcome,
    /// `Q̂_next ≤ Q̂_prev` at band tolerance, regardless of `Δ̂`.
    pub quantile_non_increasing: CheckOutcome,
    pub quantile_bound: CheckOutcome,
    /// Skipped for rules without a closed-form decrease.
    pub igo_delta: CheckOutcome,
    pub kl_decrease: CheckOutcome,
}

impl BoundChecks {
    pub const NAMES: [&'static str; 7] = [
        "improvement",
        "strict_increase",
        "quantile_decrease",
        "quantile_non_increasing",
        "quantile_bound",
        "igo_delta",
        "kl_decrease",
    ];

    pub fn named(&self) -> [(&'static str, CheckOutcome); 7] {
        let outcomes = [
            self.improvement,
            self.strict_increase,
            self.quantile_decrease,
            self.quantile_non_increasing,
            self.quantile_bound,
            self.igo_delta,
            self.kl_decrease,
        ];
        std::array::from_fn(|i| (Self::NAMES[i], outcomes[i]))
    }
}

/// Diagnostics of one step `θ_k → θ_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: u64,
    pub z_w: f64,
    pub quantile_level: f64,
    pub j_hat: Estimate,
    pub q_hat_prev: QuantileEstimate,
    pub q_hat_next: QuantileEstimate,
    pub kl_target_prev: Divergence,
    pub kl_target_next: Divergence,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub renyi_target: Vec<RenyiEntry>,
    /// Absent when either KL is infinite.
    pub delta_hat: Option<Estimate>,
    pub delta_pred: Option<f64>,
    pub quantile_bound_rhs: Option<f64>,
    pub quantile_linearized: Option<f64>,
    pub bound_checks: BoundChecks,
}

/// Runs every estimator and check for the step `cur → next` taken at
/// `iteration` of the run seeded with `seed`.
pub fn diagnose(
    iteration: u64,
    seed: u64,
    cur: &ProposalParams,
    next: &ProposalParams,
    obj: &Objective,
    step: &StepConfig,
    cfg: &DiagnosticsConfig,
) -> Result<IterationReport> {
    cfg.validate()?;
    let w = &step.weight_fn;
    let m = cfg.batch_size_for(step);
    let q = cfg.level_for(w);
    let z_w = w.mass();

    let target =
        SampleBatch::draw(cur, obj, w, step.tie_mode, StreamKey::new(seed, iteration, Purpose::Target), m)?;
    let ts = TargetSample::new(&target)?;
    let lp_next = log_densities(next, &target.points);
    let kl_prev = kl_from_sample(&ts, &ts.lp_cur)?;
    let kl_next = kl_from_sample(&ts, &lp_next)?;
    let delta_hat = match (kl_prev.finite(), kl_next.finite()) {
        (Some(a), Some(b)) => Some(Estimate { value: a.value - b.value, stderr: delta_se(&ts, &ts.lp_cur, &lp_next)? }),
        _ => None,
    };

    let binary = w.is_binary() && !ts.ties;
    let renyi_target = cfg
        .renyi_alphas
        .iter()
        .map(|&alpha| {
            let (method, est): (RenyiMethod, RenyiFromSample) = if binary {
                (RenyiMethod::Binary, renyi_binary_from_sample)
            } else {
                (RenyiMethod::General, renyi_general_from_sample)
            };
            Ok(RenyiEntry { alpha, method, prev: est(&ts, &ts.lp_cur, alpha)?, next: est(&ts, &lp_next, alpha)? })
        })
        .collect::<Result<Vec<_>>>()?;

    let js = sample_j(next, cur, obj, w, m, seed, iteration)?;
    let q_hat_prev = quantile_estimate(&sorted_copy(&target.f_values), q);
    let q_hat_next = quantile_estimate(&js.next_sorted, q);

    let chain = check_improvement_bound(js.estimate, delta_hat, &q_hat_prev, &q_hat_next, z_w);
    let qb = quantile_bound_check(&js.next_sorted, &q_hat_next, &q_hat_prev, delta_hat, q, js.ties || ts.ties);
    let delta_pred = match step.rule {
        Rule::IgoNg | Rule::IgoMl => Some(predicted_delta(cur, next, step.step_size, z_w, step.rule)?),
        Rule::MixtureMl | Rule::StudentMl => None,
    };
    let igo_delta = match delta_pred {
        Some(p) => check_igo_delta_formula(delta_hat, p),
        None => CheckOutcome::skipped(),
    };

    Ok(IterationReport {
        iteration,
        z_w,
        quantile_level: q,
        j_hat: js.estimate,
        q_hat_prev,
        q_hat_next,
        kl_target_prev: kl_prev,
        kl_target_next: kl_next,
        renyi_target,
        delta_hat,
        delta_pred,
        quantile_bound_rhs: qb.rhs,
        quantile_linearized: qb.linearized,
        bound_checks: BoundChecks {
            improvement: chain.improvement,
            strict_increase: chain.strict_increase,
            quantile_decrease: chain.quantile_decrease,
            quantile_non_increasing: quantile_not_above(&q_hat_next, &q_hat_prev),
            quantile_bound: qb.outcome,
            igo_delta,
            kl_decrease: check_kl_decrease(delta_hat),
        },
    })
}
