//! Proposal-update rules and the outer optimization loop.

mod exponential;
mod mixture;
mod optimize;
mod student;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::proposals::ProposalParams;
use crate::ranking::{pairwise_reduce, pairwise_sum, TieMode};
use crate::weighting::WeightFn;

pub use exponential::{exponential_blend, igo_ml_step, igo_ng_step, ml_coefficient, ng_coefficient};
pub use mixture::{mixture_ml_step, mixture_ml_step_latent, LAMBDA_MIN};
pub use optimize::{optimize, optimize_with, Trajectory};
pub use student::student_ml_step;

/// Which update rule a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    IgoNg,
    IgoMl,
    MixtureMl,
    StudentMl,
}

/// Scale update of the Student rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaVariant {
    /// `Σ = Ê[γXXᵀ]/Ê[γ] − μμᵀ`.
    #[default]
    PaperEq,
    /// `Σ = Ê[γ(X − μ)(X − μ)ᵀ]`.
    ProofExact,
}

/// Everything a single update needs besides the parameters and the batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub rule: Rule,
    pub step_size: f64,
    pub weight_fn: WeightFn,
    pub batch_size: usize,
    #[serde(default)]
    pub sigma_variant: SigmaVariant,
    #[serde(default)]
    pub tie_mode: TieMode,
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::Config(format!("batch size must be at least 2, got {}", self.batch_size)));
        }
        let tau = self.step_size;
        match self.rule {
            Rule::IgoNg => {
                if !(tau > 0.0) {
                    return Err(Error::Config(format!("igo_ng needs τ > 0, got {tau}")));
                }
                ng_coefficient(tau, self.weight_fn.mass())?;
            }
            Rule::IgoMl => {
                if !(tau > 0.0 && tau <= 1.0) {
                    return Err(Error::Config(format!("igo_ml needs τ in (0, 1], got {tau}")));
                }
            }
            Rule::MixtureMl | Rule::StudentMl => {}
        }
        Ok(())
    }

    /// Checks that the proposal family suits the rule.
    pub fn check_family(&self, params: &ProposalParams) -> Result<()> {
        let ok = match self.rule {
            Rule::IgoNg | Rule::IgoMl => matches!(params, ProposalParams::Gaussian(_) | ProposalParams::Bernoulli(_)),
            Rule::MixtureMl => matches!(params, ProposalParams::Mixture(_)),
            Rule::StudentMl => matches!(params, ProposalParams::Student(_)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("rule {:?} cannot update a {} proposal", self.rule, params.family())))
        }
    }
}

/// Applies the configured rule to one batch.
pub fn step(params: &ProposalParams, batch: &SampleBatch, cfg: &StepConfig) -> Result<ProposalParams> {
    cfg.check_family(params)?;
    let z_w = cfg.weight_fn.mass();
    match (cfg.rule, params) {
        (Rule::IgoNg, _) => igo_ng_step(params, batch, cfg.step_size, z_w),
        (Rule::IgoMl, _) => igo_ml_step(params, batch, cfg.step_size, z_w),
        (Rule::MixtureMl, ProposalParams::Mixture(m)) => Ok(ProposalParams::Mixture(mixture_ml_step(m, batch)?)),
        (Rule::StudentMl, ProposalParams::Student(s)) => {
            Ok(ProposalParams::Student(student_ml_step(s, batch, cfg.sigma_variant)?))
        }
        _ => unreachable!("family checked above"),
    }
}

/// Weighted mean and scatter `Σ v_n (x_n − μ)(x_n − μ)ᵀ` over points with
/// positive weight, plus the weight total. Sums are pairwise.
pub(crate) struct WeightedMoments {
    pub mean: DVector<f64>,
    pub scatter: DMatrix<f64>,
    pub total: f64,
}

pub(crate) fn weighted_moments(points: &[DVector<f64>], weights: &[f64]) -> Result<WeightedMoments> {
    let live: Vec<(&DVector<f64>, f64)> =
        points.iter().zip(weights).filter(|(_, &v)| v > 0.0).map(|(x, &v)| (x, v)).collect();
    let total = pairwise_sum(&live.iter().map(|(_, v)| *v).collect::<Vec<_>>());
    if live.is_empty() || !(total > 0.0) {
        return Err(Error::DegenerateBatch);
    }
    let sum = pairwise_reduce(live.iter().map(|(x, v)| *x * *v).collect(), |a, b| a + b).expect("non-empty");
    let mean = sum / total;
    let scatter = pairwise_reduce(
        live.iter()
            .map(|(x, v)| {
                let c = *x - &mean;
                (&c * c.transpose()) * *v
            })
            .collect(),
        |a, b| a + b,
    )
    .expect("non-empty");
    Ok(WeightedMoments { mean, scatter, total })
}

pub(crate) fn step_failure(e: Error) -> Error {
    match e {
        Error::Factorization(msg) | Error::Domain(msg) => Error::StepFailure(msg),
        other => other,
    }
}
