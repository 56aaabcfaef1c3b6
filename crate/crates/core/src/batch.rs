//! Weighted samples from a proposal.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::proposals::{sample, ProposalParams};
use crate::ranking::{pairwise_reduce, pairwise_sum, rank_preferences, rank_weights, TieMode};
use crate::rng::StreamKey;
use crate::weighting::WeightFn;

/// `N` points drawn from `origin_params` with their objective values and
/// rank weights.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub points: Vec<DVector<f64>>,
    pub f_values: Vec<f64>,
    pub rank_weights: Vec<f64>,
    pub weight_fn: WeightFn,
    pub tie_mode: TieMode,
    pub origin_params: ProposalParams,
    pub seed_tag: u64,
}

impl SampleBatch {
    /// Assembles a batch and computes its rank weights.
    pub fn from_parts(
        points: Vec<DVector<f64>>,
        f_values: Vec<f64>,
        weight_fn: &WeightFn,
        tie_mode: TieMode,
        origin_params: ProposalParams,
        seed_tag: u64,
    ) -> Result<Self> {
        if points.len() != f_values.len() {
            return Err(Error::Domain("points and f-values differ in length".into()));
        }
        let rank_weights = rank_weights(&f_values, weight_fn, tie_mode)?;
        Ok(Self { points, f_values, rank_weights, weight_fn: weight_fn.clone(), tie_mode, origin_params, seed_tag })
    }

    /// Samples `n` points from `params` on stream `key` and evaluates `obj`.
    pub fn draw(
        params: &ProposalParams,
        obj: &Objective,
        weight_fn: &WeightFn,
        tie_mode: TieMode,
        key: StreamKey,
        n: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("batch size must be positive".into()));
        }
        if params.dim() != obj.dim() {
            return Err(Error::Config(format!(
                "proposal dimension {} does not match objective dimension {}",
                params.dim(),
                obj.dim()
            )));
        }
        let points = sample(params, key, n);
        let f_values = obj.eval_batch(&points);
        Self::from_parts(points, f_values, weight_fn, tie_mode, params.clone(), key.run_seed)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&self.rank_weights)
    }

    /// `Ŵ_n = N·ŵ_n`, the empirical preference value of each point.
    pub fn preference_values(&self) -> Vec<f64> {
        rank_preferences(&self.f_values, &self.weight_fn, self.tie_mode).expect("validated at construction")
    }
}

/// `Σ ŵ_n h(x_n) / Σ ŵ_n` for vector-valued `h`.
pub fn weighted_expectation<H>(batch: &SampleBatch, h: H) -> Result<DVector<f64>>
where
    H: Fn(&DVector<f64>) -> DVector<f64>,
{
    let live: Vec<(&DVector<f64>, f64)> =
        batch.points.iter().zip(&batch.rank_weights).filter(|(_, &w)| w > 0.0).map(|(x, &w)| (x, w)).collect();
    let total = pairwise_sum(&live.iter().map(|(_, w)| *w).collect::<Vec<_>>());
    if total <= 0.0 {
        return Err(Error::DegenerateBatch);
    }
    let terms: Vec<DVector<f64>> = live.into_iter().map(|(x, w)| h(x) * w).collect();
    let sum = pairwise_reduce(terms, |a, b| a + b).ok_or(Error::DegenerateBatch)?;
    Ok(sum / total)
}

/// Scalar version of [`weighted_expectation`] over precomputed values.
pub fn weighted_mean(weights: &[f64], values: &[f64]) -> Result<f64> {
    let (w, t): (Vec<f64>, Vec<f64>) =
        weights.iter().zip(values).filter(|(w, _)| **w > 0.0).map(|(w, v)| (*w, w * v)).unzip();
    let total = pairwise_sum(&w);
    if total <= 0.0 {
        return Err(Error::DegenerateBatch);
    }
    Ok(pairwise_sum(&t) / total)
}
