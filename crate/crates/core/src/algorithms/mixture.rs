//! Weighted-ML update of Gaussian mixtures.

use nalgebra::DVector;
use rand::Rng;

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::proposals::{GaussianParams, MixtureParams};
use crate::ranking::pairwise_sum;

use super::weighted_moments;

/// Components whose target mass `Ê_π[ρ_j]` falls below this are frozen.
pub const LAMBDA_MIN: f64 = 1e-6;

/// One update with responsibilities `ρ_j(x)`: `λ_j ← Ê_π[ρ_j]` and each
/// component refit to the `ŵ·ρ_j`-weighted sample.
pub fn mixture_ml_step(mix: &MixtureParams, batch: &SampleBatch) -> Result<MixtureParams> {
    let live = live_indices(batch)?;
    let resp = live
        .iter()
        .map(|&n| mix.responsibilities(&batch.points[n]))
        .collect::<Result<Vec<_>>>()?;
    update(mix, batch, &live, &resp)
}

/// Comparison mode: component labels are drawn from `ρ(x)` at each point and
/// used as one-hot memberships instead of `ρ`.
pub fn mixture_ml_step_latent<R: Rng + ?Sized>(
    mix: &MixtureParams,
    batch: &SampleBatch,
    rng: &mut R,
) -> Result<MixtureParams> {
    let live = live_indices(batch)?;
    let mut labels = Vec::with_capacity(live.len());
    for &n in &live {
        let rho = mix.responsibilities(&batch.points[n])?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = rho.len() - 1;
        for (j, r) in rho.iter().enumerate() {
            acc += r;
            if u < acc {
                pick = j;
                break;
            }
        }
        let mut onehot = vec![0.0; rho.len()];
        onehot[pick] = 1.0;
        labels.push(onehot);
    }
    update(mix, batch, &live, &labels)
}

fn live_indices(batch: &SampleBatch) -> Result<Vec<usize>> {
    let live: Vec<usize> = (0..batch.len()).filter(|&n| batch.rank_weights[n] > 0.0).collect();
    if live.is_empty() {
        return Err(Error::DegenerateBatch);
    }
    Ok(live)
}

fn update(mix: &MixtureParams, batch: &SampleBatch, live: &[usize], membership: &[Vec<f64>]) -> Result<MixtureParams> {
    let points: Vec<DVector<f64>> = live.iter().map(|&n| batch.points[n].clone()).collect();
    let w: Vec<f64> = live.iter().map(|&n| batch.rank_weights[n]).collect();
    let total = pairwise_sum(&w);
    let mut weights = Vec::with_capacity(mix.len());
    let mut components = Vec::with_capacity(mix.len());
    let mut active = 0;
    for (j, old) in mix.components().iter().enumerate() {
        let v: Vec<f64> = w.iter().zip(membership).map(|(wn, m)| wn * m[j]).collect();
        let lambda = pairwise_sum(&v) / total;
        let refit = if lambda >= LAMBDA_MIN {
            weighted_moments(&points, &v)
                .ok()
                .and_then(|m| GaussianParams::new(m.mean, m.scatter / m.total).ok())
        } else {
            None
        };
        match refit {
            Some(c) => {
                active += 1;
                weights.push(lambda);
                components.push(c);
            }
            None => {
                weights.push(lambda.max(LAMBDA_MIN));
                components.push(old.clone());
            }
        }
    }
    if active == 0 {
        return Err(Error::StepFailure("every mixture component is frozen".into()));
    }
    MixtureParams::new(weights, components)
}
