//! IGO updates for exponential families, written as convex combinations of
//! moment parameters.

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::proposals::{BernoulliParams, GaussianParams, ProposalParams};

use super::{step_failure, weighted_moments};

/// Products `τ·Z_w` within this many ulps of 1 are treated as exactly 1.
const SNAP_ULPS: f64 = 4.0;

/// Blend coefficient `c = τZ_w` of the natural-gradient rule.
pub fn ng_coefficient(tau: f64, z_w: f64) -> Result<f64> {
    let c = tau * z_w;
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Config(format!("invalid step τ·Z_w = {c}")));
    }
    if (c - 1.0).abs() <= SNAP_ULPS * f64::EPSILON {
        return Ok(1.0);
    }
    if c > 1.0 {
        return Err(Error::Config(format!("igo_ng needs τ·Z_w ≤ 1, got {c}")));
    }
    Ok(c)
}

/// Blend coefficient `τZ_w / ((1 − τ) + τZ_w)` of the IGO-ML rule.
pub fn ml_coefficient(tau: f64, z_w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("igo_ml needs τ in (0, 1], got {tau}")));
    }
    if tau == 1.0 {
        return Ok(1.0);
    }
    Ok(tau * z_w / ((1.0 - tau) + tau * z_w))
}

/// Moves `params` a fraction `c ∈ [0, 1]` of the way, in moment coordinates,
/// toward the weighted-ML fit of `batch`.
///
/// For Gaussians the second moment is blended in centered form
/// `Σ = (1−c)Σ_k + cΣ̂ + c(1−c)(μ_k − μ̂)(μ_k − μ̂)ᵀ`, which equals
/// `E[XXᵀ] − μμᵀ` of the blended moments without the cancellation.
pub fn exponential_blend(params: &ProposalParams, batch: &SampleBatch, c: f64) -> Result<ProposalParams> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Config(format!("blend coefficient {c} outside [0, 1]")));
    }
    if c == 0.0 {
        return Ok(params.clone());
    }
    match params {
        ProposalParams::Gaussian(g) => {
            let m = weighted_moments(&batch.points, &batch.rank_weights)?;
            let cov_hat = m.scatter / m.total;
            if c == 1.0 {
                return GaussianParams::new(m.mean, cov_hat).map(ProposalParams::Gaussian).map_err(step_failure);
            }
            let diff = g.mean() - &m.mean;
            let mean = g.mean() * (1.0 - c) + &m.mean * c;
            let cov = g.cov() * (1.0 - c) + cov_hat * c + (&diff * diff.transpose()) * (c * (1.0 - c));
            GaussianParams::new(mean, cov).map(ProposalParams::Gaussian).map_err(step_failure)
        }
        ProposalParams::Bernoulli(b) => {
            let m = weighted_moments(&batch.points, &batch.rank_weights)?;
            let probs = if c == 1.0 { m.mean } else { b.probs() * (1.0 - c) + m.mean * c };
            BernoulliParams::new(probs).map(ProposalParams::Bernoulli).map_err(step_failure)
        }
        other => Err(Error::Unsupported(format!("IGO updates need an exponential family, got {}", other.family()))),
    }
}

/// Natural-gradient step `η ← (1 − τZ_w)η + τZ_w·η̂_π`.
pub fn igo_ng_step(params: &ProposalParams, batch: &SampleBatch, tau: f64, z_w: f64) -> Result<ProposalParams> {
    exponential_blend(params, batch, ng_coefficient(tau, z_w)?)
}

/// IGO-ML step `η ← [(1 − τ)η + τZ_w·η̂_π] / [(1 − τ) + τZ_w]`.
pub fn igo_ml_step(params: &ProposalParams, batch: &SampleBatch, tau: f64, z_w: f64) -> Result<ProposalParams> {
    exponential_blend(params, batch, ml_coefficient(tau, z_w)?)
}
