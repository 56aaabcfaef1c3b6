use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};

/// Independent Bernoulli coordinates over `{0, 1}^d`.
///
/// Probabilities are clamped to `[p_min, 1 − p_min]` with
/// `p_min = min(1/d², 1/4)` so that no coordinate becomes absorbing.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliParams {
    probs: DVector<f64>,
}

pub fn default_p_min(d: usize) -> f64 {
    (1.0 / (d as f64 * d as f64)).min(0.25)
}

impl BernoulliParams {
    pub fn new(probs: DVector<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("Bernoulli vector must be non-empty".into()));
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("non-finite Bernoulli probability".into()));
        }
        let p_min = default_p_min(probs.len());
        Ok(Self { probs: probs.map(|p| p.clamp(p_min, 1.0 - p_min)) })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(DVector::from_element(d, 0.5))
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &DVector<f64> {
        &self.probs
    }

    /// Log mass of a bit vector (coordinates above ½ count as 1).
    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        self.probs
            .iter()
            .zip(x.iter())
            .map(|(&p, &xi)| if xi > 0.5 { p.ln() } else { (1.0 - p).ln() })
            .sum()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        self.probs.map(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
    }

    /// Exact `KL(self ‖ other)` as a sum over coordinates.
    pub fn kl_to(&self, other: &BernoulliParams) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Domain("Bernoulli KL: dimension mismatch".into()));
        }
        let kl = self
            .probs
            .iter()
            .zip(other.probs.iter())
            .map(|(&p, &q)| p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln())
            .sum::<f64>();
        Ok(kl.max(0.0))
    }
}
