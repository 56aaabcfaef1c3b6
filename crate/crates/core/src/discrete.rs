//! Enumerable bit-vector search spaces for exact computation.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::objective::{DomainKind, Objective};
use crate::proposals::ProposalParams;
use crate::weighting::QuantilePair;

/// Largest enumerable dimension (`2^20` points).
pub const MAX_DISCRETE_DIM: usize = 20;

/// The cube `{0, 1}^d`, enumerated with coordinate `i` as bit `i` of the index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscreteModel {
    dim: usize,
}

impl DiscreteModel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DISCRETE_DIM {
            return Err(Error::Unsupported(format!("cannot enumerate {{0,1}}^{dim}; need 1 ≤ d ≤ {MAX_DISCRETE_DIM}")));
        }
        Ok(Self { dim })
    }

    /// Model for an objective, if its domain is enumerable.
    pub fn for_objective(obj: &Objective) -> Result<Self> {
        match obj.domain() {
            DomainKind::Bits(d) => Self::new(d),
            DomainKind::Continuous(_) => Err(Error::Unsupported(format!("objective '{}' is continuous", obj.name()))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        1 << self.dim
    }

    pub fn point(&self, index: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| ((index >> i) & 1) as f64)
    }

    pub fn points(&self) -> Vec<DVector<f64>> {
        (0..self.size()).map(|i| self.point(i)).collect()
    }

    /// Exact probability of every point under a Bernoulli-product proposal.
    pub fn probabilities(&self, params: &ProposalParams) -> Result<Vec<f64>> {
        let ProposalParams::Bernoulli(b) = params else {
            return Err(Error::Unsupported(format!("exact enumeration needs a Bernoulli proposal, got {}", params.family())));
        };
        if b.dim() != self.dim {
            return Err(Error::Domain("proposal dimension does not match the model".into()));
        }
        let p = b.probs();
        Ok((0..self.size())
            .map(|idx| (0..self.dim).map(|i| if (idx >> i) & 1 == 1 { p[i] } else { 1.0 - p[i] }).product())
            .collect())
    }
}

/// Exact `(P[f(X) < f(x)], P[f(X) ≤ f(x)])` under `params`.
pub fn exact_quantile_pair(
    model: &DiscreteModel,
    obj: &Objective,
    params: &ProposalParams,
    x: &DVector<f64>,
) -> Result<QuantilePair> {
    let probs = model.probabilities(params)?;
    let fx = obj.eval(x);
    let mut lt = 0.0;
    let mut eq = 0.0;
    for (idx, p) in probs.iter().enumerate() {
        let f = obj.eval(&model.point(idx));
        if f < fx {
            lt += p;
        } else if f == fx {
            eq += p;
        }
    }
    let q_lt = lt.min(1.0);
    QuantilePair::new(q_lt, (lt + eq).min(1.0).max(q_lt))
}
