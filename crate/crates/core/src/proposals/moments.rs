use nalgebra::{DMatrix, DVector};

use super::{BernoulliParams, GaussianParams, ProposalParams};
use crate::error::{Error, Result};

/// Expectation parameters `η = E[Γ(X)]` of an exponential family.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentParams {
    /// `(E[X], E[XXᵀ])`.
    Gaussian { mean: DVector<f64>, second: DMatrix<f64> },
    /// `E[X] = p`.
    Bernoulli { mean: DVector<f64> },
}

pub fn moment_embed(params: &ProposalParams) -> Result<MomentParams> {
    match params {
        ProposalParams::Gaussian(g) => Ok(MomentParams::Gaussian {
            mean: g.mean().clone(),
            second: g.cov() + g.mean() * g.mean().transpose(),
        }),
        ProposalParams::Bernoulli(b) => Ok(MomentParams::Bernoulli { mean: b.probs().clone() }),
        other => Err(Error::Unsupported(format!("{} is not an exponential family with moment coordinates", other.family()))),
    }
}

/// Inverse of [`moment_embed`]; the covariance gap `E[XXᵀ] − μμᵀ` goes
/// through the jitter repair.
pub fn moment_unembed(eta: &MomentParams) -> Result<ProposalParams> {
    match eta {
        MomentParams::Gaussian { mean, second } => {
            let cov = second - mean * mean.transpose();
            Ok(ProposalParams::Gaussian(GaussianParams::new(mean.clone(), cov)?))
        }
        MomentParams::Bernoulli { mean } => Ok(ProposalParams::Bernoulli(BernoulliParams::new(mean.clone())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn embed_examples() {
        let p = ProposalParams::Gaussian(GaussianParams::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap());
        assert_eq!(
            moment_embed(&p).unwrap(),
            MomentParams::Gaussian { mean: DVector::zeros(2), second: DMatrix::identity(2, 2) }
        );
        let p = ProposalParams::Gaussian(
            GaussianParams::new(DVector::from_element(1, 2.0), DMatrix::from_element(1, 1, 3.0)).unwrap(),
        );
        match moment_embed(&p).unwrap() {
            MomentParams::Gaussian { mean, second } => {
                assert_eq!(mean[0], 2.0);
                assert_eq!(second[(0, 0)], 7.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn non_exponential_families_are_rejected() {
        let s = ProposalParams::Student(
            crate::proposals::StudentParams::new(DVector::zeros(1), DMatrix::identity(1, 1), 2.0).unwrap(),
        );
        assert!(matches!(moment_embed(&s), Err(Error::Unsupported(_))));
    }

    proptest! {
        #[test]
        fn gaussian_round_trip(mu in proptest::collection::vec(-5.0..5.0f64, 3), a in proptest::collection::vec(-1.0..1.0f64, 9)) {
            let a = DMatrix::from_vec(3, 3, a);
            let cov = &a * a.transpose() + DMatrix::identity(3, 3) * 0.5;
            let p = ProposalParams::Gaussian(GaussianParams::new(DVector::from_vec(mu), cov).unwrap());
            let back = moment_unembed(&moment_embed(&p).unwrap()).unwrap();
            let (ProposalParams::Gaussian(x), ProposalParams::Gaussian(y)) = (&p, &back) else { unreachable!() };
            prop_assert!((x.mean() - y.mean()).amax() < 1e-12);
            prop_assert!((x.cov() - y.cov()).amax() < 1e-12 * (1.0 + x.mean().norm_squared()));
        }

        #[test]
        fn bernoulli_round_trip(p in proptest::collection::vec(0.1..0.9f64, 4)) {
            let b = ProposalParams::Bernoulli(BernoulliParams::new(DVector::from_vec(p)).unwrap());
            prop_assert_eq!(moment_unembed(&moment_embed(&b).unwrap()).unwrap(), b);
        }
    }
}
