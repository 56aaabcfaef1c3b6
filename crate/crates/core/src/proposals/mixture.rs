use nalgebra::DVector;
use rand::Rng;

use super::gaussian::GaussianParams;
use crate::error::{Error, Result};

/// Finite Gaussian mixture `Σ_j λ_j N(μ_j, Σ_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureParams {
    weights: Vec<f64>,
    components: Vec<GaussianParams>,
}

impl MixtureParams {
    /// Weights are renormalized when they miss a unit sum by more than 1e-12.
    pub fn new(weights: Vec<f64>, components: Vec<GaussianParams>) -> Result<Self> {
        if components.is_empty() || weights.len() != components.len() {
            return Err(Error::Domain("mixture needs J ≥ 1 components and one weight per component".into()));
        }
        let d = components[0].dim();
        if components.iter().any(|c| c.dim() != d) {
            return Err(Error::Domain("mixture components differ in dimension".into()));
        }
        if weights.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return Err(Error::Domain("mixture weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("mixture weights sum to zero".into()));
        }
        let weights = if (total - 1.0).abs() > 1e-12 {
            weights.iter().map(|l| l / total).collect()
        } else {
            weights
        };
        Ok(Self { weights, components })
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianParams] {
        &self.components
    }

    /// `ln λ_j + ln p_j(x)` for every component.
    fn joint_log_terms(&self, x: &DVector<f64>) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(&l, c)| if l > 0.0 { l.ln() + c.log_density(x) } else { f64::NEG_INFINITY })
            .collect()
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        log_sum_exp(&self.joint_log_terms(x))
    }

    /// Posterior component probabilities `ρ_j(x)`, computed in log space.
    pub fn responsibilities(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        let terms = self.joint_log_terms(x);
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::DegeneratePoint);
        }
        let exps: Vec<f64> = terms.iter().map(|t| (t - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / total).collect())
    }

    /// Picks a component by inverse-CDF on the weights; zero-weight
    /// components are never selected.
    pub fn draw_component<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (j, &l) in self.weights.iter().enumerate() {
            if l > 0.0 {
                acc += l;
                last_positive = j;
                if u < acc {
                    return j;
                }
            }
        }
        last_positive
    }

    pub fn draw_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, DVector<f64>) {
        let j = self.draw_component(rng);
        (j, self.components[j].draw(rng))
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(mu: f64) -> GaussianParams {
        GaussianParams::new(DVector::from_element(1, mu), DMatrix::identity(1, 1)).unwrap()
    }

    #[test]
    fn identical_components_give_prior_responsibilities() {
        let m = MixtureParams::new(vec![0.3, 0.7], vec![unit(1.0), unit(1.0)]).unwrap();
        for x in [-3.0, 0.0, 5.0] {
            let r = m.responsibilities(&DVector::from_element(1, x)).unwrap();
            assert!((r[0] - 0.3).abs() < 1e-15 && (r[1] - 0.7).abs() < 1e-15);
        }
        let x = DVector::from_element(1, 0.4);
        assert!((m.log_density(&x) - unit(1.0).log_density(&x)).abs() < 1e-14);
    }

    #[test]
    fn single_and_symmetric_mixtures() {
        let one = MixtureParams::new(vec![1.0], vec![unit(2.0)]).unwrap();
        assert_eq!(one.responsibilities(&DVector::from_element(1, 9.0)).unwrap(), vec![1.0]);
        let sym = MixtureParams::new(vec![0.5, 0.5], vec![unit(-1.5), unit(1.5)]).unwrap();
        let r = sym.responsibilities(&DVector::zeros(1)).unwrap();
        assert_eq!(r, vec![0.5, 0.5]);
    }

    #[test]
    fn far_tail_does_not_underflow() {
        let m = MixtureParams::new(vec![0.5, 0.5], vec![unit(-1.0), unit(1.0)]).unwrap();
        let r = m.responsibilities(&DVector::from_element(1, 60.0)).unwrap();
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r[1] > 0.999);
    }

    #[test]
    fn degenerate_weights_pick_first_component() {
        let m = MixtureParams::new(vec![1.0, 0.0], vec![unit(0.0), unit(100.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| m.draw_component(&mut rng) == 0));
    }

    #[test]
    fn renormalizes_weights() {
        let m = MixtureParams::new(vec![2.0, 2.0], vec![unit(0.0), unit(1.0)]).unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert!(MixtureParams::new(vec![0.0, 0.0], vec![unit(0.0), unit(1.0)]).is_err());
    }
}
