use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::linalg::{factor_spd, SpdFactor};
use crate::error::{Error, Result};

/// Multivariate Student distribution with fixed degrees of freedom.
#[derive(Clone, Debug)]
pub struct StudentParams {
    location: DVector<f64>,
    scale: SpdFactor,
    dof: f64,
}

impl PartialEq for StudentParams {
    fn eq(&self, other: &Self) -> bool {
        self.location == other.location && self.scale.matrix == other.scale.matrix && self.dof == other.dof
    }
}

impl StudentParams {
    pub fn new(location: DVector<f64>, scale: DMatrix<f64>, dof: f64) -> Result<Self> {
        if !(dof > 0.0 && dof.is_finite()) {
            return Err(Error::Domain(format!("degrees of freedom must be positive, got {dof}")));
        }
        if scale.nrows() != location.len() {
            return Err(Error::Domain("location/scale dimension mismatch".into()));
        }
        if location.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite location".into()));
        }
        let scale = factor_spd(&scale, "student scale")?;
        Ok(Self { location, scale, dof })
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn location(&self) -> &DVector<f64> {
        &self.location
    }

    pub fn scale(&self) -> &DMatrix<f64> {
        &self.scale.matrix
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> f64 {
        self.scale.mahalanobis_sq(&(x - &self.location))
    }

    /// Standard multivariate-t log density:
    /// `lnΓ((ν+d)/2) − lnΓ(ν/2) − (d/2)ln(νπ) − ½ln det Σ − ((ν+d)/2)·ln(1 + m/ν)`.
    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let d = self.dim() as f64;
        let nu = self.dof;
        let m = self.mahalanobis_sq(x);
        libm::lgamma(0.5 * (nu + d)) - libm::lgamma(0.5 * nu) - 0.5 * d * (nu * PI).ln() - 0.5 * self.scale.log_det
            - 0.5 * (nu + d) * (m / nu).ln_1p()
    }

    /// Latent-precision posterior mean `(ν + d)/(ν + m(x))`.
    pub fn gamma_factor(&self, x: &DVector<f64>) -> f64 {
        let d = self.dim() as f64;
        (self.dof + d) / (self.dof + self.mahalanobis_sq(x))
    }

    /// Draws `z ~ Gamma(ν/2, rate ν/2)` then `μ + L·n/√z`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let gamma = Gamma::new(0.5 * self.dof, 2.0 / self.dof).expect("positive dof");
        let z: f64 = gamma.sample(rng);
        let n = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.location + (&self.scale.lower * n) / z.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1(nu: f64) -> StudentParams {
        StudentParams::new(DVector::zeros(1), DMatrix::identity(1, 1), nu).unwrap()
    }

    #[test]
    fn cauchy_density_at_location() {
        let v = t1(1.0).log_density(&DVector::zeros(1));
        assert!((v + PI.ln()).abs() < 1e-12);
        assert!((v + 1.144_729_9).abs() < 1e-7);
    }

    #[test]
    fn gamma_factor_examples() {
        let s = t1(1.0);
        assert_eq!(s.gamma_factor(&DVector::from_element(1, 1.0)), 1.0);
        let s2 = StudentParams::new(DVector::from_vec(vec![1.0, -1.0]), DMatrix::identity(2, 2) * 3.0, 3.0).unwrap();
        assert_eq!(s2.gamma_factor(s2.location()), (3.0 + 2.0) / 3.0);
        let big = t1(1e6);
        let g = big.gamma_factor(&DVector::from_element(1, 2.0));
        assert!((g - 1.0).abs() < 1e-4);
    }

    #[test]
    fn invalid_dof_rejected() {
        assert!(StudentParams::new(DVector::zeros(1), DMatrix::identity(1, 1), 0.0).is_err());
        assert!(StudentParams::new(DVector::zeros(1), DMatrix::identity(1, 1), f64::NAN).is_err());
    }
}
