use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{factor_spd, SpdFactor};
use crate::error::{Error, Result};

/// Multivariate normal `N(μ, Σ)` with a cached Cholesky factor.
#[derive(Clone, Debug)]
pub struct GaussianParams {
    mean: DVector<f64>,
    cov: SpdFactor,
}

impl PartialEq for GaussianParams {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov.matrix == other.cov.matrix
    }
}

impl GaussianParams {
    /// Builds the record, repairing `Σ` with jitter if it does not factor.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::Domain(format!(
                "mean has length {} but covariance is {}×{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite mean".into()));
        }
        let cov = factor_spd(&cov, "gaussian covariance")?;
        Ok(Self { mean, cov })
    }

    pub fn isotropic(mean: DVector<f64>, variance: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, DMatrix::identity(d, d) * variance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov.matrix
    }

    pub fn chol_lower(&self) -> &DMatrix<f64> {
        &self.cov.lower
    }

    pub fn log_det(&self) -> f64 {
        self.cov.log_det
    }

    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> f64 {
        self.cov.mahalanobis_sq(&(x - &self.mean))
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let d = self.dim() as f64;
        -0.5 * (d * (2.0 * PI).ln() + self.cov.log_det + self.mahalanobis_sq(x))
    }

    /// `μ + L·z` with `z` standard normal.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.cov.lower * z
    }

    /// Closed-form `KL(self ‖ other)`.
    pub fn kl_to(&self, other: &GaussianParams) -> Result<f64> {
        gaussian_kl(self, other)
    }
}

/// `½[tr(Σ₂⁻¹Σ₁) + (μ₂−μ₁)ᵀΣ₂⁻¹(μ₂−μ₁) − d + ln(det Σ₂ / det Σ₁)]`.
pub fn gaussian_kl(p1: &GaussianParams, p2: &GaussianParams) -> Result<f64> {
    if p1.dim() != p2.dim() {
        return Err(Error::Domain("gaussian_kl: dimension mismatch".into()));
    }
    let d = p1.dim() as f64;
    // tr(Σ₂⁻¹Σ₁) = ‖L₂⁻¹ L₁‖²_F
    let m = p2
        .cov
        .lower
        .solve_lower_triangular(&p1.cov.lower)
        .ok_or_else(|| Error::Factorization("gaussian_kl: singular second covariance".into()))?;
    let trace = m.norm_squared();
    let maha = p2.mahalanobis_sq(&p1.mean);
    let kl = 0.5 * (trace + maha - d + p2.log_det() - p1.log_det());
    Ok(kl.max(0.0))
}
