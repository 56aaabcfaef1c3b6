use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative jitter schedule: `ε = c·tr(Σ)/d` for `c = 1e-10, 1e-9, …, 1e-4`.
const JITTER_START: f64 = 1e-10;
const JITTER_STOP: f64 = 1e-4;

/// A symmetric positive-definite matrix together with its lower Cholesky factor.
#[derive(Clone, Debug)]
pub(crate) struct SpdFactor {
    pub matrix: DMatrix<f64>,
    pub lower: DMatrix<f64>,
    pub log_det: f64,
}

fn try_cholesky(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = m.clone().cholesky()?;
    let l = chol.l();
    if l.diagonal().iter().all(|&v| v.is_finite() && v > 0.0) {
        Some(l)
    } else {
        None
    }
}

/// Symmetrizes `m` and factors it. If the plain factorization fails, `εI` is
/// added with ε escalating by ×10 from `1e-10·tr/d` to `1e-4·tr/d`.
pub(crate) fn factor_spd(m: &DMatrix<f64>, what: &str) -> Result<SpdFactor> {
    let d = m.nrows();
    if d == 0 || m.ncols() != d {
        return Err(Error::Factorization(format!("{what}: matrix must be square and non-empty")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Factorization(format!("{what}: non-finite entries")));
    }
    let sym = (m + m.transpose()) * 0.5;
    let finish = |matrix: DMatrix<f64>, lower: DMatrix<f64>| {
        let log_det = 2.0 * lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        SpdFactor { matrix, lower, log_det }
    };
    if let Some(l) = try_cholesky(&sym) {
        return Ok(finish(sym, l));
    }
    let scale = sym.trace() / d as f64;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Factorization(format!("{what}: non-positive trace, cannot repair")));
    }
    let mut c = JITTER_START;
    while c <= JITTER_STOP * (1.0 + 1e-9) {
        let repaired = &sym + DMatrix::<f64>::identity(d, d) * (c * scale);
        if let Some(l) = try_cholesky(&repaired) {
            return Ok(finish(repaired, l));
        }
        c *= 10.0;
    }
    Err(Error::Factorization(format!("{what}: not positive definite after jitter escalation")))
}

impl SpdFactor {
    /// `(x − μ)ᵀ Σ⁻¹ (x − μ)` given the centered vector.
    pub fn mahalanobis_sq(&self, centered: &DVector<f64>) -> f64 {
        let y = self
            .lower
            .solve_lower_triangular(centered)
            .expect("Cholesky factor has a positive diagonal");
        y.norm_squared()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_factorization_keeps_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = factor_spd(&m, "test").unwrap();
        assert_eq!(f.matrix, m);
        assert!((f.log_det - (2.0f64 - 0.25).ln()).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_matrix_is_repaired() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = factor_spd(&m, "test").unwrap();
        assert!(f.matrix[(0, 0)] > 1.0);
        assert!(f.matrix[(0, 0)] - 1.0 <= 1e-4 + 1e-12);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(factor_spd(&m, "test"), Err(Error::Factorization(_))));
        let z = DMatrix::<f64>::zeros(2, 2);
        assert!(matches!(factor_spd(&z, "test"), Err(Error::Factorization(_))));
    }
}
