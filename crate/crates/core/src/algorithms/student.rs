//! Heavy-tail ML update of a Student proposal with fixed `ν`.

use crate::batch::SampleBatch;
use crate::error::Result;
use crate::proposals::StudentParams;
use crate::ranking::pairwise_sum;

use super::{step_failure, weighted_moments, SigmaVariant};

/// `μ ← Ê_π[γX]/Ê_π[γ]`; the scale follows `variant`. Both variants are
/// computed from the centered scatter `S = Σ ŵγ(x − μ)(x − μ)ᵀ`:
/// `PaperEq` gives `S/Σŵγ`, `ProofExact` gives `S/Σŵ`.
pub fn student_ml_step(st: &StudentParams, batch: &SampleBatch, variant: SigmaVariant) -> Result<StudentParams> {
    let v: Vec<f64> = batch
        .points
        .iter()
        .zip(&batch.rank_weights)
        .map(|(x, &w)| if w > 0.0 { w * st.gamma_factor(x) } else { 0.0 })
        .collect();
    let m = weighted_moments(&batch.points, &v)?;
    let denom = match variant {
        SigmaVariant::PaperEq => m.total,
        SigmaVariant::ProofExact => {
            let w: Vec<f64> = batch.rank_weights.iter().copied().filter(|&w| w > 0.0).collect();
            pairwise_sum(&w)
        }
    };
    StudentParams::new(m.mean, m.scatter / denom, st.dof()).map_err(step_failure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proposals::ProposalParams;
    use crate::ranking::TieMode;
    use crate::weighting::WeightFn;
    use nalgebra::{DMatrix, DVector};

    fn batch(points: &[f64], weights: Vec<f64>, origin: &StudentParams) -> SampleBatch {
        SampleBatch {
            points: points.iter().map(|&p| DVector::from_element(1, p)).collect(),
            f_values: points.to_vec(),
            rank_weights: weights,
            weight_fn: WeightFn::indicator(0.5).unwrap(),
            tie_mode: TieMode::Strict,
            origin_params: ProposalParams::Student(origin.clone()),
            seed_tag: 0,
        }
    }

    #[test]
    fn symmetric_pair() {
        let st = StudentParams::new(DVector::zeros(1), DMatrix::identity(1, 1), 3.0).unwrap();
        let b = batch(&[-1.0, 1.0, 5.0], vec![0.25, 0.25, 0.0], &st);
        let next = student_ml_step(&st, &b, SigmaVariant::PaperEq).unwrap();
        assert_eq!(next.location()[0], 0.0);
        assert!((next.scale()[(0, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(next.dof(), 3.0);
        // γ(±1) = 1, so Ê_π[γ] = 1 and both variants coincide.
        let exact = student_ml_step(&st, &b, SigmaVariant::ProofExact).unwrap();
        assert!((exact.scale()[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_points_give_that_location() {
        let st = StudentParams::new(DVector::zeros(2), DMatrix::identity(2, 2), 1.0).unwrap();
        let x0 = DVector::from_vec(vec![1.5, -0.5]);
        let b = SampleBatch {
            points: vec![x0.clone(); 4],
            f_values: vec![0.0; 4],
            rank_weights: vec![0.25; 4],
            weight_fn: WeightFn::indicator(0.5).unwrap(),
            tie_mode: TieMode::Strict,
            origin_params: ProposalParams::Student(st.clone()),
            seed_tag: 0,
        };
        // The scatter is zero, so the scale update cannot factor.
        assert!(student_ml_step(&st, &b, SigmaVariant::PaperEq).is_err());
        let m = weighted_moments(&b.points, &[0.25; 4]).unwrap();
        assert_eq!(m.mean, x0);
    }
}
