//! The outer loop: sample, rank, step, diagnose.

use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::diagnostics::{diagnose, DiagnosticsConfig, IterationReport};
use crate::error::{Error, Result};
use crate::objective::{DomainKind, Objective};
use crate::proposals::ProposalParams;
use crate::rng::{Purpose, StreamKey};

use super::{step, StepConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `θ_0, …, θ_K`; one longer than `reports` when diagnostics run.
    pub params_history: Vec<ProposalParams>,
    pub reports: Vec<IterationReport>,
    pub config: StepConfig,
    pub run_seed: u64,
    /// Message of the step or diagnostic failure that ended the run early.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

fn check_domain(initial: &ProposalParams, obj: &Objective) -> Result<()> {
    if initial.dim() != obj.dim() {
        return Err(Error::Config(format!(
            "proposal dimension {} does not match objective dimension {}",
            initial.dim(),
            obj.dim()
        )));
    }
    let discrete_obj = matches!(obj.domain(), DomainKind::Bits(_));
    if discrete_obj != initial.is_discrete() {
        return Err(Error::Config(format!("a {} proposal cannot sample the domain of {}", initial.family(), obj.name())));
    }
    Ok(())
}

/// Runs `iterations` steps from `initial`. With `diagnostics` set, each step
/// is followed by [`diagnose`]; `on_iteration` sees every new parameter
/// vector and its report as soon as they exist.
///
/// Step and diagnostic failures end the loop and are recorded in
/// [`Trajectory::failure`]; configuration errors are returned.
pub fn optimize_with<F>(
    initial: &ProposalParams,
    obj: &Objective,
    cfg: &StepConfig,
    iterations: u64,
    seed: u64,
    diagnostics: Option<&DiagnosticsConfig>,
    mut on_iteration: F,
) -> Result<Trajectory>
where
    F: FnMut(u64, &ProposalParams, Option<&IterationReport>) -> Result<()>,
{
    cfg.validate()?;
    cfg.check_family(initial)?;
    check_domain(initial, obj)?;
    if let Some(d) = diagnostics {
        d.validate()?;
    }
    let mut traj = Trajectory {
        params_history: vec![initial.clone()],
        reports: Vec::new(),
        config: cfg.clone(),
        run_seed: seed,
        failure: None,
    };
    for k in 0..iterations {
        let cur = traj.params_history.last().expect("non-empty").clone();
        let outcome = SampleBatch::draw(
            &cur,
            obj,
            &cfg.weight_fn,
            cfg.tie_mode,
            StreamKey::new(seed, k, Purpose::Step),
            cfg.batch_size,
        )
        .and_then(|batch| step(&cur, &batch, cfg))
        .and_then(|next| {
            let report = diagnostics.map(|d| diagnose(k, seed, &cur, &next, obj, cfg, d)).transpose()?;
            Ok((next, report))
        });
        match outcome {
            Ok((next, report)) => {
                on_iteration(k, &next, report.as_ref())?;
                traj.params_history.push(next);
                traj.reports.extend(report);
            }
            Err(e @ (Error::Config(_) | Error::Io(_) | Error::Serde(_))) => return Err(e),
            Err(e) => {
                traj.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(traj)
}

/// [`optimize_with`] with default diagnostics and no callback.
pub fn optimize(
    initial: &ProposalParams,
    obj: &Objective,
    cfg: &StepConfig,
    iterations: u64,
    seed: u64,
) -> Result<Trajectory> {
    optimize_with(initial, obj, cfg, iterations, seed, Some(&DiagnosticsConfig::default()), |_, _, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{Rule, SigmaVariant};
    use crate::objective::sphere;
    use crate::proposals::GaussianParams;
    use crate::ranking::TieMode;
    use crate::weighting::WeightFn;
    use nalgebra::{DMatrix, DVector};

    fn setup(d: usize) -> (ProposalParams, StepConfig) {
        let p = ProposalParams::Gaussian(GaussianParams::new(DVector::from_element(d, 2.0), DMatrix::identity(d, d)).unwrap());
        let cfg = StepConfig {
            rule: Rule::IgoMl,
            step_size: 1.0,
            weight_fn: WeightFn::indicator(0.3).unwrap(),
            batch_size: 200,
            sigma_variant: SigmaVariant::PaperEq,
            tie_mode: TieMode::Strict,
        };
        (p, cfg)
    }

    #[test]
    fn zero_iterations_keep_initial() {
        let (p, cfg) = setup(2);
        let t = optimize(&p, &sphere(2), &cfg, 0, 1).unwrap();
        assert_eq!(t.params_history, vec![p]);
        assert!(t.reports.is_empty());
    }

    #[test]
    fn runs_are_reproducible() {
        let (p, cfg) = setup(3);
        let a = optimize(&p, &sphere(3), &cfg, 4, 9).unwrap();
        let b = optimize(&p, &sphere(3), &cfg, 4, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.reports.len(), 4);
        assert_eq!(a.params_history.len(), 5);
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let (p, cfg) = setup(2);
        assert!(matches!(optimize(&p, &sphere(3), &cfg, 1, 0), Err(Error::Config(_))));
    }
}
