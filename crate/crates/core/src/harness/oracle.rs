use serde::{Deserialize, Serialize};

use crate::algorithms::optimize_with;
use crate::diagnostics::{exact_report, ExactReport};
use crate::discrete::DiscreteModel;
use crate::error::{Error, Result};

use super::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub iteration: u64,
    pub params_digest: String,
    #[serde(flatten)]
    pub report: ExactReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleLog {
    pub records: Vec<OracleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Every exact improvement and KL bound held.
    pub passed: bool,
}

impl OracleLog {
    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("records serialize") + "\n").collect()
    }
}

/// Runs the configured trajectory without Monte Carlo diagnostics and
/// replaces them by exact enumeration at every step. Needs a bit-vector
/// objective and a Bernoulli proposal.
pub fn run_oracle(cfg: &ExperimentConfig) -> Result<OracleLog> {
    let obj = cfg.validate()?;
    if !cfg.initial.is_discrete() {
        return Err(Error::Unsupported("exact mode needs a Bernoulli proposal over bit vectors".into()));
    }
    let model = DiscreteModel::for_objective(&obj)?;
    let traj = optimize_with(&cfg.initial, &obj, &cfg.step, cfg.iterations, cfg.seed, None, |_, _, _| Ok(()))?;
    let w = &cfg.step.weight_fn;
    let q = cfg.diagnostics.level_for(w);
    let records = traj
        .params_history
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            let report = exact_report(&model, &obj, w, &pair[0], &pair[1], &cfg.diagnostics.renyi_alphas, q)?;
            Ok(OracleRecord { iteration: k as u64, params_digest: pair[1].digest(), report })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = traj.failure.is_none() && records.iter().all(|r| r.report.improvement_holds && r.report.kl_bound_holds);
    Ok(OracleLog { records, failure: traj.failure, passed })
}
