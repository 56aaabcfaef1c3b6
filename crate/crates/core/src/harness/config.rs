use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algorithms::StepConfig;
use crate::diagnostics::{CheckStatus, DiagnosticsConfig, IterationReport};
use crate::error::{Error, Result};
use crate::objective::{self, DomainKind, Objective};
use crate::proposals::ProposalParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Identity,
    /// Optimize `exp(f)` instead of `f`.
    Exp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub name: String,
    pub dim: usize,
    /// `linear` only; defaults to `1, …, d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    /// `user_table` only: `2^d` values indexed by bit pattern.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    /// `two_well` only; defaults to `(2, 0, …, 0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// `two_well` only; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default)]
    pub transform: Transform,
}

impl ObjectiveConfig {
    pub fn named(name: &str, dim: usize) -> Self {
        Self { name: name.into(), dim, coefficients: None, table: None, center: None, offset: None, transform: Transform::Identity }
    }

    pub fn build(&self) -> Result<Objective> {
        let d = self.dim;
        let check_len = |what: &str, len: usize| {
            if len == d {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} has {len} entries, objective dimension is {d}")))
            }
        };
        let base = match self.name.as_str() {
            "linear" => match &self.coefficients {
                Some(c) => {
                    check_len("coefficients", c.len())?;
                    objective::linear(c.clone())
                }
                None => objective::make_objective("linear", d)?,
            },
            "user_table" | "user-table" => {
                let table = self.table.clone().ok_or_else(|| Error::Config("user_table needs a 'table'".into()))?;
                objective::user_table(d, table)?
            }
            "two_well" if self.center.is_some() || self.offset.is_some() => {
                let center = match &self.center {
                    Some(c) => {
                        check_len("center", c.len())?;
                        DVector::from_vec(c.clone())
                    }
                    None => {
                        let mut a = DVector::zeros(d);
                        a[0] = 2.0;
                        a
                    }
                };
                objective::two_well(center, self.offset.unwrap_or(0.0))
            }
            name => objective::make_objective(name, d)?,
        };
        Ok(match self.transform {
            Transform::Identity => base,
            Transform::Exp => base.exp_transformed(),
        })
    }
}

/// Which checks count towards a run's verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChecksConfig {
    pub improvement: bool,
    pub strict_increase: bool,
    pub quantile_decrease: bool,
    pub quantile_non_increasing: bool,
    pub quantile_bound: bool,
    pub igo_delta: bool,
    pub kl_decrease: bool,
    /// Failures of `quantile_non_increasing` tolerated per run.
    pub max_quantile_violations: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            improvement: true,
            strict_increase: true,
            quantile_decrease: true,
            quantile_non_increasing: true,
            quantile_bound: true,
            igo_delta: true,
            kl_decrease: true,
            max_quantile_violations: 2,
        }
    }
}

impl ChecksConfig {
    pub fn enabled(&self, name: &str) -> bool {
        match name {
            "improvement" => self.improvement,
            "strict_increase" => self.strict_increase,
            "quantile_decrease" => self.quantile_decrease,
            "quantile_non_increasing" => self.quantile_non_increasing,
            "quantile_bound" => self.quantile_bound,
            "igo_delta" => self.igo_delta,
            "kl_decrease" => self.kl_decrease,
            _ => false,
        }
    }

    /// A run passes when no enabled check failed, apart from the tolerated
    /// number of quantile violations.
    pub fn verdict(&self, reports: &[IterationReport]) -> bool {
        let mut quantile_failures = 0;
        for r in reports {
            for (name, outcome) in r.bound_checks.named() {
                if !self.enabled(name) || outcome.status != CheckStatus::Fail {
                    continue;
                }
                if name == "quantile_non_increasing" {
                    quantile_failures += 1;
                } else {
                    return false;
                }
            }
        }
        quantile_failures <= self.max_quantile_violations
    }
}

/// One experiment: objective, proposal, rule, diagnostics and outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub objective: ObjectiveConfig,
    pub initial: ProposalParams,
    pub step: StepConfig,
    pub iterations: u64,
    pub seed: u64,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    /// Directory receiving `run_s<seed>.jsonl` and `run_s<seed>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the invariants that do not need a run, and returns the
    /// objective.
    pub fn validate(&self) -> Result<Objective> {
        if self.objective.dim == 0 {
            return Err(Error::Config("objective dimension must be at least 1".into()));
        }
        let obj = self.objective.build()?;
        self.step.validate()?;
        self.step.check_family(&self.initial)?;
        self.diagnostics.validate()?;
        if self.initial.dim() != obj.dim() {
            return Err(Error::Config(format!(
                "initial proposal has dimension {}, objective has {}",
                self.initial.dim(),
                obj.dim()
            )));
        }
        if matches!(obj.domain(), DomainKind::Bits(_)) != self.initial.is_discrete() {
            return Err(Error::Config(format!(
                "a {} proposal does not match the domain of '{}'",
                self.initial.family(),
                self.objective.name
            )));
        }
        Ok(obj)
    }

    pub fn log_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("run_s{}.jsonl", self.seed))
    }

    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("run_s{}.csv", self.seed))
    }

    /// The config with run-specific fields cleared, for comparing the shape
    /// of several runs.
    pub fn shape(&self) -> ExperimentConfig {
        ExperimentConfig { seed: 0, output: None, ..self.clone() }
    }
}
