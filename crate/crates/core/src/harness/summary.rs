use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::log::{CheckTally, RunLog};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRate {
    pub name: String,
    pub tally: CheckTally,
    pub pass_rate: f64,
}

/// Spread of `Q̂(θ_k)` across runs at iteration `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub iteration: u64,
    pub runs: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub passed_runs: usize,
    pub checks: Vec<CheckRate>,
    pub quantiles: Vec<QuantileRow>,
}

/// Linear interpolation between order statistics.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `Q̂(θ_0), Q̂(θ_1), …` as logged.
pub fn quantile_path(log: &RunLog) -> Vec<f64> {
    let mut out = Vec::with_capacity(log.records.len() + 1);
    if let Some(first) = log.records.first() {
        out.push(first.report.q_hat_prev.value);
    }
    out.extend(log.records.iter().map(|r| r.report.q_hat_next.value));
    out
}

pub fn summarize(logs: &[RunLog]) -> Result<Summary> {
    let first = logs.first().ok_or_else(|| Error::Config("nothing to summarize".into()))?;
    let shape = first.header.config.shape();
    if let Some(odd) = logs.iter().find(|l| l.header.config.shape() != shape) {
        return Err(Error::Config(format!(
            "logs differ in configuration (seed {} vs seed {})",
            first.header.seed, odd.header.seed
        )));
    }
    let mut totals: BTreeMap<String, CheckTally> = BTreeMap::new();
    for log in logs {
        for (name, t) in &log.footer.checks {
            totals.entry(name.clone()).or_default().merge(t);
        }
    }
    let checks = totals
        .into_iter()
        .map(|(name, tally)| CheckRate { pass_rate: tally.pass_rate(), name, tally })
        .collect();
    let paths: Vec<Vec<f64>> = logs.iter().map(quantile_path).collect();
    let longest = paths.iter().map(Vec::len).max().unwrap_or(0);
    let quantiles = (0..longest)
        .map(|k| {
            let mut vals: Vec<f64> = paths.iter().filter_map(|p| p.get(k).copied()).collect();
            vals.sort_by(f64::total_cmp);
            QuantileRow {
                iteration: k as u64,
                runs: vals.len(),
                median: percentile(&vals, 0.5),
                q1: percentile(&vals, 0.25),
                q3: percentile(&vals, 0.75),
            }
        })
        .collect();
    Ok(Summary { runs: logs.len(), passed_runs: logs.iter().filter(|l| l.footer.passed).count(), checks, quantiles })
}

impl Summary {
    pub fn checks_csv(&self) -> String {
        let mut out = String::from("check,pass,fail,skipped,vacuous,pass_rate\n");
        for c in &self.checks {
            let t = &c.tally;
            out.push_str(&format!("{},{},{},{},{},{}\n", c.name, t.pass, t.fail, t.skipped, t.vacuous, c.pass_rate));
        }
        out
    }

    pub fn quantiles_csv(&self) -> String {
        let mut out = String::from("iteration,runs,median,q1,q3\n");
        for r in &self.quantiles {
            out.push_str(&format!("{},{},{},{},{}\n", r.iteration, r.runs, r.median, r.q1, r.q3));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert_eq!(percentile(&v, 0.25), 1.75);
        assert_eq!(percentile(&[7.0], 0.75), 7.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(summarize(&[]).is_err());
    }
}
