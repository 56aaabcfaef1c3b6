use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algorithms::optimize_with;
use crate::diagnostics::{BoundChecks, CheckStatus, IterationReport};
use crate::error::{Error, Result};
use crate::proposals::ProposalParams;

use super::config::ExperimentConfig;

pub const LOG_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub params_digest: String,
    #[serde(flatten)]
    pub report: IterationReport,
}

/// Per-check tallies over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckTally {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub vacuous: usize,
}

impl CheckTally {
    pub fn add(&mut self, status: CheckStatus) {
        match status {
            CheckStatus::Pass => self.pass += 1,
            CheckStatus::Fail => self.fail += 1,
            CheckStatus::Skipped => self.skipped += 1,
            CheckStatus::Vacuous => self.vacuous += 1,
        }
    }

    pub fn merge(&mut self, other: &CheckTally) {
        self.pass += other.pass;
        self.fail += other.fail;
        self.skipped += other.skipped;
        self.vacuous += other.vacuous;
    }

    /// Passes over evaluated (pass or fail) outcomes; 1 when nothing was
    /// evaluated.
    pub fn pass_rate(&self) -> f64 {
        let n = self.pass + self.fail;
        if n == 0 {
            1.0
        } else {
            self.pass as f64 / n as f64
        }
    }
}

pub fn tally(reports: &[IterationReport]) -> BTreeMap<String, CheckTally> {
    let mut out: BTreeMap<String, CheckTally> = BTreeMap::new();
    for r in reports {
        for (name, outcome) in r.bound_checks.named() {
            out.entry(name.to_string()).or_default().add(outcome.status);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footer {
    pub completed_iterations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// `Q̂` under the last proposal, if any iteration completed.
    pub final_q_hat: Option<f64>,
    pub checks: BTreeMap<String, CheckTally>,
    /// Verdict under the config's check toggles.
    pub passed: bool,
    pub final_params: ProposalParams,
}

/// One line of the log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogLine {
    Header(Header),
    Iteration(IterationRecord),
    Footer(Footer),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub header: Header,
    pub records: Vec<IterationRecord>,
    pub footer: Footer,
}

fn line(l: &LogLine) -> String {
    serde_json::to_string(l).expect("log records serialize")
}

impl RunLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = line(&LogLine::Header(self.header.clone()));
        out.push('\n');
        for r in &self.records {
            out.push_str(&line(&LogLine::Iteration(r.clone())));
            out.push('\n');
        }
        out.push_str(&line(&LogLine::Footer(self.footer.clone())));
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = None;
        let mut records = Vec::new();
        let mut footer = None;
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<LogLine>(raw)? {
                LogLine::Header(h) if i == 0 => header = Some(h),
                LogLine::Iteration(r) if header.is_some() && footer.is_none() => records.push(r),
                LogLine::Footer(f) if header.is_some() && footer.is_none() => footer = Some(f),
                _ => return Err(Error::Config(format!("log line {} is out of order", i + 1))),
            }
        }
        match (header, footer) {
            (Some(header), Some(footer)) => Ok(Self { header, records, footer }),
            (None, _) => Err(Error::Config("log has no header".into())),
            (_, None) => Err(Error::Config("log has no footer (run aborted?)".into())),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = BufReader::new(File::open(path)?);
        let mut text = String::new();
        for l in file.lines() {
            text.push_str(&l?);
            text.push('\n');
        }
        Self::parse(&text)
    }

    pub fn reports(&self) -> Vec<IterationReport> {
        self.records.iter().map(|r| r.report.clone()).collect()
    }

    /// Per-iteration CSV: estimates and the status of every check.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "iteration,q_hat_prev,q_hat_next,j_hat,j_stderr,kl_target_prev,kl_target_next,delta_hat,delta_stderr,delta_pred",
        );
        for n in BoundChecks::NAMES {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let rep = &r.report;
            let cells = [
                rep.iteration.to_string(),
                rep.q_hat_prev.value.to_string(),
                rep.q_hat_next.value.to_string(),
                rep.j_hat.value.to_string(),
                rep.j_hat.stderr.to_string(),
                opt(rep.kl_target_prev.finite().map(|e| e.value)),
                opt(rep.kl_target_next.finite().map(|e| e.value)),
                opt(rep.delta_hat.map(|e| e.value)),
                opt(rep.delta_hat.map(|e| e.stderr)),
                opt(rep.delta_pred),
            ];
            out.push_str(&cells.join(","));
            for (_, outcome) in rep.bound_checks.named() {
                out.push(',');
                out.push_str(status_name(outcome.status));
            }
            out.push('\n');
        }
        out
    }
}

pub fn status_name(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::Skipped => "skipped",
        CheckStatus::Vacuous => "vacuous",
    }
}

/// Runs the experiment, streaming the log to `sink` line by line.
pub fn run_experiment_to<W: Write>(cfg: &ExperimentConfig, sink: &mut W) -> Result<RunLog> {
    let obj = cfg.validate()?;
    let header = Header { version: LOG_VERSION.to_string(), seed: cfg.seed, config: cfg.clone() };
    writeln!(sink, "{}", line(&LogLine::Header(header.clone())))?;
    let mut records = Vec::new();
    let traj = optimize_with(
        &cfg.initial,
        &obj,
        &cfg.step,
        cfg.iterations,
        cfg.seed,
        Some(&cfg.diagnostics),
        |_, next, report| {
            let report = report.expect("diagnostics enabled").clone();
            let rec = IterationRecord { params_digest: next.digest(), report };
            writeln!(sink, "{}", line(&LogLine::Iteration(rec.clone())))?;
            sink.flush()?;
            records.push(rec);
            Ok(())
        },
    )?;
    let footer = Footer {
        completed_iterations: traj.reports.len() as u64,
        failure: traj.failure.clone(),
        final_q_hat: traj.reports.last().map(|r| r.q_hat_next.value),
        checks: tally(&traj.reports),
        passed: traj.failure.is_none() && cfg.checks.verdict(&traj.reports),
        final_params: traj.params_history.last().expect("non-empty").clone(),
    };
    writeln!(sink, "{}", line(&LogLine::Footer(footer.clone())))?;
    sink.flush()?;
    Ok(RunLog { header, records, footer })
}

/// Runs the experiment. With `cfg.output` set, writes `run_s<seed>.jsonl`
/// (streamed) and `run_s<seed>.csv` there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunLog> {
    match &cfg.output {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut sink = BufWriter::new(File::create(cfg.log_path(dir))?);
            let log = run_experiment_to(cfg, &mut sink)?;
            std::fs::write(cfg.csv_path(dir), log.to_csv())?;
            Ok(log)
        }
        None => run_experiment_to(cfg, &mut std::io::sink()),
    }
}
