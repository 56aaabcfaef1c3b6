use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Parser, Subcommand};
use qd_core::error::{Error, Result};
use qd_core::harness::{run_experiment, run_experiment_to, run_oracle, summarize, ExperimentConfig, RunLog, Summary};

#[derive(Parser)]
#[command(name = "qd", version, about = "Run and check quantile-weighted proposal updates")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its log.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<u64>,
        /// Directory for `run_s<seed>.jsonl` and `.csv`; without it (and
        /// without `output` in the config) the log goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seed range, one process per seed, and summarize.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive range `A..B`.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        iterations: Option<u64>,
        /// Defaults to the config's `output`, then `./runs`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent runs; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Exact enumeration mode for Bernoulli proposals on bit vectors.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pass rates and quantile trajectories over several logs.
    Summarize {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Also write `summary_checks.csv` and `summary_quantiles.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(config: &Path, seed: Option<u64>, iterations: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(k) = iterations {
        cfg.iterations = k;
    }
    if out.is_some() {
        cfg.output = out;
    }
    Ok(cfg)
}

fn parse_seeds(range: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("seed range must look like A..B, got '{range}'"));
    let (a, b) = range.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn optimize(cfg: &ExperimentConfig) -> Result<bool> {
    let log = match cfg.output {
        Some(_) => run_experiment(cfg)?,
        None => run_experiment_to(cfg, &mut std::io::stdout().lock())?,
    };
    if let Some(f) = &log.footer.failure {
        eprintln!("run stopped after {} iterations: {f}", log.footer.completed_iterations);
    }
    Ok(log.footer.passed)
}

fn check(config: &Path, seeds: &[u64], iterations: Option<u64>, out: &Path, jobs: usize) -> Result<bool> {
    let exe = std::env::current_exe()?;
    let mut ok = true;
    for chunk in seeds.chunks(jobs.max(1)) {
        let children = chunk
            .iter()
            .map(|s| {
                let mut cmd = Command::new(&exe);
                cmd.arg("optimize").arg("--config").arg(config).arg("--seed").arg(s.to_string()).arg("--out").arg(out);
                if let Some(k) = iterations {
                    cmd.arg("--iterations").arg(k.to_string());
                }
                Ok((*s, cmd.spawn()?))
            })
            .collect::<Result<Vec<_>>>()?;
        for (s, mut child) in children {
            let status = child.wait()?;
            match status.code() {
                Some(0) => {}
                Some(1) => ok = false,
                _ => return Err(Error::Config(format!("run for seed {s} failed ({status})"))),
            }
        }
    }
    let cfg = ExperimentConfig::load(config)?;
    let logs = seeds
        .iter()
        .map(|s| RunLog::read(&ExperimentConfig { seed: *s, ..cfg.clone() }.log_path(out)))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&logs)?;
    emit_summary(&summary, Some(out))?;
    Ok(ok && summary.passed_runs == summary.runs)
}

fn emit_summary(s: &Summary, out: Option<&Path>) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}/{} runs passed", s.passed_runs, s.runs)?;
    write!(stdout, "{}\n{}", s.checks_csv(), s.quantiles_csv())?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary_checks.csv"), s.checks_csv())?;
        std::fs::write(dir.join("summary_quantiles.csv"), s.quantiles_csv())?;
    }
    Ok(())
}

fn oracle(cfg: &ExperimentConfig) -> Result<bool> {
    let log = run_oracle(cfg)?;
    match &cfg.output {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("oracle_s{}.jsonl", cfg.seed)), log.to_jsonl())?;
        }
        None => std::io::stdout().lock().write_all(log.to_jsonl().as_bytes())?,
    }
    if let Some(f) = &log.failure {
        eprintln!("run stopped after {} iterations: {f}", log.records.len());
    }
    Ok(log.passed)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("QD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("QD_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Cmd::Optimize { config, seed, iterations, out } => optimize(&load(&config, seed, iterations, out)?),
        Cmd::Check { config, seeds, iterations, out, jobs } => {
            let seeds = parse_seeds(&seeds)?;
            let cfg = ExperimentConfig::load(&config)?;
            cfg.validate()?;
            let out = out.or(cfg.output).unwrap_or_else(|| PathBuf::from("runs"));
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            check(&config, &seeds, iterations, &out, jobs)
        }
        Cmd::Oracle { config, seed, iterations, out } => oracle(&load(&config, seed, iterations, out)?),
        Cmd::Summarize { logs, out } => {
            let logs = logs.iter().map(|p| RunLog::read(p)).collect::<Result<Vec<_>>>()?;
            let s = summarize(&logs)?;
            emit_summary(&s, out.as_deref())?;
            Ok(s.passed_runs == s.runs)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges_are_inclusive() {
        assert_eq!(parse_seeds("0..9").unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(parse_seeds("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_seeds("5..5").unwrap(), vec![5]);
        assert!(parse_seeds("4..2").is_err());
        assert!(parse_seeds("x..2").is_err());
        assert!(parse_seeds("7").is_err());
    }
}
