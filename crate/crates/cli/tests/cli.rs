use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qd")).args(args).output().unwrap()
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_tiny(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.json");
    std::fs::write(
        &path,
        r#"{
          "objective": { "name": "sphere", "dim": 2 },
          "initial": { "family": "gaussian", "mean": [1.0, 1.0], "cov": [[1.0, 0.0], [0.0, 1.0]] },
          "step": { "rule": "igo_ml", "step_size": 1.0, "weight_fn": { "kind": "indicator", "q": 0.3 }, "batch_size": 300 },
          "iterations": 4,
          "seed": 0
        }"#,
    )
    .unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn optimize_streams_to_stdout_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = qd(&["optimize", "--config", s(&cfg), "--seed", "5", "--iterations", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["seed"], 5);
    assert_eq!(header["config"]["iterations"], 3);

    let again = qd(&["optimize", "--config", s(&cfg), "--seed", "5", "--iterations", "3"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn optimize_writes_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let runs = dir.path().join("runs");
    let out = qd(&["optimize", "--config", s(&cfg), "--out", s(&runs)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(runs.join("run_s0.jsonl").exists());
    assert!(runs.join("run_s0.csv").exists());
}

#[test]
fn check_runs_every_seed_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let runs = dir.path().join("runs");
    let out = qd(&["check", "--config", s(&cfg), "--seeds", "0..3", "--out", s(&runs), "--jobs", "2"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.starts_with("4/4 runs passed"));
    for seed in 0..4 {
        assert!(runs.join(format!("run_s{seed}.jsonl")).exists());
    }
    assert!(runs.join("summary_checks.csv").exists());
    assert!(runs.join("summary_quantiles.csv").exists());

    let logs: Vec<String> = (0..4).map(|k| runs.join(format!("run_s{k}.jsonl")).to_str().unwrap().to_string()).collect();
    let mut args = vec!["summarize"];
    args.extend(logs.iter().map(String::as_str));
    let summary = qd(&args);
    assert_eq!(summary.status.code(), Some(0));
    assert_eq!(String::from_utf8(summary.stdout).unwrap(), stdout);
}

#[test]
fn seed_processes_match_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let runs = dir.path().join("runs");
    assert_eq!(qd(&["check", "--config", s(&cfg), "--seeds", "2..2", "--out", s(&runs)]).status.code(), Some(0));
    let single = qd(&["optimize", "--config", s(&cfg), "--seed", "2"]);
    let from_check = std::fs::read_to_string(runs.join("run_s2.jsonl")).unwrap();
    let from_single = String::from_utf8(single.stdout).unwrap();
    let strip = |t: &str| t.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&from_check), strip(&from_single));
}

#[test]
fn thread_count_does_not_change_logs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qd"))
            .args(["optimize", "--config", s(&cfg)])
            .env("QD_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
    let bad = Command::new(env!("CARGO_BIN_EXE_qd"))
        .args(["optimize", "--config", s(&cfg)])
        .env("QD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oracle_mode_reports_exact_values() {
    let out = qd(&["oracle", "--config", s(&config("onemax_oracle.json")), "--iterations", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["improvement_holds"], true);
    assert_eq!(first["kl_bound_holds"], true);
}

#[test]
fn oracle_mode_rejects_continuous_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_tiny(dir.path());
    let out = qd(&["oracle", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(qd(&["optimize", "--config", s(&missing)]).status.code(), Some(2));
    let cfg = write_tiny(dir.path());
    assert_eq!(qd(&["check", "--config", s(&cfg), "--seeds", "3..1"]).status.code(), Some(2));
    let broken = dir.path().join("broken.jsonl");
    std::fs::write(&broken, "{\"record\":\"footer\"}\n").unwrap();
    assert_eq!(qd(&["summarize", s(&broken)]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    for name in ["sphere_igo_ml.json", "two_well_mixture.json", "onemax_oracle.json"] {
        let out = qd(&["optimize", "--config", s(&config(name)), "--iterations", "0"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
