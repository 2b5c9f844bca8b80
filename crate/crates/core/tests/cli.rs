use std::path::Path;
use std::process::{Command, Output};

use mnemos::cli::{MetricsEnvelope, RunConfig};

fn mnemos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mnemos"))
        .args(args)
        .env_remove("MNEMOS_SEED")
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full = vec!["--out", path.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = mnemos(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn every_subcommand_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["stone-vs-ets", "bandit", "sharing", "minimality"] {
        for format in ["csv", "json"] {
            let args = ["--seed", "11", "--format", format, cmd];
            let a = run_to(dir.path(), "a", &args);
            let b = run_to(dir.path(), "b", &args);
            assert!(!a.is_empty());
            assert_eq!(a, b, "{cmd} {format}");
        }
    }
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let file = run_to(dir.path(), "out.csv", &["bandit", "--horizon", "50", "--trials", "3"]);
    let stdout = mnemos(&["bandit", "--horizon", "50", "--trials", "3"]).stdout;
    assert_eq!(file, stdout);
}

#[test]
fn default_stone_vs_ets_holds_both_engines() {
    let out = mnemos(&["stone-vs-ets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(mnemos::paradigms::CSV_HEADER));
    let engines: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(engines.iter().filter(|e| **e == "stone").count(), 500);
    assert_eq!(engines.iter().filter(|e| **e == "ets").count(), 500);
}

#[test]
fn minimality_json_reports_all_cases_holding() {
    let out = mnemos(&["minimality", "--cases", "100"]);
    assert!(out.status.success());
    let env: MetricsEnvelope = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(env.summary["holds_count"], 100);
    assert_eq!(env.report.unwrap().holds_count, 100);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_to(dir.path(), "first.json", &["--format", "json", "sharing", "--replications", "3", "--pooled"]);
    let env: MetricsEnvelope = serde_json::from_slice(&first).unwrap();
    let config = dir.path().join("echo.json");
    std::fs::write(&config, serde_json::to_vec(&env.config).unwrap()).unwrap();
    let second = run_to(dir.path(), "second.json", &["--config", config.to_str().unwrap()]);
    assert_eq!(first, second);
    assert_eq!(RunConfig::resolve(&env.config, None).unwrap().echo(), env.config);
}

#[test]
fn env_seed_is_a_fallback() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_mnemos"))
        .args(["bandit", "--horizon", "20"])
        .env("MNEMOS_SEED", "5")
        .output()
        .unwrap();
    let with_flag = mnemos(&["bandit", "--horizon", "20", "--seed", "5"]);
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_ne!(with_env.stdout, mnemos(&["bandit", "--horizon", "20"]).stdout);
}

#[test]
fn dump_corpus_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.txt");
    let out = mnemos(&["stone-vs-ets", "--docs", "4", "--facts", "3", "--dump-corpus", path.to_str().unwrap()]);
    assert!(out.status.success());
    let corpus = mnemos::simenv::Corpus::from_text(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(corpus, mnemos::simenv::gen_corpus(4, 3, 3, mnemos::cli::DEFAULT_SEED).unwrap());
}

#[test]
fn exit_codes() {
    let bad = mnemos(&["stone-vs-ets", "--budget", "-5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("budget"));
    assert_eq!(mnemos(&["--seed", "1"]).status.code(), Some(2));
    assert_eq!(mnemos(&["bandit", "--bogus"]).status.code(), Some(2));
    let io = mnemos(&["--out", "/nonexistent-dir/x.csv", "minimality"]);
    assert_eq!(io.status.code(), Some(1));
    assert!(!io.stderr.is_empty());
}

#[test]
fn failed_write_leaves_existing_file_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("keep.csv");
    std::fs::write(&path, b"previous").unwrap();
    // A usage error never reaches the writer.
    let out = mnemos(&["--out", path.to_str().unwrap(), "bandit", "--epsilon", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read(&path).unwrap(), b"previous");
}
