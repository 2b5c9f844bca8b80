//! Command-line harness.
//!
//! ```text
//! mnemos [--config FILE] [--seed N] [--out PATH] [--format csv|json] <experiment> [flags]
//! ```
//!
//! Values resolve as flags, then the config file, then defaults. The seed
//! additionally falls back to `MNEMOS_SEED` before the built-in default.
//! Without a subcommand the experiment is taken from the config file.

mod config;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{
    BanditConfig, ConfigLayer, CouplingArg, Experiment, ExperimentConfig, Format, MinimalityConfig, QaConfig,
    RunConfig, SharingConfig, DEFAULT_SEED,
};
pub use run::{execute, write_atomic, Execution, MetricsEnvelope, RunError, Series, ENVELOPE_SCHEMA_VERSION};

pub const SEED_ENV: &str = "MNEMOS_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for `{key}`: {msg}")]
    Usage { key: String, msg: String },
    #[error("no experiment given: pass a subcommand or set `experiment` in the config file")]
    MissingExperiment,
    #[error("config file {path}: {msg}")]
    File { path: String, msg: String },
    #[error(transparent)]
    Clap(#[from] clap::Error),
}

impl PartialEq for ConfigError {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "mnemos", version, about = "Agent experience-memory experiments")]
struct Cli {
    /// TOML or JSON (by extension) config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Raw storage vs. extract-then-store under a retrieval budget.
    #[command(allow_negative_numbers = true)]
    StoneVsEts(QaArgs),
    /// Simple replay vs. epsilon-greedy on a multi-armed bandit.
    #[command(allow_negative_numbers = true)]
    Bandit(BanditArgs),
    /// K memory-sharing agents vs. one solo agent.
    #[command(allow_negative_numbers = true)]
    Sharing(SharingArgs),
    /// Memory size of raw storage vs. zero-loss extraction.
    #[command(allow_negative_numbers = true)]
    Minimality(MinimalityArgs),
}

#[derive(Debug, Args)]
struct QaArgs {
    #[arg(long)]
    docs: Option<i64>,
    /// Facts per document.
    #[arg(long)]
    facts: Option<i64>,
    #[arg(long)]
    questions_per_doc: Option<i64>,
    #[arg(long)]
    budget: Option<i64>,
    /// Use `budget <= 0` as the retrieval guard instead of `budget < 0`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    strict_budget: Option<bool>,
    /// Also write the generated corpus in its text form.
    #[arg(long)]
    dump_corpus: Option<PathBuf>,
}

fn parse_arm(s: &str) -> Result<(f64, f64), String> {
    let (p, r) = s.split_once(':').ok_or("expected PROB:REWARD")?;
    Ok((
        p.parse().map_err(|_| format!("bad probability {p:?}"))?,
        r.parse().map_err(|_| format!("bad reward {r:?}"))?,
    ))
}

#[derive(Debug, Args)]
struct BanditArgs {
    /// An arm as PROB:REWARD; repeat for each arm.
    #[arg(long = "arm", value_parser = parse_arm)]
    arms: Vec<(f64, f64)>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    horizon: Option<i64>,
    #[arg(long)]
    trials: Option<i64>,
}

#[derive(Debug, Args)]
struct SharingArgs {
    #[arg(long)]
    agents: Option<i64>,
    /// Questions per agent.
    #[arg(long)]
    questions: Option<i64>,
    #[arg(long)]
    p_base: Option<f64>,
    #[arg(long)]
    p_boost: Option<f64>,
    /// Size of the rule universe.
    #[arg(long)]
    rules: Option<i64>,
    #[arg(long)]
    replications: Option<i64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    share_failures: Option<bool>,
    /// Also emit the all-agent pooled success rate.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pooled: Option<bool>,
    #[arg(long, value_enum)]
    coupling: Option<CouplingArg>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct MinimalityArgs {
    #[arg(long)]
    cases: Option<i64>,
}

/// A parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub dump_corpus: Option<PathBuf>,
}

fn flag_layer(cli: &Cli) -> (ConfigLayer, Option<PathBuf>) {
    let mut l = ConfigLayer { seed: cli.seed, format: cli.format, ..ConfigLayer::default() };
    let mut dump = None;
    match &cli.command {
        None => {}
        Some(Command::StoneVsEts(a)) => {
            l.experiment = Some(Experiment::StoneVsEts);
            l.docs = a.docs;
            l.facts = a.facts;
            l.questions_per_doc = a.questions_per_doc;
            l.budget = a.budget;
            l.strict_budget = a.strict_budget;
            dump = a.dump_corpus.clone();
        }
        Some(Command::Bandit(a)) => {
            l.experiment = Some(Experiment::Bandit);
            l.arms = (!a.arms.is_empty()).then(|| a.arms.clone());
            l.epsilon = a.epsilon;
            l.horizon = a.horizon;
            l.trials = a.trials;
        }
        Some(Command::Sharing(a)) => {
            l.experiment = Some(Experiment::Sharing);
            l.agents = a.agents;
            l.questions = a.questions;
            l.p_base = a.p_base;
            l.p_boost = a.p_boost;
            l.rules = a.rules;
            l.replications = a.replications;
            l.share_failures = a.share_failures;
            l.pooled = a.pooled;
            l.coupling = a.coupling;
            l.threshold = a.threshold;
        }
        Some(Command::Minimality(a)) => {
            l.experiment = Some(Experiment::Minimality);
            l.cases = a.cases;
        }
    }
    (l, dump)
}

/// Parses `args` (including the program name) into a validated invocation.
/// `env_seed` is the value of `MNEMOS_SEED`, if set.
pub fn parse_config<I, T>(args: I, env_seed: Option<&str>) -> Result<Invocation, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let file = match &cli.config {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    let (flags, dump_corpus) = flag_layer(&cli);
    let config = RunConfig::resolve(&flags.over(file), env_seed)?;
    Ok(Invocation { config, out: cli.out, dump_corpus })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Invocation, ConfigError> {
        parse_config(std::iter::once("mnemos").chain(args.iter().copied()), None)
    }

    #[test]
    fn happy_path() {
        let inv = parse(&["stone-vs-ets", "--docs", "50", "--facts", "10", "--budget", "100", "--seed", "42"]).unwrap();
        assert_eq!(inv.config.seed, 42);
        let ExperimentConfig::StoneVsEts(c) = inv.config.experiment else { panic!() };
        assert_eq!((c.docs, c.facts, c.budget, c.strict_budget), (50, 10, 100, false));
    }

    #[test]
    fn negative_budget_is_a_usage_error() {
        match parse(&["stone-vs-ets", "--budget", "-5"]) {
            Err(ConfigError::Usage { key, .. }) => assert_eq!(key, "budget"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_experiment_is_a_usage_error() {
        assert_eq!(parse(&["--seed", "1"]).unwrap_err(), ConfigError::MissingExperiment);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "epsilon = 0.2\nhorizon = 30\n").unwrap();
        let p = path.to_str().unwrap();
        let inv = parse(&["bandit", "--config", p, "--epsilon", "0.1"]).unwrap();
        let ExperimentConfig::Bandit(b) = inv.config.experiment else { panic!() };
        assert_eq!(b.epsilon, 0.1);
        assert_eq!(b.horizon, 30);
        let inv = parse(&["bandit", "--config", p]).unwrap();
        let ExperimentConfig::Bandit(b) = inv.config.experiment else { panic!() };
        assert_eq!(b.epsilon, 0.2);
    }

    #[test]
    fn experiment_from_file_alone() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"experiment": "minimality", "cases": 5}"#).unwrap();
        let inv = parse(&["--config", path.to_str().unwrap()]).unwrap();
        assert_eq!(inv.config.experiment, ExperimentConfig::Minimality(MinimalityConfig { cases: 5 }));
    }

    #[test]
    fn unknown_file_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "epsilonn = 0.2\n").unwrap();
        assert!(matches!(parse(&["bandit", "--config", path.to_str().unwrap()]), Err(ConfigError::File { .. })));
    }

    #[test]
    fn bool_and_arm_flags() {
        let inv = parse(&["stone-vs-ets", "--strict-budget"]).unwrap();
        let ExperimentConfig::StoneVsEts(c) = inv.config.experiment else { panic!() };
        assert!(c.strict_budget);
        let inv = parse(&["bandit", "--arm", "0.5:2", "--arm", "0.25:4"]).unwrap();
        let ExperimentConfig::Bandit(b) = inv.config.experiment else { panic!() };
        assert_eq!(b.env.arms().len(), 2);
        assert!(matches!(parse(&["bandit", "--arm", "oops"]), Err(ConfigError::Clap(_))));
    }

    #[test]
    fn env_seed_fallback() {
        let inv = parse_config(["mnemos", "minimality"], Some("99")).unwrap();
        assert_eq!(inv.config.seed, 99);
        let inv = parse_config(["mnemos", "minimality", "--seed", "3"], Some("99")).unwrap();
        assert_eq!(inv.config.seed, 3);
    }
}
