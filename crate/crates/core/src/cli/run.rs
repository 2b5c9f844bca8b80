use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::config::{
    BanditConfig, ConfigLayer, ExperimentConfig, Format, MinimalityConfig, QaConfig, RunConfig, SharingConfig,
};
use crate::insight::{self, InsightError};
use crate::minimality::{self, MinimalityError};
use crate::paradigms::{self, BudgetGuard, EngineRun, Paradigm, ParadigmError};
use crate::rng::substream;
use crate::sharing::{self, SharingError};
use crate::simenv::{gen_corpus, Corpus, SimError};
use crate::store::Memory;

pub const ENVELOPE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Paradigm(#[from] ParadigmError),
    #[error(transparent)]
    Insight(#[from] InsightError),
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error(transparent)]
    Minimality(#[from] MinimalityError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub x_unit: String,
    pub y_unit: String,
    pub values: Vec<f64>,
}

impl Series {
    fn new(label: &str, x_unit: &str, y_unit: &str, values: Vec<f64>) -> Self {
        Self { label: label.into(), x_unit: x_unit.into(), y_unit: y_unit.into(), values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsEnvelope {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ConfigLayer,
    pub series: Vec<Series>,
    pub summary: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<minimality::MinimalityReport>,
}

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct Execution {
    pub envelope: MetricsEnvelope,
    /// Output bytes in the configured format.
    pub bytes: Vec<u8>,
    /// Invariant violations observed during the run; non-empty means failure.
    pub violations: Vec<String>,
    pub corpus: Option<Corpus>,
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn execute(config: &RunConfig) -> Result<Execution, RunError> {
    let mut out = Vec::new();
    let (series, summary, violations, corpus, report) = match &config.experiment {
        ExperimentConfig::StoneVsEts(c) => run_qa(c, config, &mut out)?,
        ExperimentConfig::Bandit(c) => run_bandit(c, config, &mut out)?,
        ExperimentConfig::Sharing(c) => run_sharing(c, config, &mut out)?,
        ExperimentConfig::Minimality(c) => run_minimality(c, config, &mut out)?,
    };
    let envelope = MetricsEnvelope {
        schema_version: ENVELOPE_SCHEMA_VERSION,
        experiment: config.experiment.experiment().name().to_owned(),
        config: config.echo(),
        series,
        summary,
        report,
    };
    if config.format == Format::Json {
        out.clear();
        serde_json::to_writer_pretty(&mut out, &envelope)?;
        out.push(b'\n');
    }
    Ok(Execution { envelope, bytes: out, violations, corpus })
}

type Parts = (Vec<Series>, Value, Vec<String>, Option<Corpus>, Option<minimality::MinimalityReport>);

/// Post-run checks of the engine invariants.
fn paradigm_violations(run: &EngineRun, violations: &mut Vec<String>) {
    let label = run.metrics.paradigm.label();
    let mut prev: Option<&paradigms::QuestionRecord> = None;
    for r in &run.metrics.records {
        if r.budget_remaining != i64::from(run.metrics.initial_budget) - r.retrievals as i64 {
            violations.push(format!("{label}: budget accounting broken at question {}", r.question_index));
        }
        if let Some(p) = prev {
            if r.cumulative_correct < p.cumulative_correct || r.retrievals < p.retrievals {
                violations.push(format!("{label}: series decreased at question {}", r.question_index));
            }
        }
        prev = Some(r);
    }
    for entry in run.store.entries() {
        match (run.metrics.paradigm, entry.memory()) {
            (Paradigm::Stone, Memory::Raw(e)) => {
                if !run.retrieved.iter().any(|x| x == e) {
                    violations.push(format!("{label}: stored experience was never retrieved"));
                }
            }
            (Paradigm::ExtractThenStore, Memory::Extracted(f)) => {
                if !run.retrieved.iter().any(|x| f.is_subset_of(x)) {
                    violations.push(format!("{label}: fragment is not a subset of a retrieved experience"));
                }
            }
            _ => violations.push(format!("{label}: unexpected entry kind in store")),
        }
    }
    if run.metrics.paradigm == Paradigm::Stone && run.store.len() != run.retrieved.len() {
        violations.push(format!("{label}: not every retrieved experience was stored raw"));
    }
}

fn run_qa(c: &QaConfig, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<Parts, RunError> {
    let corpus = gen_corpus(c.docs, c.facts, c.questions_per_doc, cfg.seed)?;
    let mut order: Vec<usize> = (0..corpus.questions.len()).collect();
    order.shuffle(&mut substream(cfg.seed, "question-order", 0));
    let guard = if c.strict_budget { BudgetGuard::Strict } else { BudgetGuard::Literal };
    let stone = paradigms::run_paradigm(Paradigm::Stone, &corpus, &order, c.budget, guard)?;
    let ets = paradigms::run_paradigm(Paradigm::ExtractThenStore, &corpus, &order, c.budget, guard)?;

    let mut violations = Vec::new();
    paradigm_violations(&stone, &mut violations);
    paradigm_violations(&ets, &mut violations);
    for (s, e) in stone.metrics.records.iter().zip(&ets.metrics.records) {
        if s.cumulative_correct < e.cumulative_correct {
            violations.push(format!("stone behind ets at question {}", s.question_index));
            break;
        }
    }

    paradigms::write_csv(&[&stone.metrics, &ets.metrics], &mut *out)?;
    let mut series = Vec::new();
    for run in [&stone, &ets] {
        let m = &run.metrics;
        let l = m.paradigm.label();
        series.push(Series::new(
            &format!("{l}_cumulative_correct"),
            "questions",
            "correct answers",
            m.records.iter().map(|r| r.cumulative_correct as f64).collect(),
        ));
        series.push(Series::new(
            &format!("{l}_budget_remaining"),
            "questions",
            "retrievals left",
            m.records.iter().map(|r| r.budget_remaining as f64).collect(),
        ));
    }
    let summary = json!({
        "questions": order.len(),
        "stone_correct": stone.metrics.correct(),
        "stone_retrievals": stone.metrics.retrievals(),
        "stone_store_size_units": stone.store.size_units(),
        "ets_correct": ets.metrics.correct(),
        "ets_retrievals": ets.metrics.retrievals(),
        "ets_store_size_units": ets.store.size_units(),
    });
    Ok((series, summary, violations, Some(corpus), None))
}

fn run_bandit(c: &BanditConfig, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<Parts, RunError> {
    let cmp = insight::compare_policies(&c.env, c.epsilon, c.horizon, c.trials, cfg.seed)?;
    insight::write_csv(&cmp, &mut *out)?;
    let mut violations = Vec::new();
    let max_reward = c.env.arms().iter().map(|a| a.reward).fold(0.0, f64::max);
    for run in [&cmp.replay, &cmp.eps_greedy] {
        if run.mean_reward.iter().any(|r| !(0.0..=max_reward).contains(r)) {
            violations.push(format!("{}: mean reward outside [0, max reward]", run.policy.label()));
        }
    }
    let half = c.horizon / 2 + 1;
    let summary = json!({
        "trials": c.trials,
        "horizon": c.horizon,
        "mean_reward_replay": cmp.replay.window_mean(1, c.horizon),
        "mean_reward_epsgreedy": cmp.eps_greedy.window_mean(1, c.horizon),
        "final_half_from_step": half,
        "final_half_mean_reward_replay": cmp.replay.window_mean(half, c.horizon),
        "final_half_mean_reward_epsgreedy": cmp.eps_greedy.window_mean(half, c.horizon),
        "expected_values": c.env.arms().iter().map(|a| a.expected_value()).collect::<Vec<_>>(),
    });
    let series = vec![
        Series::new("replay", "step", "mean reward per step", cmp.replay.mean_reward.clone()),
        Series::new("epsgreedy", "step", "mean reward per step", cmp.eps_greedy.mean_reward.clone()),
    ];
    Ok((series, summary, violations, None, None))
}

fn run_sharing(c: &SharingConfig, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<Parts, RunError> {
    let cmp = sharing::compare(&c.params, c.coupling, c.replications, cfg.seed)?;
    sharing::write_csv(&cmp, c.pooled, &mut *out)?;
    let violations: Vec<String> = [("shared", &cmp.shared), ("shared_pooled", &cmp.shared_pooled), ("solo", &cmp.solo)]
        .iter()
        .filter(|(_, s)| s.iter().any(|v| !(0.0..=1.0).contains(v)))
        .map(|(l, _)| format!("{l}: success rate outside [0, 1]"))
        .collect();
    let final_shared = cmp.shared.last().copied().unwrap_or(0.0);
    let threshold = c.threshold.unwrap_or(final_shared);
    let shared_x = sharing::first_reach(&cmp.shared, threshold);
    let solo_x = sharing::first_reach(&cmp.solo, threshold);
    let summary = json!({
        "replications": c.replications,
        "final_rate_shared": final_shared,
        "final_rate_solo": cmp.solo.last().copied().unwrap_or(0.0),
        "threshold": threshold,
        "questions_to_threshold_shared": shared_x,
        "questions_to_threshold_solo": solo_x,
        "questions_ratio": shared_x.zip(solo_x).map(|(s, o)| o as f64 / s as f64),
    });
    let mut series = vec![Series::new("shared", "questions per agent", "success rate", cmp.shared.clone())];
    if c.pooled {
        series.push(Series::new("shared_pooled", "questions per agent", "success rate", cmp.shared_pooled.clone()));
    }
    series.push(Series::new("solo", "questions", "success rate", cmp.solo.clone()));
    Ok((series, summary, violations, None, None))
}

fn run_minimality(c: &MinimalityConfig, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<Parts, RunError> {
    let report = minimality::check_minimality(c.cases, cfg.seed)?;
    writeln!(out, "n_facts,n_tasks,size_stone,size_ets,holds,overlapping")?;
    for r in &report.reports {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n_facts,
            r.n_tasks,
            r.size_stone,
            r.size_ets,
            u8::from(r.holds),
            u8::from(r.overlapping)
        )?;
    }
    let violations = report
        .counterexamples
        .iter()
        .map(|c| format!("minimality counterexample at case {}", c.case_index))
        .collect();
    let summary = json!({
        "cases": report.cases,
        "holds_count": report.holds_count,
        "strict_count": report.strict_count,
        "overlapping_count": report.overlapping_count,
        "counterexample_count": report.counterexamples.len(),
    });
    let series = vec![
        Series::new("size_stone", "case", "facts", report.reports.iter().map(|r| r.size_stone as f64).collect()),
        Series::new("size_ets", "case", "facts", report.reports.iter().map(|r| r.size_ets as f64).collect()),
    ];
    Ok((series, summary, violations, None, Some(report)))
}
