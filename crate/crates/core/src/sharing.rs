//! Memory sharing among K agents versus one agent working alone.
//!
//! A task stream of `N` rule-tagged tasks is shuffled independently for each
//! of `K` agents. In the shared run, agents act one per round in a freshly
//! shuffled order and every agent reads and writes the same pool. The solo
//! agent processes the same `K * N` tasks in the interleaved order of those
//! rounds, reading and writing only its own pool.

use std::collections::BTreeSet;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::rng::{substream, substream_key, SimRng};
use crate::simenv::{rule_token, RuleId, SharingTask, SuccessModel};
use crate::store::{AgentId, DocId, Experience, Fact, FactId, Memory, MemoryStore, Provenance, TaskId, TokenSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SharingError {
    #[error("invalid sharing configuration: {0}")]
    Config(String),
}

/// Which per-round value the shared run reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// Running success rate of the agent that acted last in the round.
    #[default]
    LastAgent,
    /// Successes of all agents so far over all tasks so far.
    Pooled,
}

/// Whether the shared and solo runs draw task outcomes from one stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    #[default]
    Independent,
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharingParams {
    pub agents: usize,
    pub questions: usize,
    pub rules: u32,
    pub model: SuccessModel,
    pub share_failures: bool,
}

impl Default for SharingParams {
    fn default() -> Self {
        Self { agents: 10, questions: 50, rules: 25, model: SuccessModel::default(), share_failures: false }
    }
}

impl SharingParams {
    pub fn validate(&self) -> Result<(), SharingError> {
        if self.agents == 0 || self.questions == 0 {
            return Err(SharingError::Config("agents and questions must be >= 1".into()));
        }
        if self.rules == 0 {
            return Err(SharingError::Config("rule universe must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub agent: AgentId,
    pub q_id: TaskId,
    pub rule_id: RuleId,
    pub success: bool,
    pub round: u32,
}

impl TrajectoryRecord {
    /// The raw memory form: one fact tagged with the rule and the outcome.
    pub fn to_memory(&self) -> Memory {
        let outcome = if self.success { "success" } else { "failure" };
        let tokens = TokenSet::new([rule_token(self.rule_id), outcome.to_owned()]).expect("valid tokens");
        let fact = Fact::new(FactId(self.q_id.0), tokens).expect("non-empty");
        let provenance = Provenance { agent: self.agent, task: self.q_id, step: u64::from(self.round) };
        Memory::Raw(Experience::new(DocId(self.q_id.0), vec![fact], provenance).expect("non-empty"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolMode {
    Shared,
    Private,
}

/// A trajectory memory plus the records it was built from.
#[derive(Debug, Clone)]
pub struct Pool {
    mode: PoolMode,
    store: MemoryStore,
    records: Vec<TrajectoryRecord>,
}

impl Pool {
    pub fn new(mode: PoolMode) -> Self {
        Self { mode, store: MemoryStore::new(), records: Vec::new() }
    }

    pub fn mode(&self) -> PoolMode {
        self.mode
    }

    pub fn store(&self) -> &MemoryStore {
        &self.store
    }

    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    pub fn add(&mut self, record: TrajectoryRecord) {
        self.store.append(record.to_memory());
        self.records.push(record);
    }

    pub fn possessed_rules(&self) -> BTreeSet<RuleId> {
        self.records.iter().map(|r| r.rule_id).collect()
    }
}

/// Task universe, per-agent permutations and per-round acting order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub tasks: Vec<SharingTask>,
    /// `permutations[a][r]`: index into `tasks` handled by agent `a` in round `r`.
    pub permutations: Vec<Vec<usize>>,
    /// `round_order[r]`: agents in the order they act in round `r`.
    pub round_order: Vec<Vec<AgentId>>,
}

impl Schedule {
    pub fn generate(params: &SharingParams, rng: &mut SimRng) -> Self {
        let tasks = (0..params.questions)
            .map(|q| SharingTask { q_id: TaskId(q as u32), rule_id: RuleId(rng.gen_range(0..params.rules)) })
            .collect();
        let permutations = (0..params.agents)
            .map(|_| {
                let mut p: Vec<usize> = (0..params.questions).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        let round_order = (0..params.questions)
            .map(|_| {
                let mut o: Vec<AgentId> = (0..params.agents as u32).map(AgentId).collect();
                o.shuffle(rng);
                o
            })
            .collect();
        Self { tasks, permutations, round_order }
    }

    pub fn rounds(&self) -> usize {
        self.round_order.len()
    }

    /// `(round, agent, task)` in acting order; the solo agent's task sequence.
    pub fn interleaved(&self) -> Vec<(usize, AgentId, SharingTask)> {
        self.round_order
            .iter()
            .enumerate()
            .flat_map(|(r, order)| {
                order
                    .iter()
                    .map(move |&a| (r, a, self.tasks[self.permutations[a.0 as usize][r]]))
            })
            .collect()
    }
}

pub fn schedule_rng(seed: u64) -> SimRng {
    substream(seed, "sharing-schedule", 0)
}

fn outcome_rng(seed: u64, coupling: Coupling, run: &str) -> SimRng {
    match coupling {
        Coupling::Coupled => substream(seed, "sharing-outcomes", 0),
        Coupling::Independent => substream(seed, &format!("sharing-outcomes-{run}"), 0),
    }
}

/// Per-run result. `acquired_at[rule]` is the 1-based position in the task
/// sequence after which the rule first appeared in the pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingRun {
    pub series: Vec<f64>,
    pub acquired_at: Vec<Option<usize>>,
    pub successes: usize,
}

impl SharingRun {
    /// Rules in the pool once `position` tasks have been processed.
    pub fn possession_after(&self, position: usize) -> BTreeSet<RuleId> {
        self.acquired_at
            .iter()
            .enumerate()
            .filter(|(_, at)| at.is_some_and(|t| t <= position))
            .map(|(r, _)| RuleId(r as u32))
            .collect()
    }
}

fn note_acquisition(acquired_at: &mut [Option<usize>], pool: &Pool, rule: RuleId, position: usize) {
    let slot = &mut acquired_at[rule.0 as usize];
    if slot.is_none() && pool.store().any_relevant(&crate::simenv::rule_query(rule)) {
        *slot = Some(position);
    }
}

/// The shared run; `series[r]` is the round-`r` value of `statistic`.
pub fn run_shared(
    params: &SharingParams,
    schedule: &Schedule,
    statistic: Statistic,
    rng: &mut SimRng,
) -> Result<SharingRun, SharingError> {
    params.validate()?;
    let mut pool = Pool::new(PoolMode::Shared);
    let mut agent_successes = vec![0usize; params.agents];
    let mut acquired_at = vec![None; params.rules as usize];
    let mut series = Vec::with_capacity(schedule.rounds());
    let mut position = 0;
    for (r, order) in schedule.round_order.iter().enumerate() {
        for &agent in order {
            let task = schedule.tasks[schedule.permutations[agent.0 as usize][r]];
            let success = params.model.attempt(&task, pool.store(), rng);
            position += 1;
            agent_successes[agent.0 as usize] += usize::from(success);
            if success || params.share_failures {
                pool.add(TrajectoryRecord { agent, q_id: task.q_id, rule_id: task.rule_id, success, round: r as u32 });
                note_acquisition(&mut acquired_at, &pool, task.rule_id, position);
            }
        }
        let done = r + 1;
        series.push(match statistic {
            Statistic::LastAgent => {
                let last = order.last().expect("at least one agent");
                agent_successes[last.0 as usize] as f64 / done as f64
            }
            Statistic::Pooled => agent_successes.iter().sum::<usize>() as f64 / (done * params.agents) as f64,
        });
    }
    Ok(SharingRun { series, acquired_at, successes: agent_successes.iter().sum() })
}

/// The solo run over the interleaved sequence; `series[i]` is the success
/// rate over the first `i + 1` tasks.
pub fn run_solo(params: &SharingParams, schedule: &Schedule, rng: &mut SimRng) -> Result<SharingRun, SharingError> {
    params.validate()?;
    let mut pool = Pool::new(PoolMode::Private);
    let mut acquired_at = vec![None; params.rules as usize];
    let sequence = schedule.interleaved();
    let mut series = Vec::with_capacity(sequence.len());
    let mut successes = 0;
    for (i, (r, _, task)) in sequence.into_iter().enumerate() {
        let success = params.model.attempt(&task, pool.store(), rng);
        successes += usize::from(success);
        if success || params.share_failures {
            pool.add(TrajectoryRecord { agent: AgentId(0), q_id: task.q_id, rule_id: task.rule_id, success, round: r as u32 });
            note_acquisition(&mut acquired_at, &pool, task.rule_id, i + 1);
        }
        series.push(successes as f64 / (i + 1) as f64);
    }
    Ok(SharingRun { series, acquired_at, successes })
}

/// One replication: schedule plus both runs under `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingReplication {
    pub shared: SharingRun,
    pub shared_pooled: SharingRun,
    pub solo: SharingRun,
}

pub fn run_replication(params: &SharingParams, coupling: Coupling, seed: u64) -> Result<SharingReplication, SharingError> {
    params.validate()?;
    let schedule = Schedule::generate(params, &mut schedule_rng(seed));
    let shared = run_shared(params, &schedule, Statistic::LastAgent, &mut outcome_rng(seed, coupling, "shared"))?;
    // Same outcome stream as `shared`, so this is the same run summarized differently.
    let shared_pooled = run_shared(params, &schedule, Statistic::Pooled, &mut outcome_rng(seed, coupling, "shared"))?;
    let solo = run_solo(params, &schedule, &mut outcome_rng(seed, coupling, "solo"))?;
    Ok(SharingReplication { shared, shared_pooled, solo })
}

pub fn replication_seed(seed: u64, r: usize) -> u64 {
    substream_key(seed, "sharing-replication", r as u64)
}

/// Pointwise mean of equal-length series.
pub fn mean_series(series: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = series.first() else { return Vec::new() };
    let mut out = vec![0.0; first.len()];
    for s in series {
        assert_eq!(s.len(), out.len(), "series lengths differ");
        for (o, v) in out.iter_mut().zip(s) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|o| *o /= series.len() as f64);
    out
}

/// Runs `run` for replication seeds `0..times` and averages pointwise.
pub fn replicate<F>(times: usize, seed: u64, run: F) -> Vec<f64>
where
    F: Fn(u64) -> Vec<f64> + Sync + Send,
{
    mean_series(&par::map_indexed(times, |r| run(replication_seed(seed, r))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingComparison {
    pub replications: usize,
    pub shared: Vec<f64>,
    pub shared_pooled: Vec<f64>,
    pub solo: Vec<f64>,
}

pub fn compare(
    params: &SharingParams,
    coupling: Coupling,
    replications: usize,
    seed: u64,
) -> Result<SharingComparison, SharingError> {
    params.validate()?;
    if replications == 0 {
        return Err(SharingError::Config("replications must be >= 1".into()));
    }
    let reps = par::map_indexed(replications, |r| run_replication(params, coupling, replication_seed(seed, r)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(collect_comparison(reps))
}

/// Same as [`compare`] without the thread pool.
pub fn compare_sequential(
    params: &SharingParams,
    coupling: Coupling,
    replications: usize,
    seed: u64,
) -> Result<SharingComparison, SharingError> {
    params.validate()?;
    if replications == 0 {
        return Err(SharingError::Config("replications must be >= 1".into()));
    }
    let reps = par::map_indexed_sequential(replications, |r| run_replication(params, coupling, replication_seed(seed, r)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(collect_comparison(reps))
}

fn collect_comparison(reps: Vec<SharingReplication>) -> SharingComparison {
    let pick = |f: fn(&SharingReplication) -> &Vec<f64>| mean_series(&reps.iter().map(|r| f(r).clone()).collect::<Vec<_>>());
    SharingComparison {
        replications: reps.len(),
        shared: pick(|r| &r.shared.series),
        shared_pooled: pick(|r| &r.shared_pooled.series),
        solo: pick(|r| &r.solo.series),
    }
}

/// 1-based x of the first point at or above `target`.
pub fn first_reach(series: &[f64], target: f64) -> Option<usize> {
    series.iter().position(|&v| v >= target).map(|i| i + 1)
}

pub const CSV_HEADER: &str = "series,x,success_rate";

/// `shared` rows (x = questions per agent), optionally `shared_pooled`, then
/// `solo` rows (x = questions processed).
pub fn write_csv<W: Write>(cmp: &SharingComparison, include_pooled: bool, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let mut rows = |label: &str, s: &[f64]| -> io::Result<()> {
        for (i, v) in s.iter().enumerate() {
            writeln!(out, "{label},{},{v}", i + 1)?;
        }
        Ok(())
    };
    rows("shared", &cmp.shared)?;
    if include_pooled {
        rows("shared_pooled", &cmp.shared_pooled)?;
    }
    rows("solo", &cmp.solo)
}
