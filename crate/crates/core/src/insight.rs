//! Experience utilization on a stochastic bandit.
//!
//! Simple replay acts on the single most recent outcome (win-stay,
//! lose-shift). The ε-greedy policy aggregates every past outcome into
//! per-arm value estimates via [`discover`] and exploits the best one.

use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::rng::{substream, substream_key, SimRng};
use crate::simenv::{BanditEnv, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InsightError {
    #[error("policies need at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("epsilon must be in [0, 1], got {0}")]
    Epsilon(f64),
    #[error("horizon and trial count must be >= 1")]
    EmptyRun,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-arm pull counts and cumulative rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pulls: Vec<u64>,
    total_reward: Vec<f64>,
}

impl ArmStats {
    pub fn new(n_arms: usize) -> Self {
        Self { pulls: vec![0; n_arms], total_reward: vec![0.0; n_arms] }
    }

    /// Builds stats from explicit counts; lengths must match.
    pub fn from_parts(pulls: Vec<u64>, total_reward: Vec<f64>) -> Self {
        assert_eq!(pulls.len(), total_reward.len(), "pulls and rewards differ in length");
        Self { pulls, total_reward }
    }

    pub fn n_arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn total_reward(&self) -> &[f64] {
        &self.total_reward
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.pulls[arm] += 1;
        self.total_reward[arm] += reward;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub arm: usize,
    pub success: bool,
    pub reward: f64,
    pub step: u64,
}

/// Sample-mean value estimate per arm; unpulled arms estimate 0.
pub fn discover(stats: &ArmStats) -> Vec<f64> {
    stats
        .pulls
        .iter()
        .zip(&stats.total_reward)
        .map(|(&n, &r)| if n > 0 { r / n as f64 } else { 0.0 })
        .collect()
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Uniform over `0..n_arms` without `excluded`.
fn uniform_other(n_arms: usize, excluded: usize, rng: &mut SimRng) -> usize {
    let k = rng.gen_range(0..n_arms - 1);
    if k >= excluded {
        k + 1
    } else {
        k
    }
}

/// Win-stay, lose-shift. With no history the arm is uniform; after a failure
/// it is uniform over the other arms.
pub fn replay_choose(last: Option<&Outcome>, n_arms: usize, rng: &mut SimRng) -> Result<usize, InsightError> {
    if n_arms < 2 {
        return Err(InsightError::TooFewArms(n_arms));
    }
    Ok(match last {
        None => rng.gen_range(0..n_arms),
        Some(o) if o.success => o.arm,
        Some(o) => uniform_other(n_arms, o.arm, rng),
    })
}

/// Exploits the [`discover`] argmax with probability `1 - epsilon`, otherwise
/// picks uniformly among the remaining arms.
pub fn eps_greedy_choose(stats: &ArmStats, epsilon: f64, rng: &mut SimRng) -> Result<usize, InsightError> {
    if stats.n_arms() < 2 {
        return Err(InsightError::TooFewArms(stats.n_arms()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(InsightError::Epsilon(epsilon));
    }
    let best = argmax(&discover(stats));
    // u < 1 - eps: eps = 0 always exploits, eps = 1 never does.
    if rng.gen::<f64>() < 1.0 - epsilon {
        Ok(best)
    } else {
        Ok(uniform_other(stats.n_arms(), best, rng))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicyKind {
    Replay,
    EpsGreedy { epsilon: f64 },
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Replay => "replay",
            PolicyKind::EpsGreedy { .. } => "epsgreedy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyState {
    Replay { last: Option<Outcome> },
    EpsGreedy { stats: ArmStats, epsilon: f64 },
}

impl PolicyState {
    pub fn fresh(kind: PolicyKind, n_arms: usize) -> Self {
        match kind {
            PolicyKind::Replay => PolicyState::Replay { last: None },
            PolicyKind::EpsGreedy { epsilon } => PolicyState::EpsGreedy { stats: ArmStats::new(n_arms), epsilon },
        }
    }

    pub fn choose(&self, n_arms: usize, rng: &mut SimRng) -> Result<usize, InsightError> {
        match self {
            PolicyState::Replay { last } => replay_choose(last.as_ref(), n_arms, rng),
            PolicyState::EpsGreedy { stats, epsilon } => eps_greedy_choose(stats, *epsilon, rng),
        }
    }

    pub fn observe(&mut self, outcome: Outcome) {
        match self {
            PolicyState::Replay { last } => *last = Some(outcome),
            PolicyState::EpsGreedy { stats, .. } => stats.record(outcome.arm, outcome.reward),
        }
    }
}

/// One trial of `horizon` steps on its own RNG stream; returns per-step rewards.
pub fn run_trial(env: &BanditEnv, policy: PolicyKind, horizon: usize, rng: &mut SimRng) -> Result<Vec<f64>, InsightError> {
    let mut state = PolicyState::fresh(policy, env.n_arms());
    let mut rewards = Vec::with_capacity(horizon);
    for step in 0..horizon {
        let arm = state.choose(env.n_arms(), rng)?;
        let pull = env.pull(arm, rng)?;
        state.observe(Outcome { arm, success: pull.success, reward: pull.reward, step: step as u64 });
        rewards.push(pull.reward);
    }
    Ok(rewards)
}

/// Stream of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> SimRng {
    substream(seed, "bandit-trial", trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditRun {
    pub policy: PolicyKind,
    /// Reward at each step, averaged over trials.
    pub mean_reward: Vec<f64>,
    /// Total reward of each trial.
    pub trial_totals: Vec<f64>,
}

impl BanditRun {
    /// Mean of `mean_reward` over the 1-based inclusive step range.
    pub fn window_mean(&self, first_step: usize, last_step: usize) -> f64 {
        let w = &self.mean_reward[first_step - 1..last_step];
        w.iter().sum::<f64>() / w.len() as f64
    }
}

fn check_run(env: &BanditEnv, policy: PolicyKind, horizon: usize, n_trials: usize) -> Result<(), InsightError> {
    if horizon == 0 || n_trials == 0 {
        return Err(InsightError::EmptyRun);
    }
    if env.n_arms() < 2 {
        return Err(InsightError::TooFewArms(env.n_arms()));
    }
    if let PolicyKind::EpsGreedy { epsilon } = policy {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(InsightError::Epsilon(epsilon));
        }
    }
    Ok(())
}

fn aggregate(policy: PolicyKind, horizon: usize, trials: Vec<Vec<f64>>) -> BanditRun {
    let mut mean_reward = vec![0.0; horizon];
    for t in &trials {
        for (m, r) in mean_reward.iter_mut().zip(t) {
            *m += r;
        }
    }
    let n = trials.len() as f64;
    mean_reward.iter_mut().for_each(|m| *m /= n);
    let trial_totals = trials.iter().map(|t| t.iter().sum()).collect();
    BanditRun { policy, mean_reward, trial_totals }
}

/// Runs `n_trials` independent trials (trial `i` on [`trial_rng`]`(seed, i)`)
/// and averages rewards step by step.
pub fn run_bandit(
    env: &BanditEnv,
    policy: PolicyKind,
    horizon: usize,
    n_trials: usize,
    seed: u64,
) -> Result<BanditRun, InsightError> {
    check_run(env, policy, horizon, n_trials)?;
    let trials = par::map_indexed(n_trials, |i| run_trial(env, policy, horizon, &mut trial_rng(seed, i)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(policy, horizon, trials))
}

/// Same as [`run_bandit`], never using the thread pool.
pub fn run_bandit_sequential(
    env: &BanditEnv,
    policy: PolicyKind,
    horizon: usize,
    n_trials: usize,
    seed: u64,
) -> Result<BanditRun, InsightError> {
    check_run(env, policy, horizon, n_trials)?;
    let trials = par::map_indexed_sequential(n_trials, |i| run_trial(env, policy, horizon, &mut trial_rng(seed, i)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(policy, horizon, trials))
}

/// Replay and ε-greedy on the same trial seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditComparison {
    pub replay: BanditRun,
    pub eps_greedy: BanditRun,
}

pub fn compare_policies(
    env: &BanditEnv,
    epsilon: f64,
    horizon: usize,
    n_trials: usize,
    seed: u64,
) -> Result<BanditComparison, InsightError> {
    Ok(BanditComparison {
        replay: run_bandit(env, PolicyKind::Replay, horizon, n_trials, seed)?,
        eps_greedy: run_bandit(env, PolicyKind::EpsGreedy { epsilon }, horizon, n_trials, seed)?,
    })
}

/// Seed of replication `r` of a whole comparison.
pub fn replication_seed(seed: u64, r: usize) -> u64 {
    substream_key(seed, "bandit-replication", r as u64)
}

pub const CSV_HEADER: &str = "step,mean_reward_replay,mean_reward_epsgreedy";

pub fn write_csv<W: Write>(cmp: &BanditComparison, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (i, (a, b)) in cmp.replay.mean_reward.iter().zip(&cmp.eps_greedy.mean_reward).enumerate() {
        writeln!(out, "{},{a},{b}", i + 1)?;
    }
    Ok(())
}
