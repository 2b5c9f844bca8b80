//! Memory-size comparison between raw storage and zero-loss extraction.
//!
//! Given one experience and a set of future tasks, raw storage keeps the
//! experience once. Extract-then-store has to keep one extraction per task,
//! and if no fact may be lost every fact must land in at least one
//! extraction. Overlapping extractions are stored as-is, so the extracted
//! memory is never smaller than the raw one and is strictly larger as soon
//! as one fact is needed by two tasks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paradigms::extract_for;
use crate::par;
use crate::rng::{substream, SimRng};
use crate::store::{
    AgentId, DocId, Experience, Fact, FactId, Memory, MemoryStore, Provenance, TaskId, TokenSet,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinimalityError {
    #[error("task set is empty")]
    EmptyTaskSet,
    #[error("zero-loss extraction impossible: facts {0:?} are useful to no task")]
    Uncovered(Vec<FactId>),
    #[error("case count must be >= 1")]
    NoCases,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FutureTask {
    pub id: TaskId,
    pub query: TokenSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet(Vec<FutureTask>);

impl TaskSet {
    pub fn new(tasks: Vec<FutureTask>) -> Result<Self, MinimalityError> {
        if tasks.is_empty() {
            return Err(MinimalityError::EmptyTaskSet);
        }
        Ok(Self(tasks))
    }

    pub fn tasks(&self) -> &[FutureTask] {
        &self.0
    }
}

/// Raw storage: the experience itself.
pub fn build_stone(experience: &Experience) -> MemoryStore {
    let mut s = MemoryStore::new();
    s.append(Memory::Raw(experience.clone()));
    s
}

/// One extracted entry per task, overlaps kept. Fails if some fact of the
/// experience is extracted by no task.
pub fn build_ets_zero_loss(experience: &Experience, tasks: &TaskSet) -> Result<MemoryStore, MinimalityError> {
    let extractions: Vec<_> = tasks
        .tasks()
        .iter()
        .map(|t| extract_for(experience, &t.query, t.id))
        .collect();
    let covered: BTreeSet<FactId> = extractions
        .iter()
        .flatten()
        .flat_map(|f| f.facts().iter().map(Fact::id))
        .collect();
    let uncovered: Vec<FactId> = experience
        .facts()
        .iter()
        .map(Fact::id)
        .filter(|id| !covered.contains(id))
        .collect();
    if !uncovered.is_empty() {
        return Err(MinimalityError::Uncovered(uncovered));
    }
    let mut store = MemoryStore::new();
    for fragment in extractions.into_iter().flatten() {
        store.append(Memory::Extracted(fragment));
    }
    Ok(store)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n_facts: usize,
    pub n_tasks: usize,
    pub size_stone: u64,
    pub size_ets: u64,
    pub holds: bool,
    /// Some fact is covered by two or more tasks.
    pub overlapping: bool,
}

/// A generated input: an experience and tasks, each task given as the set
/// of fact positions it needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub experience: Experience,
    pub tasks: TaskSet,
    pub coverage: Vec<Vec<usize>>,
}

impl Case {
    /// Builds a case where task `i` needs exactly the facts `coverage[i]`.
    pub fn from_coverage(n_facts: usize, coverage: Vec<Vec<usize>>, case_id: u32) -> Result<Self, MinimalityError> {
        let facts: Vec<Fact> = (0..n_facts)
            .map(|i| {
                let tokens = TokenSet::new([format!("x{i}"), "note".to_owned()]).expect("valid tokens");
                Fact::new(FactId(i as u32), tokens).expect("non-empty")
            })
            .collect();
        let provenance = Provenance { agent: AgentId(0), task: TaskId(case_id), step: 0 };
        let experience = Experience::new(DocId(case_id), facts, provenance).expect("at least one fact");
        let tasks = coverage
            .iter()
            .enumerate()
            .map(|(t, need)| FutureTask {
                id: TaskId(t as u32),
                query: TokenSet::new(need.iter().map(|i| format!("x{i}"))).expect("valid tokens"),
            })
            .collect();
        Ok(Self { experience, tasks: TaskSet::new(tasks)?, coverage })
    }

    pub fn overlapping(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.coverage.iter().flatten().any(|f| !seen.insert(*f))
    }
}

pub fn check_case(case: &Case) -> Result<SizeReport, MinimalityError> {
    let size_stone = build_stone(&case.experience).size_units();
    let size_ets = build_ets_zero_loss(&case.experience, &case.tasks)?.size_units();
    Ok(SizeReport {
        n_facts: case.experience.facts().len(),
        n_tasks: case.tasks.tasks().len(),
        size_stone,
        size_ets,
        holds: size_stone <= size_ets,
        overlapping: case.overlapping(),
    })
}

/// Random covering case: 1..=12 facts, 1..=6 non-empty tasks, every fact
/// needed by at least one task. About half the cases add extra coverage.
pub fn gen_case(rng: &mut SimRng, case_id: u32) -> Case {
    let n_facts = rng.gen_range(1..=12);
    let k = rng.gen_range(1..=n_facts.min(6));
    let mut order: Vec<usize> = (0..n_facts).collect();
    order.shuffle(rng);
    let mut coverage = vec![Vec::new(); k];
    for (j, &f) in order.iter().enumerate() {
        let t = if j < k { j } else { rng.gen_range(0..k) };
        coverage[t].push(f);
    }
    if rng.gen_bool(0.5) {
        let extra = rng.gen_range(0.1..0.6);
        for need in coverage.iter_mut() {
            for f in 0..n_facts {
                if !need.contains(&f) && rng.gen_bool(extra) {
                    need.push(f);
                }
            }
        }
    }
    for need in &mut coverage {
        need.sort_unstable();
    }
    Case::from_coverage(n_facts, coverage, case_id).expect("k >= 1")
}

/// Like [`gen_case`] but with one fact removed from every task.
pub fn gen_uncovered_case(rng: &mut SimRng, case_id: u32) -> Case {
    loop {
        let mut case = gen_case(rng, case_id);
        let n = case.experience.facts().len();
        let dropped = rng.gen_range(0..n);
        for need in &mut case.coverage {
            need.retain(|&f| f != dropped);
        }
        if case.coverage.iter().all(|c| !c.is_empty()) {
            return Case::from_coverage(n, case.coverage, case_id).expect("k >= 1");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub case_index: usize,
    pub case: Case,
    pub report: Option<SizeReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub schema_version: u32,
    pub seed: u64,
    pub cases: usize,
    pub holds_count: usize,
    pub strict_count: usize,
    pub overlapping_count: usize,
    pub counterexamples: Vec<Counterexample>,
    pub reports: Vec<SizeReport>,
}

pub fn case_rng(seed: u64, index: usize) -> SimRng {
    substream(seed, "minimality-case", index as u64)
}

fn evaluate(i: usize, seed: u64) -> (Case, Result<SizeReport, MinimalityError>) {
    let case = gen_case(&mut case_rng(seed, i), i as u32);
    let result = check_case(&case);
    (case, result)
}

fn summarize(seed: u64, results: Vec<(Case, Result<SizeReport, MinimalityError>)>) -> MinimalityReport {
    let mut report = MinimalityReport {
        schema_version: SCHEMA_VERSION,
        seed,
        cases: results.len(),
        holds_count: 0,
        strict_count: 0,
        overlapping_count: 0,
        counterexamples: Vec::new(),
        reports: Vec::with_capacity(results.len()),
    };
    for (i, (case, result)) in results.into_iter().enumerate() {
        match result {
            Ok(r) => {
                report.holds_count += usize::from(r.holds);
                report.strict_count += usize::from(r.size_stone < r.size_ets);
                report.overlapping_count += usize::from(r.overlapping);
                // Raw size is |E| exactly, and strictness must coincide with overlap.
                let consistent = r.holds
                    && r.size_stone == case.experience.facts().len() as u64
                    && (r.size_stone < r.size_ets) == r.overlapping;
                if !consistent {
                    report.counterexamples.push(Counterexample { case_index: i, case, report: Some(r), error: None });
                }
                report.reports.push(r);
            }
            Err(e) => report.counterexamples.push(Counterexample {
                case_index: i,
                case,
                report: None,
                error: Some(e.to_string()),
            }),
        }
    }
    report
}

/// Generates and checks `n_cases` covering cases (case `i` on
/// [`case_rng`]`(seed, i)`).
pub fn check_minimality(n_cases: usize, seed: u64) -> Result<MinimalityReport, MinimalityError> {
    if n_cases == 0 {
        return Err(MinimalityError::NoCases);
    }
    Ok(summarize(seed, par::map_indexed(n_cases, |i| evaluate(i, seed))))
}

pub fn check_minimality_sequential(n_cases: usize, seed: u64) -> Result<MinimalityReport, MinimalityError> {
    if n_cases == 0 {
        return Err(MinimalityError::NoCases);
    }
    Ok(summarize(seed, par::map_indexed_sequential(n_cases, |i| evaluate(i, seed))))
}
