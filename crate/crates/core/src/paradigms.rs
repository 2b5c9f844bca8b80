//! The two memory paradigms under a retrieval budget.
//!
//! Both engines run the same per-question loop: search memory, answer if the
//! found information suffices or the budget guard trips, otherwise spend one
//! unit of budget on an external retrieval, store something and search again.
//! They differ only in what gets stored:
//!
//! * [`Paradigm::Stone`] stores the raw retrieved experience and extracts from
//!   it on demand at every search.
//! * [`Paradigm::ExtractThenStore`] extracts the fragment useful for the
//!   current question at retrieval time and stores only that.
//!
//! The guard is `budget < 0` by default ([`BudgetGuard::Literal`]), which
//! allows `initial_budget + 1` retrievals in total. [`BudgetGuard::Strict`]
//! uses `budget <= 0` for a capacity of exactly `initial_budget`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simenv::{Corpus, ExternalSource, Question, SimError};
use crate::store::{
    max_overlap, AgentId, Experience, FactId, FactSource, Fragment, Memory, MemoryStore, TaskId, TokenSet,
};

/// Loop iterations allowed per question before the run is declared broken.
pub const MAX_ITERATIONS_PER_QUESTION: u32 = 3;

#[derive(Debug, Error)]
pub enum ParadigmError {
    #[error("question order refers to question {index}, corpus has {n_questions}")]
    QuestionOutOfRange { index: usize, n_questions: usize },
    #[error("question {q_id} at position {position} needed more than {MAX_ITERATIONS_PER_QUESTION} search rounds")]
    IterationCap { position: usize, q_id: TaskId },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Paradigm {
    Stone,
    ExtractThenStore,
}

impl Paradigm {
    pub fn label(self) -> &'static str {
        match self {
            Paradigm::Stone => "stone",
            Paradigm::ExtractThenStore => "ets",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetGuard {
    /// Answer without retrieving once `budget < 0`.
    #[default]
    Literal,
    /// Answer without retrieving once `budget <= 0`.
    Strict,
}

impl BudgetGuard {
    fn exhausted(self, budget: i64) -> bool {
        match self {
            BudgetGuard::Literal => budget < 0,
            BudgetGuard::Strict => budget <= 0,
        }
    }
}

/// Keeps the facts whose overlap with the question is positive and maximal.
/// `None` means the source holds nothing useful for the question.
pub fn extract<S: FactSource + ?Sized>(source: &S, question: &Question) -> Option<Fragment> {
    extract_for(source, &question.query, question.q_id)
}

/// [`extract`] for a bare token query on behalf of `task`.
pub fn extract_for<S: FactSource + ?Sized>(source: &S, query: &TokenSet, task: TaskId) -> Option<Fragment> {
    let best = max_overlap(source, query);
    if best == 0 {
        return None;
    }
    Fragment::select(source, task, |f| f.tokens().overlap(query) == best)
}

pub fn sufficient(info: Option<&Fragment>, question: &Question) -> bool {
    info.is_some_and(|f| f.contains(question.target))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub q_id: TaskId,
    pub produced_fact: Option<FactId>,
}

impl Answer {
    pub fn is_correct(&self, question: &Question) -> bool {
        self.q_id == question.q_id && self.produced_fact == Some(question.target)
    }
}

/// Answers with the target fact when `info` suffices, otherwise with nothing.
pub fn generate_answer(question: &Question, info: Option<&Fragment>) -> Answer {
    Answer {
        q_id: question.q_id,
        produced_fact: sufficient(info, question).then_some(question.target),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    /// 1-based position in the question order.
    pub question_index: usize,
    pub q_id: TaskId,
    pub correct: bool,
    pub cumulative_correct: usize,
    pub retrievals: u64,
    pub budget_remaining: i64,
    pub store_size_units: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub paradigm: Paradigm,
    pub initial_budget: u32,
    pub records: Vec<QuestionRecord>,
}

impl RunMetrics {
    pub fn correct(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_correct)
    }

    pub fn retrievals(&self) -> u64 {
        self.records.last().map_or(0, |r| r.retrievals)
    }

    pub fn cumulative_correct(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.cumulative_correct).collect()
    }
}

/// Metrics plus the final memory and every experience retrieved along the way.
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub metrics: RunMetrics,
    pub store: MemoryStore,
    pub retrieved: Vec<Experience>,
}

/// What a memory entry offers as information for `question`.
fn information(paradigm: Paradigm, memory: &Memory, question: &Question) -> Option<Fragment> {
    match (paradigm, memory) {
        (Paradigm::Stone, m) => extract(m, question),
        (Paradigm::ExtractThenStore, Memory::Extracted(f)) => Some(f.clone()),
        (Paradigm::ExtractThenStore, Memory::Raw(e)) => Fragment::select(e, question.q_id, |_| true),
    }
}

/// Runs one engine over `order` (indices into `corpus.questions`).
pub fn run_paradigm(
    paradigm: Paradigm,
    corpus: &Corpus,
    order: &[usize],
    initial_budget: u32,
    guard: BudgetGuard,
) -> Result<EngineRun, ParadigmError> {
    let mut store = MemoryStore::new();
    let mut source = ExternalSource::new(corpus, AgentId(0));
    let mut retrieved = Vec::new();
    let mut records = Vec::with_capacity(order.len());
    let mut budget = i64::from(initial_budget);
    let mut correct = 0;

    for (position, &index) in order.iter().enumerate() {
        let question = corpus.questions.get(index).ok_or(ParadigmError::QuestionOutOfRange {
            index,
            n_questions: corpus.questions.len(),
        })?;
        let mut iterations = 0;
        let answer = loop {
            iterations += 1;
            if iterations > MAX_ITERATIONS_PER_QUESTION {
                return Err(ParadigmError::IterationCap { position, q_id: question.q_id });
            }
            let info = store
                .search_best(&question.query)
                .and_then(|e| information(paradigm, e.memory(), question));
            if guard.exhausted(budget) || sufficient(info.as_ref(), question) {
                break generate_answer(question, info.as_ref());
            }
            budget -= 1;
            let experience = source.retrieve_ext(question)?;
            match paradigm {
                Paradigm::Stone => {
                    store.append(Memory::Raw(experience.clone()));
                }
                Paradigm::ExtractThenStore => {
                    if let Some(fragment) = extract(&experience, question) {
                        store.append(Memory::Extracted(fragment));
                    }
                }
            }
            retrieved.push(experience);
        };
        let is_correct = answer.is_correct(question);
        correct += usize::from(is_correct);
        records.push(QuestionRecord {
            question_index: position + 1,
            q_id: question.q_id,
            correct: is_correct,
            cumulative_correct: correct,
            retrievals: source.retrievals(),
            budget_remaining: budget,
            store_size_units: store.size_units(),
        });
    }

    Ok(EngineRun {
        metrics: RunMetrics { paradigm, initial_budget, records },
        store,
        retrieved,
    })
}

pub fn run_stone(corpus: &Corpus, order: &[usize], initial_budget: u32) -> Result<EngineRun, ParadigmError> {
    run_paradigm(Paradigm::Stone, corpus, order, initial_budget, BudgetGuard::Literal)
}

pub fn run_ets(corpus: &Corpus, order: &[usize], initial_budget: u32) -> Result<EngineRun, ParadigmError> {
    run_paradigm(Paradigm::ExtractThenStore, corpus, order, initial_budget, BudgetGuard::Literal)
}

pub const CSV_HEADER: &str =
    "engine,question_index,q_id,correct,cumulative_correct,retrievals,budget_remaining,store_size_units";

/// Writes the runs one after another under a single header.
pub fn write_csv<W: Write>(runs: &[&RunMetrics], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for run in runs {
        for r in &run.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                run.paradigm.label(),
                r.question_index,
                r.q_id,
                u8::from(r.correct),
                r.cumulative_correct,
                r.retrievals,
                r.budget_remaining,
                r.store_size_units
            )?;
        }
    }
    Ok(())
}
