//! Deterministic synthetic environments.
//!
//! * a fact corpus with single-fact questions and an external document source,
//! * a stochastic multi-armed bandit,
//! * a rule-tagged task stream whose success probability depends on whether
//!   the acting agent's memory holds a trajectory for the task's rule.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{substream, SimRng};
use crate::store::{
    AgentId, DocId, Experience, Fact, FactId, MemoryStore, Provenance, StoreError, TaskId, TokenSet,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("question {0} does not belong to this corpus")]
    ForeignQuestion(TaskId),
    #[error("arm index {index} out of range for {n_arms} arms")]
    ArmOutOfRange { index: usize, n_arms: usize },
    #[error("corpus text line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("corpus invariant violated: {0}")]
    Invalid(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Topic words shared across facts. Facts draw several of these, so plain
/// topic overlap is ambiguous; a per-fact marker token disambiguates.
const TOPIC_WORDS: &[&str] = &[
    "refund", "policy", "days", "travel", "expense", "approval", "manager", "receipt", "overtime",
    "leave", "payroll", "laptop", "security", "badge", "visitor", "contract", "vendor", "invoice",
    "training", "remote", "office", "parking", "holiday", "bonus", "audit", "budget", "hiring",
    "onboarding", "insurance", "pension", "meal", "hotel",
];
const TOPICS_PER_FACT: usize = 3;

fn marker(id: FactId) -> String {
    format!("k{}", id.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: DocId,
    pub facts: Vec<Fact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub q_id: TaskId,
    pub query: TokenSet,
    pub target: FactId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub docs: Vec<Document>,
    pub questions: Vec<Question>,
    pub seed: u64,
}

/// Generates a corpus of `n_docs` documents with `facts_per_doc` facts each and
/// `questions_per_doc` questions per document, each targeting a distinct fact.
pub fn gen_corpus(
    n_docs: usize,
    facts_per_doc: usize,
    questions_per_doc: usize,
    seed: u64,
) -> Result<Corpus, SimError> {
    if n_docs == 0 || facts_per_doc == 0 || questions_per_doc == 0 {
        return Err(SimError::Config("docs, facts and questions per doc must all be >= 1".into()));
    }
    if questions_per_doc > facts_per_doc {
        return Err(SimError::Config(format!(
            "questions per doc ({questions_per_doc}) exceeds facts per doc ({facts_per_doc})"
        )));
    }
    if n_docs
        .checked_mul(facts_per_doc)
        .is_none_or(|t| t > u32::MAX as usize)
    {
        return Err(SimError::Config("corpus too large".into()));
    }

    let mut rng = substream(seed, "corpus", 0);
    let mut docs = Vec::with_capacity(n_docs);
    let mut questions = Vec::with_capacity(n_docs * questions_per_doc);
    for d in 0..n_docs {
        let mut facts = Vec::with_capacity(facts_per_doc);
        for k in 0..facts_per_doc {
            let id = FactId((d * facts_per_doc + k) as u32);
            let topics = sample(&mut rng, TOPIC_WORDS.len(), TOPICS_PER_FACT);
            let tokens = TokenSet::new(
                topics
                    .iter()
                    .map(|i| TOPIC_WORDS[i].to_owned())
                    .chain(std::iter::once(marker(id))),
            )?;
            facts.push(Fact::new(id, tokens)?);
        }
        for k in sample(&mut rng, facts_per_doc, questions_per_doc).iter() {
            let target = &facts[k];
            let n_topics = rng.gen_range(1..=2);
            let own_marker = marker(target.id());
            let topic_words: Vec<&str> = target.tokens().iter().filter(|t| *t != own_marker).collect();
            let picked = sample(&mut rng, topic_words.len(), n_topics);
            let query = TokenSet::new(
                picked
                    .iter()
                    .map(|i| topic_words[i].to_owned())
                    .chain(std::iter::once(marker(target.id()))),
            )?;
            questions.push(Question {
                q_id: TaskId(questions.len() as u32),
                query,
                target: target.id(),
            });
        }
        docs.push(Document { doc_id: DocId(d as u32), facts });
    }
    Ok(Corpus { docs, questions, seed })
}

impl Corpus {
    pub fn document_of(&self, fact: FactId) -> Option<&Document> {
        self.docs.iter().find(|d| d.facts.iter().any(|f| f.id() == fact))
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        self.docs.iter().flat_map(|d| &d.facts).find(|f| f.id() == id)
    }

    /// Checks every corpus invariant exhaustively: unique fact ids, each target
    /// in exactly one document, distinct targets, unique-answer property.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut seen = std::collections::HashSet::new();
        for f in self.docs.iter().flat_map(|d| &d.facts) {
            if !seen.insert(f.id()) {
                return Err(SimError::Invalid(format!("fact {} appears more than once", f.id())));
            }
        }
        let mut targets = std::collections::HashSet::new();
        for (i, q) in self.questions.iter().enumerate() {
            if q.q_id.0 as usize != i {
                return Err(SimError::Invalid(format!("question at position {i} has id {}", q.q_id)));
            }
            if q.query.is_empty() {
                return Err(SimError::Invalid(format!("question {} has an empty query", q.q_id)));
            }
            if !seen.contains(&q.target) {
                return Err(SimError::Invalid(format!("question {} targets unknown fact {}", q.q_id, q.target)));
            }
            if !targets.insert(q.target) {
                return Err(SimError::Invalid(format!("fact {} is targeted twice", q.target)));
            }
            let target_score = self.fact(q.target).map(|f| f.tokens().overlap(&q.query)).unwrap_or(0);
            for f in self.docs.iter().flat_map(|d| &d.facts) {
                if f.id() != q.target && f.tokens().overlap(&q.query) >= target_score {
                    return Err(SimError::Invalid(format!(
                        "question {} does not single out fact {} (fact {} scores as high)",
                        q.q_id,
                        q.target,
                        f.id()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Line-oriented text form:
    ///
    /// ```text
    /// mnemos-corpus v1
    /// seed <u64>
    /// doc <doc_id> <fact_id>:<tok>,<tok>,... <fact_id>:...
    /// question <q_id> <target_fact_id> <tok>,<tok>,...
    /// ```
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("mnemos-corpus v1\n");
        let _ = writeln!(out, "seed {}", self.seed);
        for d in &self.docs {
            let _ = write!(out, "doc {}", d.doc_id);
            for f in &d.facts {
                let _ = write!(out, " {}:{}", f.id(), f.tokens().iter().collect::<Vec<_>>().join(","));
            }
            out.push('\n');
        }
        for q in &self.questions {
            let _ = writeln!(
                out,
                "question {} {} {}",
                q.q_id,
                q.target,
                q.query.iter().collect::<Vec<_>>().join(",")
            );
        }
        out
    }

    /// Parses [`Corpus::to_text`] output and validates the result.
    pub fn from_text(text: &str) -> Result<Corpus, SimError> {
        let err = |line: usize, msg: &str| SimError::Parse { line, msg: msg.to_owned() };
        let parse_u32 = |line: usize, s: &str| s.parse::<u32>().map_err(|_| err(line, "expected an integer"));
        let parse_tokens =
            |line: usize, s: &str| TokenSet::new(s.split(',')).map_err(|e| err(line, &e.to_string()));

        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "mnemos-corpus v1")) => {}
            _ => return Err(err(1, "missing header `mnemos-corpus v1`")),
        }
        let seed = match lines.next() {
            Some((n, l)) => l
                .strip_prefix("seed ")
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| err(n, "expected `seed <u64>`"))?,
            None => return Err(err(2, "missing seed line")),
        };
        let mut docs = Vec::new();
        let mut questions = Vec::new();
        for (n, line) in lines {
            let mut parts = line.split(' ');
            match parts.next() {
                Some("doc") => {
                    let doc_id = DocId(parse_u32(n, parts.next().unwrap_or(""))?);
                    let mut facts = Vec::new();
                    for item in parts {
                        let (id, toks) = item.split_once(':').ok_or_else(|| err(n, "expected `<id>:<tokens>`"))?;
                        facts.push(Fact::new(FactId(parse_u32(n, id)?), parse_tokens(n, toks)?)?);
                    }
                    if facts.is_empty() {
                        return Err(err(n, "document without facts"));
                    }
                    docs.push(Document { doc_id, facts });
                }
                Some("question") => {
                    let q_id = TaskId(parse_u32(n, parts.next().unwrap_or(""))?);
                    let target = FactId(parse_u32(n, parts.next().unwrap_or(""))?);
                    let query = parse_tokens(n, parts.next().unwrap_or(""))?;
                    if parts.next().is_some() {
                        return Err(err(n, "trailing fields"));
                    }
                    questions.push(Question { q_id, query, target });
                }
                Some("") if line.is_empty() => {}
                _ => return Err(err(n, "unknown record")),
            }
        }
        let corpus = Corpus { docs, questions, seed };
        corpus.validate()?;
        Ok(corpus)
    }
}

/// The external document database, handing out fresh snapshots.
#[derive(Debug)]
pub struct ExternalSource<'a> {
    corpus: &'a Corpus,
    agent: AgentId,
    step: u64,
}

impl<'a> ExternalSource<'a> {
    pub fn new(corpus: &'a Corpus, agent: AgentId) -> Self {
        Self { corpus, agent, step: 0 }
    }

    /// Number of retrievals served so far.
    pub fn retrievals(&self) -> u64 {
        self.step
    }

    /// Snapshots the document holding `question.target`.
    pub fn retrieve_ext(&mut self, question: &Question) -> Result<Experience, SimError> {
        if self.corpus.questions.get(question.q_id.0 as usize) != Some(question) {
            return Err(SimError::ForeignQuestion(question.q_id));
        }
        let doc = self
            .corpus
            .document_of(question.target)
            .ok_or(SimError::ForeignQuestion(question.q_id))?;
        let provenance = Provenance { agent: self.agent, task: question.q_id, step: self.step };
        self.step += 1;
        Ok(Experience::new(doc.doc_id, doc.facts.clone(), provenance)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub success_prob: f64,
    pub reward: f64,
}

impl Arm {
    pub fn expected_value(&self) -> f64 {
        self.success_prob * self.reward
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditEnv {
    arms: Vec<Arm>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullOutcome {
    pub success: bool,
    pub reward: f64,
}

impl BanditEnv {
    pub fn new(arms: Vec<Arm>) -> Result<Self, SimError> {
        if arms.len() < 2 {
            return Err(SimError::Config("a bandit needs at least 2 arms".into()));
        }
        for (i, a) in arms.iter().enumerate() {
            if !(0.0..=1.0).contains(&a.success_prob) {
                return Err(SimError::Config(format!("arm {i}: success probability must be in [0, 1]")));
            }
            if !(a.reward.is_finite() && a.reward > 0.0) {
                return Err(SimError::Config(format!("arm {i}: reward must be positive and finite")));
            }
        }
        Ok(Self { arms })
    }

    /// Arms (0.8, 1.0), (0.5, 2.0), (0.1, 12.0): expected values 0.8, 1.0, 1.2.
    pub fn default_three_arm() -> Self {
        Self {
            arms: vec![
                Arm { success_prob: 0.8, reward: 1.0 },
                Arm { success_prob: 0.5, reward: 2.0 },
                Arm { success_prob: 0.1, reward: 12.0 },
            ],
        }
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    /// Pulls `arm`: success with the arm's probability, paying its reward.
    /// Consumes exactly one uniform draw.
    pub fn pull(&self, arm: usize, rng: &mut SimRng) -> Result<PullOutcome, SimError> {
        let a = self
            .arms
            .get(arm)
            .ok_or(SimError::ArmOutOfRange { index: arm, n_arms: self.arms.len() })?;
        let success = rng.gen::<f64>() < a.success_prob;
        Ok(PullOutcome { success, reward: if success { a.reward } else { 0.0 } })
    }

    /// Scales every reward by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self, SimError> {
        Self::new(self.arms.iter().map(|a| Arm { reward: a.reward * c, ..*a }).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(pub u32);

/// The tag a trajectory for `rule` carries in memory.
pub fn rule_token(rule: RuleId) -> String {
    format!("rule-{}", rule.0)
}

pub fn rule_query(rule: RuleId) -> TokenSet {
    TokenSet::new([rule_token(rule)]).expect("rule tokens are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharingTask {
    pub q_id: TaskId,
    pub rule_id: RuleId,
}

/// Two-level success model: `p_base` without a trajectory for the task's
/// rule in memory, `p_boost` with one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessModel {
    pub p_base: f64,
    pub p_boost: f64,
}

impl Default for SuccessModel {
    fn default() -> Self {
        Self { p_base: 0.3, p_boost: 0.9 }
    }
}

impl SuccessModel {
    pub fn new(p_base: f64, p_boost: f64) -> Result<Self, SimError> {
        for (name, p) in [("p_base", p_base), ("p_boost", p_boost)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if p_boost < p_base {
            return Err(SimError::Config("p_boost must be >= p_base".into()));
        }
        Ok(Self { p_base, p_boost })
    }

    pub fn probability(&self, has_rule: bool) -> f64 {
        if has_rule {
            self.p_boost
        } else {
            self.p_base
        }
    }

    /// Runs `task` against `pool`. Consumes exactly one uniform draw.
    pub fn attempt(&self, task: &SharingTask, pool: &MemoryStore, rng: &mut SimRng) -> bool {
        let p = self.probability(pool.any_relevant(&rule_query(task.rule_id)));
        rng.gen::<f64>() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Memory, TaskId};
    use proptest::prelude::*;

    #[test]
    fn small_corpus_counts_and_invariants() {
        let c = gen_corpus(2, 3, 3, 7).unwrap();
        assert_eq!(c.docs.len(), 2);
        assert_eq!(c.questions.len(), 6);
        let targets: std::collections::HashSet<_> = c.questions.iter().map(|q| q.target).collect();
        assert_eq!(targets.len(), 6);
        c.validate().unwrap();
    }

    #[test]
    fn degenerate_minimum_corpus() {
        let c = gen_corpus(1, 1, 1, 123).unwrap();
        assert_eq!(c.docs.len(), 1);
        assert_eq!(c.docs[0].facts.len(), 1);
        assert_eq!(c.questions.len(), 1);
        assert_eq!(c.questions[0].target, c.docs[0].facts[0].id());
    }

    #[test]
    fn corpus_generation_is_deterministic() {
        let a = gen_corpus(5, 4, 2, 99).unwrap();
        let b = gen_corpus(5, 4, 2, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a.to_text(), gen_corpus(5, 4, 2, 100).unwrap().to_text());
    }

    #[test]
    fn bad_corpus_parameters() {
        assert!(matches!(gen_corpus(0, 1, 1, 0), Err(SimError::Config(_))));
        assert!(matches!(gen_corpus(1, 0, 1, 0), Err(SimError::Config(_))));
        assert!(matches!(gen_corpus(1, 1, 0, 0), Err(SimError::Config(_))));
        assert!(matches!(gen_corpus(1, 2, 3, 0), Err(SimError::Config(_))));
    }

    #[test]
    fn retrieve_returns_target_document() {
        let c = gen_corpus(3, 4, 2, 1).unwrap();
        let mut src = ExternalSource::new(&c, AgentId(0));
        for q in &c.questions {
            let doc = c.docs.iter().find(|d| d.facts.iter().any(|f| f.id() == q.target)).unwrap();
            let e = src.retrieve_ext(q).unwrap();
            assert_eq!(e.doc_id(), doc.doc_id);
            assert_eq!(e.facts(), &doc.facts[..]);
        }
        assert_eq!(src.retrievals(), c.questions.len() as u64);
    }

    #[test]
    fn repeated_retrieval_differs_only_in_step() {
        let c = gen_corpus(2, 2, 1, 5).unwrap();
        let mut src = ExternalSource::new(&c, AgentId(3));
        let a = src.retrieve_ext(&c.questions[1]).unwrap();
        let b = src.retrieve_ext(&c.questions[1]).unwrap();
        assert!(a.same_content(&b));
        assert_ne!(a, b);
        assert_eq!(a.provenance().step + 1, b.provenance().step);
        assert_eq!(b.provenance().agent, AgentId(3));
    }

    #[test]
    fn retrieve_from_single_fact_document() {
        let c = gen_corpus(1, 1, 1, 5).unwrap();
        let e = ExternalSource::new(&c, AgentId(0)).retrieve_ext(&c.questions[0]).unwrap();
        assert_eq!(e.facts().len(), 1);
        assert_eq!(e.facts()[0].id(), c.questions[0].target);
    }

    #[test]
    fn foreign_question_rejected() {
        let c = gen_corpus(2, 2, 1, 5).unwrap();
        let other = gen_corpus(2, 2, 1, 6).unwrap();
        let mut src = ExternalSource::new(&c, AgentId(0));
        let mut q = other.questions[0].clone();
        if q == c.questions[0] {
            q.q_id = TaskId(99);
        }
        assert!(matches!(src.retrieve_ext(&q), Err(SimError::ForeignQuestion(_))));
        let beyond = Question { q_id: TaskId(50), ..c.questions[0].clone() };
        assert!(matches!(src.retrieve_ext(&beyond), Err(SimError::ForeignQuestion(_))));
    }

    #[test]
    fn corpus_text_rejects_garbage() {
        assert!(matches!(Corpus::from_text("nope"), Err(SimError::Parse { line: 1, .. })));
        let c = gen_corpus(2, 2, 1, 5).unwrap();
        let bad = c.to_text().replace("question 0", "question zero");
        assert!(matches!(Corpus::from_text(&bad), Err(SimError::Parse { .. })));
        // A question whose query no longer singles out its target.
        let mut broken = c.clone();
        broken.questions[0].query = TokenSet::new(["refund"]).unwrap();
        assert!(matches!(Corpus::from_text(&broken.to_text()), Err(SimError::Invalid(_)) | Err(SimError::Parse { .. })));
    }

    fn rng(seed: u64) -> SimRng {
        substream(seed, "test", 0)
    }

    #[test]
    fn certain_and_impossible_arms() {
        let env = BanditEnv::new(vec![
            Arm { success_prob: 1.0, reward: 2.0 },
            Arm { success_prob: 0.0, reward: 5.0 },
        ])
        .unwrap();
        let mut r = rng(1);
        for _ in 0..1000 {
            assert_eq!(env.pull(0, &mut r).unwrap(), PullOutcome { success: true, reward: 2.0 });
            assert_eq!(env.pull(1, &mut r).unwrap(), PullOutcome { success: false, reward: 0.0 });
        }
    }

    #[test]
    fn pull_mean_matches_expected_value() {
        // Analytic mean p * r = 0.5 * 2.0 = 1.0.
        let env = BanditEnv::new(vec![
            Arm { success_prob: 0.5, reward: 2.0 },
            Arm { success_prob: 0.1, reward: 1.0 },
        ])
        .unwrap();
        let mut r = rng(2);
        let n = 100_000;
        let total: f64 = (0..n).map(|_| env.pull(0, &mut r).unwrap().reward).sum();
        assert!((total / n as f64 - 1.0).abs() <= 0.02, "mean {}", total / n as f64);
    }

    #[test]
    fn pull_out_of_range() {
        let env = BanditEnv::default_three_arm();
        assert_eq!(
            env.pull(3, &mut rng(0)),
            Err(SimError::ArmOutOfRange { index: 3, n_arms: 3 })
        );
    }

    #[test]
    fn default_bandit_values() {
        let env = BanditEnv::default_three_arm();
        let ev: Vec<f64> = env.arms().iter().map(Arm::expected_value).collect();
        for (got, want) in ev.iter().zip([0.8, 1.0, 1.2]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_bandits() {
        assert!(BanditEnv::new(vec![Arm { success_prob: 0.5, reward: 1.0 }]).is_err());
        assert!(BanditEnv::new(vec![Arm { success_prob: 1.5, reward: 1.0 }; 2]).is_err());
        assert!(BanditEnv::new(vec![Arm { success_prob: 0.5, reward: 0.0 }; 2]).is_err());
        assert!(SuccessModel::new(0.9, 0.3).is_err());
        assert!(SuccessModel::new(-0.1, 0.3).is_err());
    }

    fn pool_with_rule(rule: RuleId) -> MemoryStore {
        let mut pool = MemoryStore::new();
        let fact = Fact::new(FactId(0), rule_query(rule)).unwrap();
        let prov = Provenance { agent: AgentId(0), task: TaskId(0), step: 0 };
        pool.append(Memory::Raw(Experience::new(DocId(0), vec![fact], prov).unwrap()));
        pool
    }

    #[test]
    fn success_model_extremes() {
        let task = SharingTask { q_id: TaskId(0), rule_id: RuleId(4) };
        let mut r = rng(3);
        let never = SuccessModel::new(0.0, 1.0).unwrap();
        let empty = MemoryStore::new();
        let with_rule = pool_with_rule(RuleId(4));
        let other_rule = pool_with_rule(RuleId(5));
        for _ in 0..1000 {
            assert!(!never.attempt(&task, &empty, &mut r));
            assert!(!never.attempt(&task, &other_rule, &mut r));
            assert!(never.attempt(&task, &with_rule, &mut r));
        }
    }

    #[test]
    fn success_model_mixture_rate() {
        // Half the trials see the rule: 0.5 * 0.3 + 0.5 * 0.9 = 0.6.
        let model = SuccessModel::new(0.3, 0.9).unwrap();
        let task = SharingTask { q_id: TaskId(0), rule_id: RuleId(1) };
        let with_rule = pool_with_rule(RuleId(1));
        let empty = MemoryStore::new();
        let mut r = rng(4);
        let n = 10_000;
        let hits = (0..n)
            .filter(|i| model.attempt(&task, if i % 2 == 0 { &with_rule } else { &empty }, &mut r))
            .count();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.6).abs() <= 0.03, "rate {rate}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn generated_corpora_are_valid_and_round_trip(
            docs in 1usize..8, facts in 1usize..8, qfrac in 0.0f64..1.0, seed in any::<u64>()
        ) {
            let qs = 1 + ((facts - 1) as f64 * qfrac) as usize;
            let c = gen_corpus(docs, facts, qs, seed).unwrap();
            prop_assert_eq!(c.questions.len(), docs * qs);
            c.validate().unwrap();
            for q in &c.questions {
                prop_assert_eq!(c.document_of(q.target).into_iter().count(), 1);
            }
            let back = Corpus::from_text(&c.to_text()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
