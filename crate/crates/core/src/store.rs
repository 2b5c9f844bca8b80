//! Append-only experience memory.
//!
//! A [`MemoryStore`] holds raw [`Experience`]s and extracted [`Fragment`]s side
//! by side. Relevance of an entry to a query is the largest token overlap
//! between the query and any single fact of the entry. Lookups go through an
//! inverted index from token to `(entry, fact)` postings, so a search touches
//! only entries that share at least one token with the query.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("query has no tokens")]
    EmptyQuery,
    #[error("fact {0} has no tokens")]
    EmptyFact(FactId),
    #[error("invalid token {0:?}: tokens are non-empty runs of [a-z0-9_-]")]
    InvalidToken(String),
    #[error("experience {0} has no facts")]
    EmptyExperience(DocId),
}

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Identifies one atomic unit of information.
    FactId
);
id_type!(DocId);
id_type!(
    /// Identifies a task (a question, a sharing task).
    TaskId
);
id_type!(AgentId);

/// Checks the token alphabet: non-empty, `[a-z0-9_-]` only.
pub fn is_valid_token(token: &str) -> bool {
    !token.is_empty()
        && token
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

/// A sorted, duplicate-free set of lowercase word tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct TokenSet(Vec<String>);

impl TokenSet {
    pub fn new<I, S>(tokens: I) -> Result<Self, StoreError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if let Some(bad) = v.iter().find(|t| !is_valid_token(t)) {
            return Err(StoreError::InvalidToken(bad.clone()));
        }
        v.sort_unstable();
        v.dedup();
        Ok(Self(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.binary_search_by(|t| t.as_str().cmp(token)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// `|self ∩ other|`, by merging the two sorted lists.
    pub fn overlap(&self, other: &TokenSet) -> u32 {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

impl TryFrom<Vec<String>> for TokenSet {
    type Error = StoreError;
    fn try_from(v: Vec<String>) -> Result<Self, StoreError> {
        Self::new(v)
    }
}

impl From<TokenSet> for Vec<String> {
    fn from(t: TokenSet) -> Self {
        t.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fact {
    id: FactId,
    tokens: TokenSet,
}

impl Fact {
    pub fn new(id: FactId, tokens: TokenSet) -> Result<Self, StoreError> {
        if tokens.is_empty() {
            return Err(StoreError::EmptyFact(id));
        }
        Ok(Self { id, tokens })
    }

    pub fn id(&self) -> FactId {
        self.id
    }

    pub fn tokens(&self) -> &TokenSet {
        &self.tokens
    }
}

/// Who obtained an experience, for which task, at which step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub agent: AgentId,
    pub task: TaskId,
    pub step: u64,
}

/// An immutable snapshot of everything observed in one acquisition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Experience {
    doc_id: DocId,
    facts: Vec<Fact>,
    provenance: Provenance,
}

impl Experience {
    pub fn new(doc_id: DocId, facts: Vec<Fact>, provenance: Provenance) -> Result<Self, StoreError> {
        if facts.is_empty() {
            return Err(StoreError::EmptyExperience(doc_id));
        }
        Ok(Self { doc_id, facts, provenance })
    }

    pub fn doc_id(&self) -> DocId {
        self.doc_id
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Same content, ignoring provenance.
    pub fn same_content(&self, other: &Experience) -> bool {
        self.doc_id == other.doc_id && self.facts == other.facts
    }
}

/// A non-empty selection of facts taken verbatim from some source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    facts: Vec<Fact>,
    source_task: TaskId,
}

impl Fragment {
    /// Keeps the facts of `source` accepted by `keep`, in source order.
    /// Returns `None` when nothing is kept.
    pub fn select<S, F>(source: &S, source_task: TaskId, mut keep: F) -> Option<Self>
    where
        S: FactSource + ?Sized,
        F: FnMut(&Fact) -> bool,
    {
        let facts: Vec<Fact> = source.facts().iter().filter(|f| keep(f)).cloned().collect();
        (!facts.is_empty()).then_some(Self { facts, source_task })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn source_task(&self) -> TaskId {
        self.source_task
    }

    pub fn contains(&self, id: FactId) -> bool {
        self.facts.iter().any(|f| f.id == id)
    }

    /// Every fact of the fragment appears verbatim in `experience`.
    pub fn is_subset_of(&self, experience: &Experience) -> bool {
        self.facts.iter().all(|f| experience.facts.contains(f))
    }
}

/// Anything that exposes a list of facts.
pub trait FactSource {
    fn facts(&self) -> &[Fact];
}

impl FactSource for Experience {
    fn facts(&self) -> &[Fact] {
        &self.facts
    }
}

impl FactSource for Fragment {
    fn facts(&self) -> &[Fact] {
        &self.facts
    }
}

impl FactSource for [Fact] {
    fn facts(&self) -> &[Fact] {
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Memory {
    Raw(Experience),
    Extracted(Fragment),
}

impl FactSource for Memory {
    fn facts(&self) -> &[Fact] {
        match self {
            Memory::Raw(e) => e.facts(),
            Memory::Extracted(f) => f.facts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryEntry {
    index: u64,
    memory: Memory,
}

impl MemoryEntry {
    pub fn insertion_index(&self) -> u64 {
        self.index
    }

    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    /// Number of facts this entry occupies.
    pub fn size_units(&self) -> u64 {
        self.facts().len() as u64
    }
}

impl FactSource for MemoryEntry {
    fn facts(&self) -> &[Fact] {
        self.memory.facts()
    }
}

/// Max over the facts of `source` of `|fact.tokens ∩ query|`.
pub fn relevance<S: FactSource + ?Sized>(source: &S, query: &TokenSet) -> Result<u32, StoreError> {
    if query.is_empty() {
        return Err(StoreError::EmptyQuery);
    }
    Ok(max_overlap(source, query))
}

pub(crate) fn max_overlap<S: FactSource + ?Sized>(source: &S, query: &TokenSet) -> u32 {
    source
        .facts()
        .iter()
        .map(|f| f.tokens.overlap(query))
        .max()
        .unwrap_or(0)
}

/// Append-only memory storage.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    entries: Vec<MemoryEntry>,
    // token -> (entry position, fact position)
    postings: HashMap<String, Vec<(u32, u32)>>,
    size_units: u64,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `memory` and returns the insertion index it was given.
    pub fn append(&mut self, memory: Memory) -> u64 {
        let index = self.entries.len() as u64;
        let pos = u32::try_from(self.entries.len()).expect("store exceeds u32::MAX entries");
        for (fi, fact) in memory.facts().iter().enumerate() {
            for tok in fact.tokens.iter() {
                self.postings
                    .entry(tok.to_owned())
                    .or_default()
                    .push((pos, fi as u32));
            }
        }
        let entry = MemoryEntry { index, memory };
        self.size_units += entry.size_units();
        self.entries.push(entry);
        index
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of facts over all entries.
    pub fn size_units(&self) -> u64 {
        self.size_units
    }

    /// Positive relevance scores keyed by entry position.
    fn positive_scores(&self, query: &TokenSet) -> BTreeMap<u32, u32> {
        let mut per_fact: HashMap<(u32, u32), u32> = HashMap::new();
        for tok in query.iter() {
            if let Some(list) = self.postings.get(tok) {
                for &key in list {
                    *per_fact.entry(key).or_insert(0) += 1;
                }
            }
        }
        let mut per_entry = BTreeMap::new();
        for ((entry, _), n) in per_fact {
            let best = per_entry.entry(entry).or_insert(0);
            *best = (*best).max(n);
        }
        per_entry
    }

    /// The most relevant entry; ties go to the smallest insertion index.
    /// `None` when the store is empty or nothing overlaps the query.
    pub fn search_best(&self, query: &TokenSet) -> Option<&MemoryEntry> {
        let mut best: Option<(u32, u32)> = None;
        for (pos, score) in self.positive_scores(query) {
            // BTreeMap iterates in ascending position, so strict > keeps the earliest.
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((pos, score));
            }
        }
        best.map(|(pos, _)| &self.entries[pos as usize])
    }

    /// Every entry with positive relevance, in insertion order.
    pub fn recall_all(&self, query: &TokenSet) -> Vec<&MemoryEntry> {
        self.positive_scores(query)
            .into_keys()
            .map(|pos| &self.entries[pos as usize])
            .collect()
    }

    /// Whether any entry has positive relevance to `query`.
    pub fn any_relevant(&self, query: &TokenSet) -> bool {
        query.iter().any(|t| self.postings.contains_key(t))
    }
}
