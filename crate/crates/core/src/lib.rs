//! Simulation library for comparing agent experience-memory strategies.
//!
//! Storing raw experience and extracting on demand ([`paradigms::Paradigm::Stone`])
//! is compared with extracting at acquisition time
//! ([`paradigms::Paradigm::ExtractThenStore`]) on a synthetic fact corpus, a
//! stochastic bandit ([`insight`]), a multi-agent shared pool ([`sharing`]) and
//! a memory-size check ([`minimality`]). Every run is a pure function of its
//! configuration and a 64-bit seed; see [`rng`] for how the seed fans out.
//!
//! The `parallel` feature (on by default) spreads independent trials,
//! replications and cases over a rayon pool. Results are identical either way.

pub mod cli;
pub mod insight;
pub mod minimality;
pub mod par;
pub mod paradigms;
pub mod rng;
pub mod sharing;
pub mod simenv;
pub mod store;
