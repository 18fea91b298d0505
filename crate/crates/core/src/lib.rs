//! Ensemble prompt optimization engine.
//!
//! The engine improves a task prompt by iterating a generate–search–evaluate
//! loop and then freezing a weighted-voting ensemble of the best diverse
//! candidates:
//!
//! 1. Three generators propose candidates: reflection on a prompt's failing
//!    cases, evolutionary mutation / zero-order synthesis over the current
//!    population, and a tracker-driven rewrite targeting the examples that
//!    fail most often across all prompts.
//! 2. Two searchers pre-select which candidates are worth spending task-model
//!    evaluations on: a Gaussian-process regression over prompt embeddings
//!    scored by expected improvement, and a UCB bandit over k-means clusters
//!    of the candidate pool.
//! 3. The final ensemble picks diverse high scorers, fits simplex-constrained
//!    voting weights against macro-F1, and answers queries by weighted
//!    plurality vote.
//!
//! Everything is deterministic given a seed and scripted model clients; real
//! models plug in through the HTTP client in [`llm`].

pub mod config;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod generators;
pub mod labels;
pub mod llm;
pub mod metrics;
pub mod numerics;
pub mod orchestrator;
pub mod search;
pub mod types;

pub use error::{Error, Result};
pub use labels::{normalize_label, normalize_text, parse_label, LabelSpace};
pub use types::{
    CandidatePool, CaseResult, Dataset, EvaluationRecord, Example, GeneratedPrompt, Metric,
    Origin, PoolInsert, Prediction, PredictionMatrix, PromptCandidate, INVALID_SENTINEL,
};
