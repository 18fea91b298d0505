//! Domain types shared across the engine.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{normalize_label, normalize_text, LabelSpace};

/// Sentinel used when serializing an unparseable prediction. Normalized
/// labels are casefolded, so this uppercase form cannot collide with one.
pub const INVALID_SENTINEL: &str = "__INVALID__";

/// A single task example: an input and the expected label.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Example {
    pub id: String,
    pub input: String,
    pub expected: String,
}

/// Which evaluation metric a task optimizes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MacroF1,
    Accuracy,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::MacroF1 => write!(f, "macro_f1"),
            Metric::Accuracy => write!(f, "accuracy"),
        }
    }
}

/// An evaluation task: examples, the admissible labels, and the metric.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub label_space: LabelSpace,
    pub metric: Metric,
}

impl Dataset {
    /// Checks the dataset invariants: non-empty, unique ids, non-empty
    /// expected labels, and (for closed spaces) expected ∈ label space.
    pub fn validate(&self) -> Result<()> {
        if self.examples.is_empty() {
            return Err(Error::contract("dataset has no examples"));
        }
        let mut seen = HashMap::new();
        for ex in &self.examples {
            if let Some(prev) = seen.insert(ex.id.clone(), ()) {
                let _ = prev;
                return Err(Error::contract(format!("duplicate example id `{}`", ex.id)));
            }
            if ex.expected.trim().is_empty() {
                return Err(Error::contract(format!(
                    "example `{}` has an empty expected label",
                    ex.id
                )));
            }
            if !self.label_space.is_open() && !self.label_space.contains(&ex.expected) {
                return Err(Error::contract(format!(
                    "example `{}` expects `{}`, which is not in the label space",
                    ex.id, ex.expected
                )));
            }
        }
        Ok(())
    }

    pub fn golds(&self) -> Vec<String> {
        self.examples.iter().map(|e| e.expected.clone()).collect()
    }
}

/// Which generation strategy produced a candidate prompt.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Seed,
    BadCaseReflection,
    EvolutionaryMutation,
    EvolutionaryZeroOrder,
    HardCaseTracking,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Origin::Seed => "seed",
            Origin::BadCaseReflection => "bad_case_reflection",
            Origin::EvolutionaryMutation => "evolutionary_mutation",
            Origin::EvolutionaryZeroOrder => "evolutionary_zero_order",
            Origin::HardCaseTracking => "hard_case_tracking",
        };
        write!(f, "{name}")
    }
}

/// A candidate prompt with its provenance, and — once computed — its
/// embedding and evaluated score.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PromptCandidate {
    pub id: String,
    pub text: String,
    pub origin: Origin,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl PromptCandidate {
    pub fn new(id: impl Into<String>, text: impl Into<String>, origin: Origin) -> Self {
        PromptCandidate {
            id: id.into(),
            text: text.into(),
            origin,
            embedding: None,
            score: None,
        }
    }
}

/// A prompt text fresh out of a generator, before the pool assigns an id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPrompt {
    pub text: String,
    pub origin: Origin,
}

/// A parsed model prediction. `Invalid` marks unparseable output; it is a
/// value, never an error, and is always scored incorrect.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prediction {
    Valid(String),
    Invalid,
}

impl Prediction {
    pub fn as_valid(&self) -> Option<&str> {
        match self {
            Prediction::Valid(s) => Some(s),
            Prediction::Invalid => None,
        }
    }

    /// Normalized match against a gold label; `Invalid` never matches.
    pub fn matches(&self, gold: &str) -> bool {
        match self {
            Prediction::Valid(s) => normalize_label(s) == normalize_label(gold),
            Prediction::Invalid => false,
        }
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Valid(s) => write!(f, "{s}"),
            Prediction::Invalid => write!(f, "{INVALID_SENTINEL}"),
        }
    }
}

impl Serialize for Prediction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Prediction::Valid(s) => serializer.serialize_str(s),
            Prediction::Invalid => serializer.serialize_str(INVALID_SENTINEL),
        }
    }
}

impl<'de> Deserialize<'de> for Prediction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s == INVALID_SENTINEL {
            Ok(Prediction::Invalid)
        } else {
            Ok(Prediction::Valid(s))
        }
    }
}

/// One example's outcome under one prompt.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CaseResult {
    pub example_id: String,
    pub raw_output: String,
    pub prediction: Prediction,
    pub correct: bool,
}

/// A full evaluation of one prompt over an example set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvaluationRecord {
    pub prompt_id: String,
    pub per_example: Vec<CaseResult>,
    pub aggregate: f64,
    pub metric: Metric,
}

impl EvaluationRecord {
    /// Recomputes the aggregate from the per-example entries. The stored
    /// aggregate must equal this within 1e-12.
    pub fn recompute_aggregate(&self, golds: &[String], space: &LabelSpace) -> Result<f64> {
        let preds: Vec<Prediction> = self.per_example.iter().map(|c| c.prediction.clone()).collect();
        match self.metric {
            Metric::MacroF1 => crate::metrics::macro_f1(&preds, golds, space),
            Metric::Accuracy => crate::metrics::accuracy(&preds, golds),
        }
    }
}

/// Dense n×M matrix of member predictions: one row per example, one column
/// per ensemble member. Unparseable cells hold `Prediction::Invalid`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PredictionMatrix {
    pub example_ids: Vec<String>,
    pub member_ids: Vec<String>,
    /// Row-major: `cells[row][col]`.
    pub cells: Vec<Vec<Prediction>>,
}

impl PredictionMatrix {
    pub fn n_rows(&self) -> usize {
        self.example_ids.len()
    }

    pub fn n_members(&self) -> usize {
        self.member_ids.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.len() != self.example_ids.len() {
            return Err(Error::contract("prediction matrix row count mismatch"));
        }
        for row in &self.cells {
            if row.len() != self.member_ids.len() {
                return Err(Error::contract("prediction matrix column count mismatch"));
            }
        }
        Ok(())
    }

    /// The column of predictions for one member.
    pub fn column(&self, col: usize) -> Vec<Prediction> {
        self.cells.iter().map(|row| row[col].clone()).collect()
    }
}

/// Outcome of inserting a candidate into the pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolInsert {
    /// Inserted; carries the assigned id.
    Added(String),
    /// A candidate with the same normalized text already exists; carries its id.
    Duplicate(String),
}

impl PoolInsert {
    pub fn id(&self) -> &str {
        match self {
            PoolInsert::Added(id) | PoolInsert::Duplicate(id) => id,
        }
    }

    pub fn is_added(&self) -> bool {
        matches!(self, PoolInsert::Added(_))
    }
}

/// The shared candidate pool. Enforces the dedup invariant: no two members
/// share a normalized text, and inserting a duplicate leaves the pool
/// unchanged.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct CandidatePool {
    candidates: Vec<PromptCandidate>,
    next_id: u64,
}

impl CandidatePool {
    pub fn new() -> Self {
        CandidatePool::default()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[PromptCandidate] {
        &self.candidates
    }

    pub fn get(&self, id: &str) -> Option<&PromptCandidate> {
        self.candidates.iter().find(|c| c.id == id)
    }

    /// Inserts a generated prompt, deduplicating on normalized text.
    pub fn insert(&mut self, prompt: GeneratedPrompt) -> Result<PoolInsert> {
        if prompt.text.trim().is_empty() {
            return Err(Error::contract("candidate text must be non-empty"));
        }
        let key = normalize_text(&prompt.text);
        if let Some(existing) = self
            .candidates
            .iter()
            .find(|c| normalize_text(&c.text) == key)
        {
            return Ok(PoolInsert::Duplicate(existing.id.clone()));
        }
        let id = format!("c{:06}", self.next_id);
        self.next_id += 1;
        self.candidates
            .push(PromptCandidate::new(id.clone(), prompt.text, prompt.origin));
        Ok(PoolInsert::Added(id))
    }

    pub fn set_embedding(&mut self, id: &str, embedding: Vec<f64>) {
        if let Some(c) = self.candidates.iter_mut().find(|c| c.id == id) {
            c.embedding = Some(embedding);
        }
    }

    pub fn set_score(&mut self, id: &str, score: f64) {
        if let Some(c) = self.candidates.iter_mut().find(|c| c.id == id) {
            c.score = Some(score);
        }
    }

    /// Members that have not been evaluated yet.
    pub fn unevaluated(&self) -> Vec<PromptCandidate> {
        self.candidates.iter().filter(|c| c.score.is_none()).cloned().collect()
    }

    /// Members with a score, best first (score desc, id asc).
    pub fn scored(&self) -> Vec<PromptCandidate> {
        let mut out: Vec<PromptCandidate> = self
            .candidates
            .iter()
            .filter(|c| c.score.is_some())
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.id.cmp(&b.id))
        });
        out
    }
}
