//! The global bad-case ledger: per-example failure counts and the set of
//! prompts that failed each example, accumulated over every evaluation in
//! a run.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::types::{EvaluationRecord, Example};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct TrackerEntry {
    pub failure_count: u64,
    pub failed_prompt_ids: BTreeSet<String>,
}

/// Failure ledger keyed by example id. Counts only ever grow: the same
/// prompt failing an example in two evaluations increments the count twice
/// while contributing one id to the set.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct BadCaseTracker {
    entries: BTreeMap<String, TrackerEntry>,
}

impl BadCaseTracker {
    pub fn new() -> Self {
        BadCaseTracker::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, example_id: &str) -> Option<&TrackerEntry> {
        self.entries.get(example_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &TrackerEntry)> {
        self.entries.iter()
    }

    /// Total failure mass; monotone over a run.
    pub fn total_failures(&self) -> u64 {
        self.entries.values().map(|e| e.failure_count).sum()
    }

    /// Folds one evaluation record into the ledger: every incorrect
    /// per-example entry bumps that example's count and records the prompt.
    pub fn record_failures(&mut self, record: &EvaluationRecord) {
        for case in &record.per_example {
            if !case.correct {
                let entry = self.entries.entry(case.example_id.clone()).or_default();
                entry.failure_count += 1;
                entry.failed_prompt_ids.insert(record.prompt_id.clone());
            }
        }
    }

    /// The top-k hardest examples: failure count descending, example id
    /// ascending on ties. `resolve_example` maps ids back to examples and
    /// `resolve_prompt` maps failed prompt ids to their texts; unresolvable
    /// ids are skipped.
    pub fn hardest(
        &self,
        k: usize,
        resolve_example: impl Fn(&str) -> Option<Example>,
        resolve_prompt: impl Fn(&str) -> Option<String>,
    ) -> HardCaseDataset {
        let mut ranked: Vec<(&String, &TrackerEntry)> = self.entries.iter().collect();
        ranked.sort_by(|a, b| b.1.failure_count.cmp(&a.1.failure_count).then(a.0.cmp(b.0)));
        let items = ranked
            .into_iter()
            .take(k)
            .filter_map(|(id, entry)| {
                let example = resolve_example(id)?;
                let failed_prompt_texts = entry
                    .failed_prompt_ids
                    .iter()
                    .filter_map(|pid| resolve_prompt(pid))
                    .collect();
                Some(HardCase {
                    example,
                    failure_count: entry.failure_count,
                    failed_prompt_texts,
                })
            })
            .collect();
        HardCaseDataset { items }
    }
}

/// One hard case: the example, how often it failed, and the prompts that
/// failed it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HardCase {
    pub example: Example,
    pub failure_count: u64,
    pub failed_prompt_texts: Vec<String>,
}

/// Top-k hardest examples, sorted by failure count descending (ties by
/// example id ascending).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HardCaseDataset {
    pub items: Vec<HardCase>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CaseResult, Metric, Prediction};

    fn record(prompt_id: &str, failures: &[&str], successes: &[&str]) -> EvaluationRecord {
        let mut per_example = Vec::new();
        for id in failures {
            per_example.push(CaseResult {
                example_id: id.to_string(),
                raw_output: "wrong".into(),
                prediction: Prediction::Invalid,
                correct: false,
            });
        }
        for id in successes {
            per_example.push(CaseResult {
                example_id: id.to_string(),
                raw_output: "right".into(),
                prediction: Prediction::Valid("Y".into()),
                correct: true,
            });
        }
        let total = per_example.len() as f64;
        EvaluationRecord {
            prompt_id: prompt_id.into(),
            per_example,
            aggregate: successes.len() as f64 / total,
            metric: Metric::Accuracy,
        }
    }

    fn example(id: &str) -> Option<Example> {
        Some(Example {
            id: id.to_string(),
            input: format!("input {id}"),
            expected: "Y".into(),
        })
    }

    #[test]
    fn failures_create_entries_with_count_one() {
        let mut tracker = BadCaseTracker::new();
        tracker.record_failures(&record("p1", &["e1", "e2"], &["e3"]));
        assert_eq!(tracker.len(), 2);
        assert_eq!(tracker.get("e1").unwrap().failure_count, 1);
        assert_eq!(tracker.get("e2").unwrap().failure_count, 1);
        assert!(tracker.get("e3").is_none());
    }

    #[test]
    fn repeat_failures_bump_counts_but_not_the_id_set() {
        let mut tracker = BadCaseTracker::new();
        let r = record("p1", &["e1", "e2"], &[]);
        tracker.record_failures(&r);
        tracker.record_failures(&r);
        for id in ["e1", "e2"] {
            let entry = tracker.get(id).unwrap();
            assert_eq!(entry.failure_count, 2);
            assert_eq!(entry.failed_prompt_ids.len(), 1);
        }
    }

    #[test]
    fn three_prompts_failing_one_example() {
        let mut tracker = BadCaseTracker::new();
        for prompt in ["p1", "p2", "p3"] {
            tracker.record_failures(&record(prompt, &["e7"], &[]));
        }
        let entry = tracker.get("e7").unwrap();
        assert_eq!(entry.failure_count, 3);
        assert_eq!(entry.failed_prompt_ids.len(), 3);
    }

    #[test]
    fn counts_never_decrease() {
        let mut tracker = BadCaseTracker::new();
        let mut last_total = 0;
        for i in 0..5 {
            tracker.record_failures(&record(&format!("p{i}"), &["e1"], &["e2"]));
            let total = tracker.total_failures();
            assert!(total >= last_total);
            last_total = total;
        }
        assert_eq!(last_total, 5);
    }

    #[test]
    fn hardest_truncates_to_available_entries() {
        let mut tracker = BadCaseTracker::new();
        tracker.record_failures(&record("p1", &["e1"], &[]));
        let hard = tracker.hardest(5, example, |_| Some("text".into()));
        assert_eq!(hard.items.len(), 1);
    }

    #[test]
    fn hardest_sorts_by_count_desc_then_id_asc() {
        let mut tracker = BadCaseTracker::new();
        // e1: 3 failures, e2: 1, e3: 3.
        for prompt in ["p1", "p2", "p3"] {
            tracker.record_failures(&record(prompt, &["e1", "e3"], &[]));
        }
        tracker.record_failures(&record("p4", &["e2"], &[]));
        let hard = tracker.hardest(2, example, |_| None);
        let ids: Vec<&str> = hard.items.iter().map(|h| h.example.id.as_str()).collect();
        assert_eq!(ids, ["e1", "e3"]);
    }
}
