//! Task metrics: macro-F1 and accuracy over parsed predictions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::labels::{normalize_label, LabelSpace};
use crate::types::Prediction;

/// Unweighted mean of per-class F1 scores.
///
/// The class set is the union of classes seen in the golds and in the valid
/// predictions; label-space classes absent from both are excluded rather
/// than padding the mean. A class with zero precision+recall contributes 0.
/// Invalid predictions belong to no class and only hurt recall.
pub fn macro_f1(predictions: &[Prediction], golds: &[String], space: &LabelSpace) -> Result<f64> {
    if predictions.len() != golds.len() {
        return Err(Error::contract(format!(
            "macro_f1: {} predictions vs {} golds",
            predictions.len(),
            golds.len()
        )));
    }
    if !space.is_open() {
        for g in golds {
            if !space.contains(g) {
                return Err(Error::contract(format!(
                    "macro_f1: gold label `{g}` not in the label space"
                )));
            }
        }
    }
    let scores = per_class_f1(predictions, golds);
    if scores.is_empty() {
        return Ok(0.0);
    }
    Ok(scores.values().sum::<f64>() / scores.len() as f64)
}

/// Per-class F1 over normalized labels, keyed by normalized class name.
pub fn per_class_f1(predictions: &[Prediction], golds: &[String]) -> BTreeMap<String, f64> {
    #[derive(Default)]
    struct Counts {
        tp: u64,
        fp: u64,
        fn_: u64,
    }
    let mut counts: BTreeMap<String, Counts> = BTreeMap::new();
    for (pred, gold) in predictions.iter().zip(golds) {
        let gold_n = normalize_label(gold);
        let pred_n = pred.as_valid().map(normalize_label);
        match pred_n {
            Some(p) if p == gold_n => {
                counts.entry(gold_n).or_default().tp += 1;
            }
            Some(p) => {
                counts.entry(p).or_default().fp += 1;
                counts.entry(gold_n).or_default().fn_ += 1;
            }
            None => {
                counts.entry(gold_n).or_default().fn_ += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|(class, c)| {
            let precision = if c.tp + c.fp == 0 {
                0.0
            } else {
                c.tp as f64 / (c.tp + c.fp) as f64
            };
            let recall = if c.tp + c.fn_ == 0 {
                0.0
            } else {
                c.tp as f64 / (c.tp + c.fn_) as f64
            };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            (class, f1)
        })
        .collect()
}

/// Fraction of predictions that match their gold after normalization.
pub fn accuracy(predictions: &[Prediction], golds: &[String]) -> Result<f64> {
    if predictions.len() != golds.len() {
        return Err(Error::contract(format!(
            "accuracy: {} predictions vs {} golds",
            predictions.len(),
            golds.len()
        )));
    }
    if golds.is_empty() {
        return Ok(0.0);
    }
    let hits = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| p.matches(g))
        .count();
    Ok(hits as f64 / golds.len() as f64)
}
