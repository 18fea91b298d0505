//! Label normalization and model-output parsing.
//!
//! Task models are instructed to answer in strict JSON (`[{"label": X}]`),
//! but real outputs drift: code fences, prose around the answer, thousands
//! separators in numbers. `parse_label` recovers a label from all of these
//! and returns [`Prediction::Invalid`] when nothing usable is found.
//! Invalid is a value, not an error — it is simply scored incorrect.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::types::Prediction;

/// The set of admissible labels for a task. Empty means open-ended
/// (generative) output, which in this engine is numeric.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(transparent)]
pub struct LabelSpace {
    labels: Vec<String>,
}

impl LabelSpace {
    pub fn new(labels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        LabelSpace {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    /// An open-ended (generative) space with no fixed labels.
    pub fn open() -> Self {
        LabelSpace::default()
    }

    pub fn is_open(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Resolves arbitrary text to the canonical label it normalizes to.
    pub fn resolve(&self, text: &str) -> Option<&str> {
        let wanted = normalize_label(text);
        self.labels
            .iter()
            .find(|l| normalize_label(l) == wanted)
            .map(String::as_str)
    }

    pub fn contains(&self, text: &str) -> bool {
        self.resolve(text).is_some()
    }
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"-?\d[\d,]*(?:\.\d+)?").unwrap())
}

fn pure_number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?\d[\d,]*(?:\.\d+)?$").unwrap())
}

/// Normalizes a label for comparison: trim, strip trailing punctuation,
/// casefold, and canonicalize numbers (drop thousands separators and
/// redundant zeros).
pub fn normalize_label(s: &str) -> String {
    let mut t = s.trim();
    while let Some(stripped) = t.strip_suffix(['.', ',', ';', ':', '!', '?']) {
        t = stripped.trim_end();
    }
    let t = t.to_lowercase();
    if pure_number_re().is_match(&t) {
        normalize_numeric(&t)
    } else {
        t
    }
}

/// Canonical form of a numeric string: no thousands separators, no leading
/// zeros on the integer part, no trailing zeros on the fraction.
pub fn normalize_numeric(s: &str) -> String {
    let cleaned: String = s.chars().filter(|&c| c != ',').collect();
    let cleaned = cleaned.trim();
    let (negative, digits) = match cleaned.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, cleaned.strip_prefix('+').unwrap_or(cleaned)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f.trim_end_matches('0')),
        None => (digits, ""),
    };
    let int_part = int_part.trim_start_matches('0');
    let int_part = if int_part.is_empty() { "0" } else { int_part };
    let mut out = String::new();
    if negative && !(int_part == "0" && frac_part.is_empty()) {
        out.push('-');
    }
    out.push_str(int_part);
    if !frac_part.is_empty() {
        out.push('.');
        out.push_str(frac_part);
    }
    out
}

/// Normalization used for candidate-prompt dedup: casefold and collapse
/// whitespace runs, so near-identical generator outputs compare equal.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Extracts a prediction from a raw task-model output.
///
/// Stages, first hit wins:
/// 1. strict JSON `[{"label": X}]` (a bare `{"label": X}` object is also
///    accepted) on the trimmed output;
/// 2. the same after stripping Markdown code fences;
/// 3. exact match of the trimmed output against the label space;
/// 4. for open-ended spaces, the last number token in the output.
///
/// Anything else is [`Prediction::Invalid`].
pub fn parse_label(raw: &str, space: &LabelSpace) -> Prediction {
    let trimmed = raw.trim();

    if let Some(value) = extract_json_label(trimmed) {
        if let Some(p) = resolve_extracted(&value, space) {
            return p;
        }
    }
    let unfenced = strip_code_fences(trimmed);
    if unfenced != trimmed {
        if let Some(value) = extract_json_label(&unfenced) {
            if let Some(p) = resolve_extracted(&value, space) {
                return p;
            }
        }
    }
    if !space.is_open() {
        if let Some(canonical) = space.resolve(trimmed) {
            return Prediction::Valid(canonical.to_string());
        }
        return Prediction::Invalid;
    }
    match last_number_token(raw) {
        Some(tok) => Prediction::Valid(normalize_numeric(&tok)),
        None => Prediction::Invalid,
    }
}

fn resolve_extracted(value: &str, space: &LabelSpace) -> Option<Prediction> {
    if space.is_open() {
        let v = value.trim();
        if v.is_empty() {
            return None;
        }
        if pure_number_re().is_match(v) {
            return Some(Prediction::Valid(normalize_numeric(v)));
        }
        return Some(Prediction::Valid(normalize_label(v)));
    }
    space
        .resolve(value)
        .map(|canonical| Prediction::Valid(canonical.to_string()))
}

/// Pulls the label field out of `[{"label": X}]` or `{"label": X}`.
fn extract_json_label(text: &str) -> Option<String> {
    let parsed: serde_json::Value = serde_json::from_str(text).ok()?;
    let object = match &parsed {
        serde_json::Value::Array(items) => items.first()?.as_object()?,
        serde_json::Value::Object(map) => map,
        _ => return None,
    };
    match object.get("label")? {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn strip_code_fences(text: &str) -> String {
    if !text.contains("```") {
        return text.to_string();
    }
    text.lines()
        .filter(|line| !line.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n")
        .trim()
        .to_string()
}

fn last_number_token(text: &str) -> Option<String> {
    number_re()
        .find_iter(text)
        .last()
        .map(|m| m.as_str().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yes_no() -> LabelSpace {
        LabelSpace::new(["YES", "NO"])
    }

    #[test]
    fn strict_json_array_payload() {
        assert_eq!(
            parse_label(r#"[{"label":"NO"}]"#, &yes_no()),
            Prediction::Valid("NO".into())
        );
    }

    #[test]
    fn bare_json_object_payload() {
        assert_eq!(
            parse_label(r#"{"label":"YES"}"#, &yes_no()),
            Prediction::Valid("YES".into())
        );
    }

    #[test]
    fn exact_match_fallback() {
        assert_eq!(parse_label("YES", &yes_no()), Prediction::Valid("YES".into()));
        assert_eq!(parse_label("  no.\n", &yes_no()), Prediction::Valid("NO".into()));
    }

    #[test]
    fn code_fence_stripped_before_retry() {
        let raw = "```json\n[{\"label\": \"NO\"}]\n```";
        assert_eq!(parse_label(raw, &yes_no()), Prediction::Valid("NO".into()));
    }

    #[test]
    fn open_ended_numeric_extraction() {
        let space = LabelSpace::open();
        assert_eq!(
            parse_label("The answer is 3,472.", &space),
            Prediction::Valid("3472".into())
        );
        assert_eq!(parse_label("12 + 5 = 17", &space), Prediction::Valid("17".into()));
        assert_eq!(parse_label("no digits here", &space), Prediction::Invalid);
    }

    #[test]
    fn json_label_outside_space_is_invalid() {
        assert_eq!(parse_label(r#"[{"label":"MAYBE"}]"#, &yes_no()), Prediction::Invalid);
    }

    #[test]
    fn numeric_normalization_rules() {
        assert_eq!(normalize_numeric("3,472"), "3472");
        assert_eq!(normalize_numeric("007"), "7");
        assert_eq!(normalize_numeric("3.500"), "3.5");
        assert_eq!(normalize_numeric("0.0"), "0");
        assert_eq!(normalize_numeric("-0"), "0");
        assert_eq!(normalize_numeric("-12.30"), "-12.3");
        assert_eq!(normalize_numeric("+41"), "41");
    }

    #[test]
    fn label_normalization_casefolds_and_strips() {
        assert_eq!(normalize_label(" Yes. "), "yes");
        assert_eq!(normalize_label("1,024"), "1024");
        assert_eq!(normalize_label("B?!"), "b");
    }

    #[test]
    fn parse_is_idempotent_on_its_own_output() {
        let space = yes_no();
        for raw in [r#"[{"label":"NO"}]"#, "YES", "```\n[{\"label\":\"YES\"}]\n```"] {
            let first = parse_label(raw, &space);
            if let Prediction::Valid(label) = &first {
                let reserialized = format!(r#"[{{"label":"{label}"}}]"#);
                assert_eq!(parse_label(&reserialized, &space), first);
            }
        }
        let open = LabelSpace::open();
        let first = parse_label("total: 1,204 items", &open);
        if let Prediction::Valid(label) = &first {
            assert_eq!(parse_label(label, &open), first);
        }
    }

    #[test]
    fn dedup_normalization_collapses_whitespace() {
        assert_eq!(normalize_text("A  b\n\tc"), normalize_text("a B c"));
        assert_ne!(normalize_text("a b"), normalize_text("ab"));
    }
}
