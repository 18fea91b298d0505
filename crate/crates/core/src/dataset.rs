//! JSONL dataset ingestion.
//!
//! One JSON object per line with fields `input` (string), `expected`
//! (string), and an optional `id`; missing ids are assigned from the
//! 1-based line number. Label space and metric come from the run config,
//! not from the data file.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::labels::LabelSpace;
use crate::types::{Dataset, Example, Metric};

#[derive(Deserialize)]
struct RawExample {
    #[serde(default)]
    id: Option<String>,
    input: String,
    expected: String,
}

/// Loads a JSONL file into a validated [`Dataset`].
pub fn load_jsonl(path: impl AsRef<Path>, label_space: LabelSpace, metric: Metric) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::contract(format!("cannot read dataset `{}`: {e}", path.display()))
    })?;
    let examples = parse_jsonl(&text)?;
    let dataset = Dataset {
        examples,
        label_space,
        metric,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Parses JSONL text into examples; blank lines are skipped but still
/// advance the line counter used for auto-assigned ids.
pub fn parse_jsonl(text: &str) -> Result<Vec<Example>> {
    let mut examples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawExample = serde_json::from_str(line).map_err(|e| {
            Error::contract(format!("dataset line {line_no}: invalid JSON ({e})"))
        })?;
        examples.push(Example {
            id: raw.id.unwrap_or_else(|| line_no.to_string()),
            input: raw.input,
            expected: raw.expected,
        });
    }
    Ok(examples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_examples_and_assigns_line_ids() {
        let text = r#"{"input":"q1","expected":"YES"}
{"id":"custom","input":"q2","expected":"NO"}

{"input":"q3","expected":"YES"}"#;
        let examples = parse_jsonl(text).unwrap();
        assert_eq!(examples.len(), 3);
        assert_eq!(examples[0].id, "1");
        assert_eq!(examples[1].id, "custom");
        assert_eq!(examples[2].id, "4");
    }

    #[test]
    fn bad_json_names_the_line() {
        let err = parse_jsonl("{\"input\":\"q\",\"expected\":\"Y\"}\nnot json").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn load_validates_against_label_space() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.jsonl");
        std::fs::write(&path, "{\"input\":\"q\",\"expected\":\"MAYBE\"}\n").unwrap();
        let err = load_jsonl(&path, LabelSpace::new(["YES", "NO"]), Metric::Accuracy);
        assert!(err.is_err());
    }

    #[test]
    fn missing_file_is_reported_with_path() {
        let err = load_jsonl("/nonexistent/data.jsonl", LabelSpace::open(), Metric::Accuracy);
        assert!(err.unwrap_err().to_string().contains("/nonexistent/data.jsonl"));
    }
}
