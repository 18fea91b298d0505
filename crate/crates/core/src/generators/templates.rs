//! Meta-prompt templates: plain text with `{placeholder}` markers. Defaults
//! ship with the crate; a config-set directory overrides them per file.

use std::path::Path;

use crate::error::{Error, Result};

/// Placeholder names a template may reference. Anything else in braces
/// (JSON snippets, `{input}` markers inside quoted prompts) is left alone.
pub const PLACEHOLDERS: [&str; 4] = [
    "current_prompt",
    "bad_cases",
    "population_summary",
    "hard_cases",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaPromptTemplate {
    pub name: String,
    pub text: String,
}

impl MetaPromptTemplate {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        MetaPromptTemplate {
            name: name.into(),
            text: text.into(),
        }
    }

    /// Substitutes the supplied placeholders. Referencing a known
    /// placeholder without supplying it is an error.
    pub fn render(&self, vars: &[(&str, &str)]) -> Result<String> {
        let mut out = self.text.clone();
        for (key, value) in vars {
            out = out.replace(&format!("{{{key}}}"), value);
        }
        for name in PLACEHOLDERS {
            if out.contains(&format!("{{{name}}}")) {
                return Err(Error::contract(format!(
                    "template `{}` references `{{{name}}}` but no value was supplied",
                    self.name
                )));
            }
        }
        Ok(out)
    }
}

/// The four templates the generators use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub reflection: MetaPromptTemplate,
    pub mutation: MetaPromptTemplate,
    pub zero_order: MetaPromptTemplate,
    pub hard_case: MetaPromptTemplate,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet {
            reflection: MetaPromptTemplate::new(
                "reflection",
                include_str!("../../templates/reflection.txt"),
            ),
            mutation: MetaPromptTemplate::new(
                "mutation",
                include_str!("../../templates/mutation.txt"),
            ),
            zero_order: MetaPromptTemplate::new(
                "zero_order",
                include_str!("../../templates/zero_order.txt"),
            ),
            hard_case: MetaPromptTemplate::new(
                "hard_case",
                include_str!("../../templates/hard_case.txt"),
            ),
        }
    }
}

impl TemplateSet {
    /// Loads templates from `dir`, falling back to the built-in text for
    /// any of the four files that is absent.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut set = TemplateSet::default();
        for (name, slot) in [
            ("reflection", &mut set.reflection),
            ("mutation", &mut set.mutation),
            ("zero_order", &mut set.zero_order),
            ("hard_case", &mut set.hard_case),
        ] {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::contract(format!("cannot read template `{}`: {e}", path.display()))
                })?;
                *slot = MetaPromptTemplate::new(name, text);
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_substitutes_supplied_placeholders() {
        let t = MetaPromptTemplate::new("t", "Improve: {current_prompt}!");
        assert_eq!(t.render(&[("current_prompt", "P")]).unwrap(), "Improve: P!");
    }

    #[test]
    fn unsupplied_placeholder_is_an_error() {
        let t = MetaPromptTemplate::new("t", "{current_prompt} / {bad_cases}");
        let err = t.render(&[("current_prompt", "P")]).unwrap_err();
        assert!(err.to_string().contains("bad_cases"));
    }

    #[test]
    fn json_braces_are_not_placeholders() {
        let t = MetaPromptTemplate::new("t", r#"Output [{"label":"YES"}] for {current_prompt}"#);
        let rendered = t.render(&[("current_prompt", "X")]).unwrap();
        assert!(rendered.contains(r#"[{"label":"YES"}]"#));
    }

    #[test]
    fn builtin_templates_render() {
        let set = TemplateSet::default();
        set.reflection
            .render(&[("current_prompt", "p"), ("bad_cases", "b")])
            .unwrap();
        set.mutation.render(&[("current_prompt", "p")]).unwrap();
        set.zero_order.render(&[("population_summary", "s")]).unwrap();
        set.hard_case
            .render(&[("population_summary", "s"), ("hard_cases", "h")])
            .unwrap();
    }

    #[test]
    fn directory_overrides_fall_back_per_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("mutation.txt"), "custom {current_prompt}").unwrap();
        let set = TemplateSet::from_dir(dir.path()).unwrap();
        assert_eq!(set.mutation.text, "custom {current_prompt}");
        assert_eq!(set.reflection, TemplateSet::default().reflection);
    }
}
