//! Bad-case reflection: sample a subset of a prompt's failing cases, ask
//! the optimizer model to repair the prompt, re-check the subset, and
//! repeat until the subset is clean or the round cap is reached. Whatever
//! still fails becomes a few-shot exemplar block appended to the result.

use rand::seq::SliceRandom;

use crate::error::Result;
use crate::generators::{CaseAssessor, GeneratorContext};
use crate::types::{Example, GeneratedPrompt, Origin, PromptCandidate};

/// A failing (example, wrong output) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadCase {
    pub example: Example,
    pub wrong_output: String,
}

/// Outcome of re-running one example under a candidate prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseCheck {
    pub correct: bool,
    pub output: String,
}

pub(crate) const FEW_SHOT_HEADER: &str = "# Few-Shot Exemplars (from high-scoring failures)";

/// Runs the reflection loop and returns the repaired prompt.
///
/// With no bad cases the input text is returned unchanged (retagged); no
/// optimizer call is made. Otherwise the loop makes at most
/// `settings.reflection_rounds` optimizer calls, stopping early once the
/// sampled subset is fully resolved or the assessor declines to evaluate.
pub fn bad_case_reflection(
    ctx: &mut GeneratorContext<'_>,
    prompt: &PromptCandidate,
    bad_cases: &[BadCase],
    assessor: &mut dyn CaseAssessor,
) -> Result<GeneratedPrompt> {
    if bad_cases.is_empty() {
        return Ok(GeneratedPrompt {
            text: prompt.text.clone(),
            origin: Origin::BadCaseReflection,
        });
    }

    let mut subset: Vec<BadCase> = if bad_cases.len() <= ctx.settings.bad_case_sample {
        bad_cases.to_vec()
    } else {
        let mut indices: Vec<usize> = (0..bad_cases.len()).collect();
        indices.shuffle(ctx.rng);
        indices.truncate(ctx.settings.bad_case_sample);
        indices.into_iter().map(|i| bad_cases[i].clone()).collect()
    };

    let mut current = prompt.text.clone();
    for _round in 0..ctx.settings.reflection_rounds {
        if subset.is_empty() {
            break;
        }
        let meta = ctx.templates.reflection.render(&[
            ("current_prompt", current.as_str()),
            ("bad_cases", &render_bad_cases(&subset)),
        ])?;
        current = ctx.ask_optimizer(&meta)?;

        let mut still_failing = Vec::with_capacity(subset.len());
        let mut declined = false;
        for case in &subset {
            match assessor.assess(&current, &case.example)? {
                Some(check) if !check.correct => still_failing.push(BadCase {
                    example: case.example.clone(),
                    wrong_output: check.output,
                }),
                Some(_) => {}
                None => {
                    declined = true;
                    break;
                }
            }
        }
        if declined {
            // Budget gone mid-round: keep the previous subset rather than a
            // half-updated one.
            break;
        }
        subset = still_failing;
    }

    let text = if subset.is_empty() {
        current
    } else {
        append_few_shot_block(&current, &subset, ctx.settings.few_shot_cap)
    };
    Ok(GeneratedPrompt {
        text,
        origin: Origin::BadCaseReflection,
    })
}

pub(crate) fn render_bad_cases(cases: &[BadCase]) -> String {
    let mut out = String::new();
    for (i, case) in cases.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!(
            "[Case {}]\nInput: {}\nExpected: {}\nGot: {}",
            i + 1,
            case.example.input,
            case.example.expected,
            case.wrong_output
        ));
    }
    out
}

fn append_few_shot_block(prompt: &str, cases: &[BadCase], cap: usize) -> String {
    let mut out = String::with_capacity(prompt.len() + 256);
    out.push_str(prompt.trim_end());
    out.push_str("\n\n");
    out.push_str(FEW_SHOT_HEADER);
    for (i, case) in cases.iter().take(cap).enumerate() {
        out.push_str(&format!(
            "\n[Example {}]\nInput: {}\nExpected: {}",
            i + 1,
            case.example.input,
            case.example.expected
        ));
        if i + 1 < cases.len().min(cap) {
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{GeneratorSettings, TemplateSet};
    use crate::llm::ScriptedClient;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example(id: &str) -> Example {
        Example {
            id: id.into(),
            input: format!("input {id}"),
            expected: "YES".into(),
        }
    }

    fn bad(id: &str) -> BadCase {
        BadCase {
            example: example(id),
            wrong_output: "NO".into(),
        }
    }

    fn run(
        script: &[&str],
        bad_cases: &[BadCase],
        rounds: u32,
        assessor: &mut dyn CaseAssessor,
    ) -> (GeneratedPrompt, usize) {
        let optimizer = ScriptedClient::queue(script.iter().map(|s| s.to_string()));
        let templates = TemplateSet::default();
        let settings = GeneratorSettings {
            reflection_rounds: rounds,
            ..GeneratorSettings::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ctx = GeneratorContext {
            optimizer: &optimizer,
            templates: &templates,
            settings: &settings,
            rng: &mut rng,
        };
        let seed = PromptCandidate::new("p0", "P1", Origin::Seed);
        let out = bad_case_reflection(&mut ctx, &seed, bad_cases, assessor).unwrap();
        let consumed = script.len() - optimizer.remaining().unwrap();
        (out, consumed)
    }

    #[test]
    fn no_bad_cases_returns_input_unchanged_without_calls() {
        let mut assessor = |_: &str, _: &Example| -> Result<Option<CaseCheck>> {
            panic!("assessor must not run")
        };
        let (out, calls) = run(&["unused"], &[], 3, &mut assessor);
        assert_eq!(out.text, "P1");
        assert_eq!(out.origin, Origin::BadCaseReflection);
        assert_eq!(calls, 0);
        assert!(!out.text.contains(FEW_SHOT_HEADER));
    }

    #[test]
    fn early_termination_when_all_cases_resolve() {
        let mut assessor = |_: &str, _: &Example| -> Result<Option<CaseCheck>> {
            Ok(Some(CaseCheck {
                correct: true,
                output: "YES".into(),
            }))
        };
        let (out, calls) = run(&["P2", "P3", "P4"], &[bad("e1"), bad("e2")], 3, &mut assessor);
        assert_eq!(out.text, "P2");
        assert_eq!(calls, 1, "loop must run exactly once");
    }

    #[test]
    fn unresolved_cases_get_a_few_shot_block() {
        // Oracle: hand trace with a fixed script. The optimizer yields P2
        // then P3; nothing ever resolves, so after T=2 rounds the output is
        // P3 plus every remaining bad case as an Input/Expected exemplar.
        let mut assessor = |_: &str, ex: &Example| -> Result<Option<CaseCheck>> {
            Ok(Some(CaseCheck {
                correct: false,
                output: format!("still wrong on {}", ex.id),
            }))
        };
        let cases = [bad("e1"), bad("e2")];
        let (out, calls) = run(&["P2", "P3"], &cases, 2, &mut assessor);
        assert_eq!(calls, 2);
        assert!(out.text.starts_with("P3"));
        assert!(out.text.contains(FEW_SHOT_HEADER));
        for case in &cases {
            assert!(out.text.contains(&format!("Input: {}", case.example.input)));
            assert!(out.text.contains(&format!("Expected: {}", case.example.expected)));
        }
        // The refreshed wrong outputs flow into the next round's meta
        // prompt, not into the few-shot block.
        assert!(!out.text.contains("still wrong"));
    }

    #[test]
    fn few_shot_block_caps_exemplars() {
        let mut assessor = |_: &str, _: &Example| -> Result<Option<CaseCheck>> {
            Ok(Some(CaseCheck {
                correct: false,
                output: "NO".into(),
            }))
        };
        let cases: Vec<BadCase> = (0..8).map(|i| bad(&format!("e{i}"))).collect();
        let (out, _) = run(&["P2"], &cases, 1, &mut assessor);
        let exemplars = out.text.matches("[Example ").count();
        assert_eq!(exemplars, 6);
    }

    #[test]
    fn subset_sampling_caps_at_the_settings_size() {
        let mut assessed = std::collections::HashSet::new();
        let mut assessor = |_: &str, ex: &Example| -> Result<Option<CaseCheck>> {
            assessed.insert(ex.id.clone());
            Ok(Some(CaseCheck {
                correct: false,
                output: "NO".into(),
            }))
        };
        let cases: Vec<BadCase> = (0..20).map(|i| bad(&format!("e{i:02}"))).collect();
        run(&["P2"], &cases, 1, &mut assessor);
        assert_eq!(assessed.len(), 8, "B_s must sample min(|B|, 8) cases");
    }

    #[test]
    fn assessor_decline_finalizes_with_previous_subset() {
        let mut first = true;
        let mut assessor = move |_: &str, _: &Example| -> Result<Option<CaseCheck>> {
            if first {
                first = false;
                Ok(Some(CaseCheck {
                    correct: true,
                    output: "YES".into(),
                }))
            } else {
                Ok(None)
            }
        };
        let cases = [bad("e1"), bad("e2")];
        let (out, calls) = run(&["P2", "P3"], &cases, 3, &mut assessor);
        // One optimizer call happened, then the assessor declined mid-round;
        // the block is built from the pre-round subset.
        assert_eq!(calls, 1);
        assert!(out.text.starts_with("P2"));
        assert!(out.text.contains(FEW_SHOT_HEADER));
        assert!(out.text.contains("Input: input e1"));
        assert!(out.text.contains("Input: input e2"));
    }

    #[test]
    fn deterministic_given_seed() {
        let build = || {
            let optimizer = ScriptedClient::queue(["P2"]);
            let templates = TemplateSet::default();
            let settings = GeneratorSettings::default();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let cases: Vec<BadCase> = (0..20).map(|i| bad(&format!("e{i:02}"))).collect();
            let mut assessor = |_: &str, _: &Example| -> Result<Option<CaseCheck>> {
                Ok(Some(CaseCheck {
                    correct: false,
                    output: "NO".into(),
                }))
            };
            let mut ctx = GeneratorContext {
                optimizer: &optimizer,
                templates: &templates,
                settings: &settings,
                rng: &mut rng,
            };
            bad_case_reflection(
                &mut ctx,
                &PromptCandidate::new("p0", "P1", Origin::Seed),
                &cases,
                &mut assessor,
            )
            .unwrap()
        };
        assert_eq!(build(), build());
    }
}
