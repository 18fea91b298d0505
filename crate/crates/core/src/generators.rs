//! Candidate-prompt generation: reflection on a prompt's failing cases,
//! evolutionary mutation / zero-order synthesis over the population, and a
//! rewrite driven by the globally hardest examples. All three share the
//! optimizer model and the bad-case tracker.

mod bad_case;
mod evolutionary;
mod hard_case;
mod templates;
mod tracker;

pub use bad_case::{bad_case_reflection, BadCase, CaseCheck};
pub use evolutionary::{evolutionary_reflection, GenerationBatch};
pub use hard_case::hard_case_tracking;
pub use templates::{MetaPromptTemplate, TemplateSet};
pub use tracker::{BadCaseTracker, HardCase, HardCaseDataset, TrackerEntry};

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::llm::{ChatRequest, LlmClient};
use crate::types::Example;

pub const DEFAULT_REFLECTION_ROUNDS: u32 = 2;
pub const DEFAULT_BAD_CASE_SAMPLE: usize = 8;
pub const DEFAULT_FEW_SHOT_CAP: usize = 6;
pub const DEFAULT_OPTIMIZER_TEMPERATURE: f64 = 0.7;

/// Knobs shared by the generators.
#[derive(Debug, Clone)]
pub struct GeneratorSettings {
    /// T: max reflection rounds per bad-case run.
    pub reflection_rounds: u32,
    /// |B_s|: size of the sampled bad-case subset.
    pub bad_case_sample: usize,
    /// Cap on exemplars in the appended few-shot block.
    pub few_shot_cap: usize,
    pub optimizer_model: String,
    pub optimizer_temperature: f64,
    pub optimizer_max_output: u32,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        GeneratorSettings {
            reflection_rounds: DEFAULT_REFLECTION_ROUNDS,
            bad_case_sample: DEFAULT_BAD_CASE_SAMPLE,
            few_shot_cap: DEFAULT_FEW_SHOT_CAP,
            optimizer_model: "optimizer".into(),
            optimizer_temperature: DEFAULT_OPTIMIZER_TEMPERATURE,
            optimizer_max_output: 2048,
        }
    }
}

/// Everything a generator call needs: the optimizer client, templates,
/// settings, and the run RNG.
pub struct GeneratorContext<'a> {
    pub optimizer: &'a dyn LlmClient,
    pub templates: &'a TemplateSet,
    pub settings: &'a GeneratorSettings,
    pub rng: &'a mut ChaCha8Rng,
}

impl GeneratorContext<'_> {
    /// One optimizer-model call; an empty response is a generation error.
    fn ask_optimizer(&mut self, meta_prompt: &str) -> Result<String> {
        let request = ChatRequest::new(&self.settings.optimizer_model, meta_prompt)
            .with_temperature(self.settings.optimizer_temperature)
            .with_max_output(self.settings.optimizer_max_output);
        let response = self.optimizer.complete(&request)?;
        let trimmed = response.trim();
        if trimmed.is_empty() {
            return Err(Error::generation("optimizer returned an empty prompt"));
        }
        Ok(trimmed.to_string())
    }
}

/// Re-evaluates a prompt on single examples during the reflection loop.
/// Returning `Ok(None)` means the assessor declines further evaluations
/// (e.g. the iteration's budget ran out); the loop then finalizes early.
pub trait CaseAssessor {
    fn assess(&mut self, prompt_text: &str, example: &Example) -> Result<Option<CaseCheck>>;
}

impl<F> CaseAssessor for F
where
    F: FnMut(&str, &Example) -> Result<Option<CaseCheck>>,
{
    fn assess(&mut self, prompt_text: &str, example: &Example) -> Result<Option<CaseCheck>> {
        self(prompt_text, example)
    }
}
