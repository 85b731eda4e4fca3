use rand::seq::SliceRandom;

use super::scripted::View;
use super::{AgentBackend, BackendError, ChatMessage, Generation, Role};
use crate::seed::{hash_str, rng};
use crate::tasks::FINAL_ANSWER_MARKER;

const OPTIONS_INTRO: &str = "one of these valid options: ";

/// Naive baseline: sends no messages and answers uniformly at random among
/// the valid options listed in the final request.
#[derive(Debug, Clone, Copy)]
pub struct RandomAgent {
    seed: u64,
}

pub fn random_baseline_agent(seed: u64) -> RandomAgent {
    RandomAgent { seed }
}

/// Options listed in a final request, e.g. `'Yes', 'No'`.
fn listed_options(request: &str) -> Vec<String> {
    let Some(start) = request.rfind(OPTIONS_INTRO) else {
        return Vec::new();
    };
    request[start + OPTIONS_INTRO.len()..]
        .trim_end()
        .trim_end_matches('.')
        .split(", ")
        .map(|o| o.trim_matches('\'').to_string())
        .filter(|o| !o.is_empty())
        .collect()
}

impl AgentBackend for RandomAgent {
    fn generate(&self, history: &[ChatMessage]) -> Result<Generation, BackendError> {
        let view = View::parse(history)?;
        let last = history
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or_default();
        if !last.contains(FINAL_ANSWER_MARKER) {
            return Ok(Generation::local("I will wait for the final question.\n{}"));
        }
        let options = listed_options(last);
        let mut r = rng(self.seed, &[hash_str(&view.name), history.len() as u64]);
        let choice = options
            .choose(&mut r)
            .ok_or_else(|| BackendError::Config("final request lists no options".into()))?;
        Ok(Generation::local(format!("{FINAL_ANSWER_MARKER} {choice}")))
    }
}
