//! The synchronous message-passing protocol: agent naming, round budgets,
//! prompt construction, envelope parsing, the round engine and transcripts.

mod budget;
mod engine;
mod envelope;
mod names;
pub mod prompt;
mod transcript;

use thiserror::Error;

pub use budget::{compute_round_budget, round_budget, BudgetMode};
pub use engine::{run_rounds, EngineOptions, RunError, RunLabels, RunStats, Session};
pub use envelope::{parse_message_envelope, EnvelopeError, ParsedEnvelope, RoundEnvelope};
pub use names::{assign_names, identities, AgentIdentity, NAME_POOL};
pub use prompt::build_system_prompt;
pub use transcript::{EventKind, Transcript, TranscriptEvent};

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("malformed transcript: {0}")]
    Transcript(String),
}
