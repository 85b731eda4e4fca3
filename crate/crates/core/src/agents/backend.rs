use std::ops::AddAssign;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::AgentIdentity;
use crate::tasks::TaskSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// Token and request accounting, summed over generations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Usage {
    pub requests: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Retries caused by transport errors or rate limiting.
    pub transport_retries: u64,
    pub cost_usd: f64,
}

impl AddAssign for Usage {
    fn add_assign(&mut self, o: Usage) {
        self.requests += o.requests;
        self.prompt_tokens += o.prompt_tokens;
        self.completion_tokens += o.completion_tokens;
        self.transport_retries += o.transport_retries;
        self.cost_usd += o.cost_usd;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub text: String,
    pub usage: Usage,
}

impl Generation {
    pub fn local(text: impl Into<String>) -> Self {
        Generation {
            text: text.into(),
            usage: Usage::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("backend configuration: {0}")]
    Config(String),
}

/// Produces the next assistant turn from an agent's full chat history.
///
/// Implementations are shared across threads; distinct agents may call
/// `generate` concurrently, a single agent never does.
pub trait AgentBackend: Send + Sync {
    fn generate(&self, history: &[ChatMessage]) -> Result<Generation, BackendError>;
}

/// Builds one backend per agent of a run.
pub trait BackendFactory: Send + Sync {
    /// Label identifying the model/backend in records and reports.
    fn label(&self) -> String;

    /// `seed` is the run seed, identical for every agent of the run;
    /// backends that need private randomness key it by the agent's name.
    fn make(
        &self,
        task: &TaskSpec,
        agent: &AgentIdentity,
        seed: u64,
    ) -> Result<Arc<dyn AgentBackend>, BackendError>;
}
