//! Agent backends: scripted distributed algorithms, a random baseline and a
//! remote chat-completion adapter.

mod backend;
mod random;
mod remote;
mod scripted;

use std::sync::Arc;

pub use backend::{AgentBackend, BackendError, BackendFactory, ChatMessage, Generation, Role, Usage};
pub use random::{random_baseline_agent, RandomAgent};
pub use remote::{remote_model_agent, RemoteAgent, RemoteModelConfig};
pub use scripted::{
    scripted_coloring_agent, scripted_consensus_agent, scripted_leader_agent, scripted_matching_agent,
    scripted_vertex_cover_agent, ScriptedAgent,
};

use crate::protocol::AgentIdentity;
use crate::tasks::TaskSpec;

/// Scripted algorithm matching the run's task.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedFactory;

impl BackendFactory for ScriptedFactory {
    fn label(&self) -> String {
        "scripted".to_string()
    }

    fn make(&self, task: &TaskSpec, _agent: &AgentIdentity, seed: u64) -> Result<Arc<dyn AgentBackend>, BackendError> {
        Ok(Arc::new(ScriptedAgent::new(task.kind, seed)))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RandomFactory;

impl BackendFactory for RandomFactory {
    fn label(&self) -> String {
        "random".to_string()
    }

    fn make(&self, _task: &TaskSpec, _agent: &AgentIdentity, seed: u64) -> Result<Arc<dyn AgentBackend>, BackendError> {
        Ok(Arc::new(random_baseline_agent(seed)))
    }
}

/// One remote model shared by every agent; the concurrency cap applies to
/// all of them together.
#[derive(Debug, Clone)]
pub struct RemoteFactory {
    shared: Arc<remote::RemoteShared>,
}

impl RemoteFactory {
    /// Fails when the credential variable is unset.
    pub fn new(cfg: RemoteModelConfig) -> Result<Self, BackendError> {
        Ok(RemoteFactory {
            shared: remote::RemoteShared::connect(cfg)?,
        })
    }
}

impl BackendFactory for RemoteFactory {
    fn label(&self) -> String {
        self.shared.config().model.clone()
    }

    fn make(&self, _task: &TaskSpec, _agent: &AgentIdentity, _seed: u64) -> Result<Arc<dyn AgentBackend>, BackendError> {
        Ok(Arc::new(RemoteAgent::from_shared(self.shared.clone())))
    }
}
