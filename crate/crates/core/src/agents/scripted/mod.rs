//! Scripted distributed algorithms.
//!
//! A scripted agent keeps no state between calls. Each call re-reads the
//! agent's chat history (its own name, neighbors and budget from the system
//! prompt, the messages delivered in every round prompt) and replays the
//! algorithm from round 0 with the same seeded randomness, so its output is
//! a pure function of `(history, seed)`.
//!
//! Messages use a `key=value key=value` dialect inside ordinary message
//! strings and travel through the same JSON envelopes as model output.
//!
//! All agents of a run share one seed and key every random draw by their
//! name, so an agent can compute its neighbors' initial priorities from the
//! names in its system prompt before any message arrives. This saves the
//! introductory round that the last, never-delivered round would otherwise
//! cost.

mod coloring;
mod consensus;
mod cover;
mod leader;
mod matching;

use std::cmp::Reverse;
use std::collections::BTreeMap;

use super::{AgentBackend, BackendError, ChatMessage, Generation, Role};
use crate::protocol::prompt::{MESSAGE_PREFIX, ROUND_INSTRUCTION};
use crate::seed::{derive, hash_str};
use crate::tasks::{TaskKind, FINAL_ANSWER_MARKER};

/// Seeded priority with ties broken in favor of the lexicographically
/// smaller name.
pub(crate) type Rank = (u64, Reverse<String>);

pub(crate) fn rank_of(seed: u64, name: &str) -> Rank {
    (derive(seed, &[hash_str(name)]), Reverse(name.to_string()))
}

/// Parsed `key=value` message.
pub(crate) type Kv = BTreeMap<String, String>;

pub(crate) fn parse_kv(text: &str) -> Kv {
    text.split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub(crate) fn format_kv(pairs: &[(&str, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// What an agent can learn from its own history.
#[derive(Debug, Clone)]
pub(crate) struct View {
    pub name: String,
    pub neighbors: Vec<String>,
    /// Messages delivered at the start of each round seen so far.
    pub inbox: Vec<BTreeMap<String, Kv>>,
    /// The latest user turn asks for the final answer.
    pub final_request: bool,
}

fn between<'a>(text: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let from = text.find(start)? + start.len();
    let len = text[from..].find(end)?;
    Some(&text[from..from + len])
}

impl View {
    pub fn parse(history: &[ChatMessage]) -> Result<Self, BackendError> {
        let bad = |what: &str| BackendError::Config(format!("scripted agent could not read {what} from its history"));
        let system = history
            .iter()
            .find(|m| m.role == Role::System)
            .ok_or_else(|| bad("a system prompt"))?;
        let name = between(&system.content, "Your name is ", ".\n").ok_or_else(|| bad("its name"))?;
        let neighbors = between(&system.content, "immediate neighbors (", ")").ok_or_else(|| bad("its neighbors"))?;
        let mut view = View {
            name: name.to_string(),
            neighbors: neighbors
                .split(", ")
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
            inbox: Vec::new(),
            final_request: false,
        };
        for m in history.iter().filter(|m| m.role == Role::User) {
            if m.content.contains(ROUND_INSTRUCTION) {
                let mut received = BTreeMap::new();
                for line in m.content.lines() {
                    if let Some((sender, text)) = line
                        .strip_prefix(MESSAGE_PREFIX)
                        .and_then(|rest| rest.split_once(": "))
                    {
                        received.insert(sender.to_string(), parse_kv(text));
                    }
                }
                view.inbox.push(received);
            } else if m.content.contains(FINAL_ANSWER_MARKER) {
                view.final_request = true;
            }
        }
        Ok(view)
    }
}

/// A distributed algorithm in the replay model.
pub(crate) trait Algorithm {
    fn start(view: &View, seed: u64) -> Self;
    /// Consumes the messages delivered at `round` and returns the envelope to
    /// send (recipient -> message).
    fn round(&mut self, round: usize, incoming: &BTreeMap<String, Kv>) -> BTreeMap<String, String>;
    /// Canonical final answer text.
    fn answer(&self) -> String;
    /// One-line summary of local state, emitted as the chain of thought.
    fn summary(&self) -> String;
}

fn broadcast(view: &View, text: &str) -> BTreeMap<String, String> {
    view.neighbors.iter().map(|n| (n.clone(), text.to_string())).collect()
}

fn replay<A: Algorithm>(view: &View, seed: u64) -> String {
    let mut alg = A::start(view, seed);
    let mut envelope = BTreeMap::new();
    for (round, incoming) in view.inbox.iter().enumerate() {
        envelope = alg.round(round, incoming);
    }
    if view.final_request {
        format!("{}\n{FINAL_ANSWER_MARKER} {}", alg.summary(), alg.answer())
    } else {
        let json = serde_json::to_string(&envelope).expect("string map serializes");
        format!("{}\n```json\n{json}\n```", alg.summary())
    }
}

/// A backend running one of the scripted algorithms for its task.
#[derive(Debug, Clone, Copy)]
pub struct ScriptedAgent {
    kind: TaskKind,
    seed: u64,
}

impl ScriptedAgent {
    pub fn new(kind: TaskKind, seed: u64) -> Self {
        ScriptedAgent { kind, seed }
    }
}

/// Priority-greedy (max degree + 1)-coloring.
pub fn scripted_coloring_agent(seed: u64) -> ScriptedAgent {
    ScriptedAgent::new(TaskKind::Coloring, seed)
}

/// Randomized maximal independent set; answers "Yes" outside the set.
pub fn scripted_vertex_cover_agent(seed: u64) -> ScriptedAgent {
    ScriptedAgent::new(TaskKind::VertexCover, seed)
}

/// Mutual-proposal maximal matching.
pub fn scripted_matching_agent(seed: u64) -> ScriptedAgent {
    ScriptedAgent::new(TaskKind::Matching, seed)
}

/// Max-priority flooding.
pub fn scripted_leader_agent(seed: u64) -> ScriptedAgent {
    ScriptedAgent::new(TaskKind::LeaderElection, seed)
}

/// OR-flooding of random initial bits.
pub fn scripted_consensus_agent(seed: u64) -> ScriptedAgent {
    ScriptedAgent::new(TaskKind::Consensus, seed)
}

impl AgentBackend for ScriptedAgent {
    fn generate(&self, history: &[ChatMessage]) -> Result<Generation, BackendError> {
        let view = View::parse(history)?;
        let text = match self.kind {
            TaskKind::Coloring => replay::<coloring::PriorityColoring>(&view, self.seed),
            TaskKind::VertexCover => replay::<cover::LubyCover>(&view, self.seed),
            TaskKind::Matching => replay::<matching::MutualMatching>(&view, self.seed),
            TaskKind::LeaderElection => replay::<leader::MaxFlood>(&view, self.seed),
            TaskKind::Consensus => replay::<consensus::BitFlood>(&view, self.seed),
        };
        Ok(Generation::local(text))
    }
}
