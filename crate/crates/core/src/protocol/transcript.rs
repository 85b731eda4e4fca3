use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::tasks::TaskKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    System,
    Outgoing,
    Incoming,
    Retry,
    Final,
}

/// One line of a transcript file.
///
/// * `system`: the agent's system prompt.
/// * `incoming`: one delivered message; `counterpart` is the sender.
/// * `outgoing`: the agent's envelope for the round as canonical JSON; `raw`
///   holds the full generation including the chain of thought, which is
///   never forwarded.
/// * `retry`: an output that failed to parse; `content` is the rejected text.
/// * `final`: the normalized final answer; `raw` is the full response.
///
/// `timestamp` is a per-run event sequence number unless wall-clock
/// timestamps were requested, in which case it holds Unix milliseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub run_id: String,
    pub task: TaskKind,
    pub topology_ref: String,
    pub round: usize,
    pub event_kind: EventKind,
    pub agent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterpart: Option<String>,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub run_id: String,
    pub task: TaskKind,
    pub topology_ref: String,
    pub rounds: usize,
    pub events: Vec<TranscriptEvent>,
}

impl Transcript {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            // Serializing plain strings and integers cannot fail.
            out.push_str(&serde_json::to_string(e).expect("transcript event serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses a transcript file. The round count is recovered from the final
    /// events (or the highest outgoing round when no final turn exists).
    pub fn from_jsonl(text: &str) -> Result<Self, ProtocolError> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: TranscriptEvent = serde_json::from_str(line)
                .map_err(|err| ProtocolError::Transcript(format!("line {}: {err}", i + 1)))?;
            events.push(e);
        }
        let first = events
            .first()
            .ok_or_else(|| ProtocolError::Transcript("empty transcript".into()))?;
        let rounds = events
            .iter()
            .filter(|e| e.event_kind == EventKind::Final)
            .map(|e| e.round)
            .max()
            .or_else(|| {
                events
                    .iter()
                    .filter(|e| e.event_kind == EventKind::Outgoing)
                    .map(|e| e.round + 1)
                    .max()
            })
            .unwrap_or(0);
        Ok(Transcript {
            run_id: first.run_id.clone(),
            task: first.task,
            topology_ref: first.topology_ref.clone(),
            rounds,
            events,
        })
    }

    pub fn agents(&self) -> BTreeSet<String> {
        self.events
            .iter()
            .filter(|e| e.event_kind == EventKind::System)
            .map(|e| e.agent.clone())
            .collect()
    }

    pub fn events_of<'a>(&'a self, agent: &'a str, kind: EventKind) -> impl Iterator<Item = &'a TranscriptEvent> + 'a {
        self.events
            .iter()
            .filter(move |e| e.agent == agent && e.event_kind == kind)
    }

    /// Envelope sent by `agent` in `round`, decoded from its outgoing event.
    pub fn sent(&self, agent: &str, round: usize) -> Option<BTreeMap<String, String>> {
        self.events_of(agent, EventKind::Outgoing)
            .find(|e| e.round == round)
            .and_then(|e| serde_json::from_str(&e.content).ok())
    }

    /// Messages delivered to `agent` at `round`, keyed by sender.
    pub fn received(&self, agent: &str, round: usize) -> BTreeMap<String, String> {
        self.events_of(agent, EventKind::Incoming)
            .filter(|e| e.round == round)
            .filter_map(|e| e.counterpart.clone().map(|c| (c, e.content.clone())))
            .collect()
    }

    /// Each agent has one system turn, one outgoing turn per round and, when
    /// `expect_final`, one final turn.
    pub fn check_structure(&self, expect_final: bool) -> Result<(), String> {
        for agent in self.agents() {
            let systems = self.events_of(&agent, EventKind::System).count();
            if systems != 1 {
                return Err(format!("{agent}: {systems} system turns"));
            }
            let rounds: Vec<usize> = self.events_of(&agent, EventKind::Outgoing).map(|e| e.round).collect();
            if rounds != (0..self.rounds).collect::<Vec<_>>() {
                return Err(format!("{agent}: outgoing rounds {rounds:?}, expected 0..{}", self.rounds));
            }
            let finals = self.events_of(&agent, EventKind::Final).count();
            if expect_final && finals != 1 {
                return Err(format!("{agent}: {finals} final turns"));
            }
        }
        Ok(())
    }

    /// For every agent and round `r >= 1`, the messages it received equal the
    /// messages addressed to it at `r - 1`; nothing is delivered in round 0.
    /// With `adjacency` (name -> neighbor names) also checks that every
    /// delivery crossed an edge.
    pub fn check_synchrony(&self, adjacency: Option<&BTreeMap<String, BTreeSet<String>>>) -> Result<(), String> {
        let agents = self.agents();
        for agent in &agents {
            if !self.received(agent, 0).is_empty() {
                return Err(format!("{agent} received messages in round 0"));
            }
            for r in 1..self.rounds.max(1) {
                let got = self.received(agent, r);
                let mut expected = BTreeMap::new();
                for sender in &agents {
                    if let Some(env) = self.sent(sender, r - 1) {
                        if let Some(text) = env.get(agent) {
                            expected.insert(sender.clone(), text.clone());
                        }
                    }
                }
                if got != expected {
                    return Err(format!("{agent} round {r}: received {got:?}, sent {expected:?}"));
                }
            }
        }
        if let Some(adj) = adjacency {
            for e in self.events.iter().filter(|e| e.event_kind == EventKind::Incoming) {
                let sender = e.counterpart.as_deref().unwrap_or_default();
                if !adj.get(&e.agent).is_some_and(|n| n.contains(sender)) {
                    return Err(format!("{} received from non-neighbor {sender}", e.agent));
                }
            }
        }
        Ok(())
    }
}
