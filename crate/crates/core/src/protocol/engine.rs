//! Synchronous round engine.
//!
//! Round 0: every agent generates from its system prompt alone. Rounds
//! `1..T`: every agent first receives what its neighbors addressed to it in
//! the previous round, then generates its next envelope. All generations of a
//! round see only state up to the previous round; deliveries happen after the
//! whole round has been generated. Messages produced in the last round are
//! not delivered. Afterwards each agent gets the task's result prompt.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::envelope::parse_message_envelope;
use super::prompt::{answer_retry_prompt, build_system_prompt, envelope_retry_prompt, round_prompt};
use super::transcript::{EventKind, Transcript, TranscriptEvent};
use super::AgentIdentity;
use crate::agents::{AgentBackend, BackendError, ChatMessage, Usage};
use crate::tasks::{parse_final_answer, AnswerSheet, FinalAnswer, TaskSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineOptions {
    /// Extra attempts after an unparseable envelope before the agent sends
    /// nothing for the round.
    pub retry_limit: usize,
    /// Extra attempts after an invalid final answer.
    pub answer_retry_limit: usize,
    /// Generate the agents of a round concurrently.
    pub parallel: bool,
    /// Unix-millisecond timestamps instead of event sequence numbers.
    pub wall_clock: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            retry_limit: 2,
            answer_retry_limit: 1,
            parallel: true,
            wall_clock: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run setup: {0}")]
    Setup(String),
    #[error("backend for {agent} failed: {error}")]
    Backend {
        agent: String,
        error: BackendError,
        partial: Box<Transcript>,
    },
}

/// Counters collected over one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Envelope generations that needed at least one retry.
    pub retried_generations: usize,
    pub envelope_retries: usize,
    /// Generations that exhausted the retry limit and sent nothing.
    pub degraded_generations: usize,
    /// Largest number of retries any single generation needed.
    pub max_retries_per_generation: usize,
    pub answer_retries: usize,
    pub invalid_answers: usize,
    pub dropped_recipients: usize,
    pub backend_calls: usize,
    pub usage: Usage,
}

struct AgentState {
    identity: AgentIdentity,
    backend: Arc<dyn AgentBackend>,
    allowed: BTreeSet<String>,
    history: Vec<ChatMessage>,
}

struct Draft {
    round: usize,
    kind: EventKind,
    agent: String,
    counterpart: Option<String>,
    content: String,
    raw: Option<String>,
}

struct Outcome {
    drafts: Vec<Draft>,
    envelope: BTreeMap<String, String>,
    retries: usize,
    degraded: bool,
    dropped: usize,
    calls: usize,
    usage: Usage,
}

struct FinalOutcome {
    drafts: Vec<Draft>,
    answer: FinalAnswer,
    retries: usize,
    calls: usize,
    usage: Usage,
}

/// A run in progress: agent histories plus the transcript so far.
pub struct Session {
    run_id: String,
    topology_ref: String,
    task: TaskSpec,
    rounds: usize,
    names: Vec<String>,
    agents: Vec<AgentState>,
    events: Vec<TranscriptEvent>,
    stats: RunStats,
    opts: EngineOptions,
    answers: Option<AnswerSheet>,
}

fn generate_envelope(a: &mut AgentState, round: usize, prompt: String, retry_limit: usize) -> Result<Outcome, BackendError> {
    a.history.push(ChatMessage::user(prompt));
    let mut out = Outcome {
        drafts: Vec::new(),
        envelope: BTreeMap::new(),
        retries: 0,
        degraded: false,
        dropped: 0,
        calls: 0,
        usage: Usage::default(),
    };
    for attempt in 0..=retry_limit {
        let generation = a.backend.generate(&a.history)?;
        out.calls += 1;
        out.usage += generation.usage;
        a.history.push(ChatMessage::assistant(generation.text.clone()));
        match parse_message_envelope(&generation.text, &a.allowed) {
            Ok(parsed) => {
                if !parsed.dropped.is_empty() {
                    log::warn!(
                        "{} round {round}: dropping messages to non-neighbors {:?}",
                        a.identity.name,
                        parsed.dropped
                    );
                }
                out.dropped = parsed.dropped.len();
                out.envelope = parsed.messages;
                out.drafts.push(Draft {
                    round,
                    kind: EventKind::Outgoing,
                    agent: a.identity.name.clone(),
                    counterpart: None,
                    content: serde_json::to_string(&out.envelope).expect("string map serializes"),
                    raw: Some(generation.text),
                });
                return Ok(out);
            }
            Err(err) => {
                out.drafts.push(Draft {
                    round,
                    kind: EventKind::Retry,
                    agent: a.identity.name.clone(),
                    counterpart: None,
                    content: generation.text,
                    raw: None,
                });
                if attempt < retry_limit {
                    out.retries += 1;
                    a.history.push(ChatMessage::user(envelope_retry_prompt(&err.to_string())));
                }
            }
        }
    }
    log::warn!("{} round {round}: no valid envelope after {} retries", a.identity.name, retry_limit);
    out.degraded = true;
    out.drafts.push(Draft {
        round,
        kind: EventKind::Outgoing,
        agent: a.identity.name.clone(),
        counterpart: None,
        content: "{}".into(),
        raw: None,
    });
    Ok(out)
}

fn generate_answer(
    a: &mut AgentState,
    task: &TaskSpec,
    names: &[String],
    round: usize,
    retry_limit: usize,
) -> Result<FinalOutcome, BackendError> {
    a.history.push(ChatMessage::user(task.final_request(&a.identity.neighbor_names)));
    let grammar = task.grammar(names);
    let mut out = FinalOutcome {
        drafts: Vec::new(),
        answer: FinalAnswer::Invalid,
        retries: 0,
        calls: 0,
        usage: Usage::default(),
    };
    let mut last_raw = String::new();
    for attempt in 0..=retry_limit {
        let generation = a.backend.generate(&a.history)?;
        out.calls += 1;
        out.usage += generation.usage;
        a.history.push(ChatMessage::assistant(generation.text.clone()));
        let answer = parse_final_answer(task.kind, &generation.text, &grammar);
        last_raw = generation.text;
        if answer.is_valid() {
            out.answer = answer;
            break;
        }
        out.drafts.push(Draft {
            round,
            kind: EventKind::Retry,
            agent: a.identity.name.clone(),
            counterpart: None,
            content: last_raw.clone(),
            raw: None,
        });
        if attempt < retry_limit {
            out.retries += 1;
            a.history.push(ChatMessage::user(answer_retry_prompt()));
        }
    }
    out.drafts.push(Draft {
        round,
        kind: EventKind::Final,
        agent: a.identity.name.clone(),
        counterpart: None,
        content: out.answer.canonical(),
        raw: Some(last_raw),
    });
    Ok(out)
}

fn map_agents<T, F>(agents: &mut [AgentState], parallel: bool, f: F) -> Vec<Result<T, BackendError>>
where
    T: Send,
    F: Fn(usize, &mut AgentState) -> Result<T, BackendError> + Sync + Send,
{
    if parallel {
        agents.par_iter_mut().enumerate().map(|(i, a)| f(i, a)).collect()
    } else {
        agents.iter_mut().enumerate().map(|(i, a)| f(i, a)).collect()
    }
}

impl Session {
    fn push(&mut self, d: Draft) {
        let timestamp = if self.opts.wall_clock {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|t| t.as_millis() as u64)
                .unwrap_or(0)
        } else {
            self.events.len() as u64
        };
        self.events.push(TranscriptEvent {
            run_id: self.run_id.clone(),
            task: self.task.kind,
            topology_ref: self.topology_ref.clone(),
            round: d.round,
            event_kind: d.kind,
            agent: d.agent,
            counterpart: d.counterpart,
            content: d.content,
            raw: d.raw,
            timestamp,
        });
    }

    fn backend_failure(&self, agent: usize, error: BackendError) -> RunError {
        RunError::Backend {
            agent: self.names[agent].clone(),
            error,
            partial: Box::new(self.transcript()),
        }
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn answers(&self) -> Option<&AnswerSheet> {
        self.answers.as_ref()
    }

    /// Chat history of the agent called `name`.
    pub fn history(&self, name: &str) -> Option<&[ChatMessage]> {
        self.agents
            .iter()
            .find(|a| a.identity.name == name)
            .map(|a| a.history.as_slice())
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            run_id: self.run_id.clone(),
            task: self.task.kind,
            topology_ref: self.topology_ref.clone(),
            rounds: self.rounds,
            events: self.events.clone(),
        }
    }

    /// Sends each agent the result prompt and parses its answer, retrying
    /// invalid answers up to the answer retry limit. Calling it again returns
    /// the answers collected the first time.
    pub fn collect_final_answers(&mut self) -> Result<AnswerSheet, RunError> {
        if let Some(a) = &self.answers {
            return Ok(a.clone());
        }
        let task = self.task;
        let names = self.names.clone();
        let rounds = self.rounds;
        let limit = self.opts.answer_retry_limit;
        let outcomes = map_agents(&mut self.agents, self.opts.parallel, |_, a| {
            generate_answer(a, &task, &names, rounds, limit)
        });
        let mut sheet = AnswerSheet::new();
        for (i, outcome) in outcomes.into_iter().enumerate() {
            let o = outcome.map_err(|e| self.backend_failure(i, e))?;
            self.stats.answer_retries += o.retries;
            self.stats.backend_calls += o.calls;
            self.stats.usage += o.usage;
            if !o.answer.is_valid() {
                self.stats.invalid_answers += 1;
            }
            for d in o.drafts {
                self.push(d);
            }
            sheet.insert(self.names[i].clone(), o.answer);
        }
        self.answers = Some(sheet.clone());
        Ok(sheet)
    }
}

/// Identifiers stamped on every transcript event of a run.
#[derive(Debug, Clone)]
pub struct RunLabels {
    pub run_id: String,
    pub topology_ref: String,
}

/// Executes `rounds` synchronous rounds. `agents` holds one identity and
/// backend per node, in node-index order.
pub fn run_rounds(
    agents: Vec<(AgentIdentity, Arc<dyn AgentBackend>)>,
    task: TaskSpec,
    rounds: usize,
    labels: RunLabels,
    opts: EngineOptions,
) -> Result<Session, RunError> {
    if rounds == 0 {
        return Err(RunError::Setup("at least one round is required".into()));
    }
    let n = agents.len();
    let names: Vec<String> = agents.iter().map(|(id, _)| id.name.clone()).collect();
    let index: BTreeMap<String, usize> = names.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    if index.len() != n {
        return Err(RunError::Setup("agent names are not unique".into()));
    }
    for (i, (id, _)) in agents.iter().enumerate() {
        if id.node_index != i {
            return Err(RunError::Setup(format!("agent {} out of node order", id.name)));
        }
        if let Some(bad) = id.neighbor_names.iter().find(|nb| !index.contains_key(*nb)) {
            return Err(RunError::Setup(format!("{} lists unknown neighbor {bad}", id.name)));
        }
    }
    let mut session = Session {
        run_id: labels.run_id,
        topology_ref: labels.topology_ref,
        task,
        rounds,
        names,
        agents: Vec::with_capacity(n),
        events: Vec::new(),
        stats: RunStats::default(),
        opts,
        answers: None,
    };
    for (identity, backend) in agents {
        let system = build_system_prompt(&task, &identity, n, rounds);
        session.push(Draft {
            round: 0,
            kind: EventKind::System,
            agent: identity.name.clone(),
            counterpart: None,
            content: system.clone(),
            raw: None,
        });
        session.agents.push(AgentState {
            allowed: identity.neighbor_names.iter().cloned().collect(),
            identity,
            backend,
            history: vec![ChatMessage::system(system)],
        });
    }

    let mut inbox: Vec<BTreeMap<String, String>> = vec![BTreeMap::new(); n];
    for round in 0..rounds {
        let mut prompts = Vec::with_capacity(n);
        for (i, received) in std::mem::replace(&mut inbox, vec![BTreeMap::new(); n]).into_iter().enumerate() {
            let incoming: Vec<(String, String)> = received.into_iter().collect();
            for (sender, text) in &incoming {
                session.push(Draft {
                    round,
                    kind: EventKind::Incoming,
                    agent: session.names[i].clone(),
                    counterpart: Some(sender.clone()),
                    content: text.clone(),
                    raw: None,
                });
            }
            prompts.push(round_prompt(round, &incoming));
        }
        let limit = session.opts.retry_limit;
        let outcomes = map_agents(&mut session.agents, session.opts.parallel, |i, a| {
            generate_envelope(a, round, prompts[i].clone(), limit)
        });
        for (i, outcome) in outcomes.into_iter().enumerate() {
            let o = outcome.map_err(|e| session.backend_failure(i, e))?;
            let stats = &mut session.stats;
            stats.envelope_retries += o.retries;
            stats.retried_generations += usize::from(o.retries > 0);
            stats.max_retries_per_generation = stats.max_retries_per_generation.max(o.retries);
            stats.degraded_generations += usize::from(o.degraded);
            stats.dropped_recipients += o.dropped;
            stats.backend_calls += o.calls;
            stats.usage += o.usage;
            for d in o.drafts {
                session.push(d);
            }
            if round + 1 < rounds {
                let sender = session.names[i].clone();
                for (recipient, text) in o.envelope {
                    inbox[index[&recipient]].insert(sender.clone(), text);
                }
            }
        }
    }
    Ok(session)
}
