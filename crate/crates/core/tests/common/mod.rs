//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::sync::Arc;

use meshbench::agents::{AgentBackend, BackendFactory};
use meshbench::protocol::{assign_names, run_rounds, AgentIdentity, EngineOptions, RunLabels, Session, NAME_POOL};
use meshbench::tasks::{AnswerSheet, Evaluation, FinalAnswer, TaskKind, TaskSpec};
use meshbench::topology::Topology;
use rand::Rng;

/// Uniformly random answer for node `v`, drawn from the task's options plus
/// an invalid answer; matching answers may also name a non-neighbor.
pub fn random_answer(kind: TaskKind, t: &Topology, v: usize, rng: &mut impl Rng) -> FinalAnswer {
    let groups = t.max_degree() + 1;
    if rng.gen_ratio(1, 20) {
        return FinalAnswer::Invalid;
    }
    match kind {
        TaskKind::Coloring => FinalAnswer::GroupChoice(rng.gen_range(1..=groups)),
        TaskKind::VertexCover | TaskKind::LeaderElection => FinalAnswer::YesNo(rng.gen()),
        TaskKind::Consensus => FinalAnswer::Bit(rng.gen_range(0..=1)),
        TaskKind::Matching => {
            let adj = &t.adjacency()[v];
            match rng.gen_range(0..10) {
                0..=1 => FinalAnswer::PartnerChoice(None),
                2 => FinalAnswer::PartnerChoice(Some(t.name_of(rng.gen_range(0..t.node_count())))),
                _ => FinalAnswer::PartnerChoice(Some(t.name_of(adj[rng.gen_range(0..adj.len())]))),
            }
        }
    }
}

pub fn random_sheet(kind: TaskKind, t: &Topology, rng: &mut impl Rng) -> AnswerSheet {
    (0..t.node_count())
        .map(|v| (t.name_of(v), random_answer(kind, t, v, rng)))
        .collect()
}

/// Runs one task on `t` with agents from `factory`, all receiving `seed`.
/// Returns the labelled topology, the session and the evaluation.
pub fn simulate(
    t: &Topology,
    kind: TaskKind,
    rounds: usize,
    seed: u64,
    factory: &dyn BackendFactory,
    opts: EngineOptions,
) -> (Topology, Session, Evaluation) {
    let ids = assign_names(t, NAME_POOL, seed).unwrap();
    let names: Vec<String> = ids.iter().map(|i| i.name.clone()).collect();
    let task = TaskSpec::for_topology(kind, t);
    let agents: Vec<(AgentIdentity, Arc<dyn AgentBackend>)> = ids
        .into_iter()
        .map(|id| {
            let b = factory.make(&task, &id, seed).unwrap();
            (id, b)
        })
        .collect();
    let labels = RunLabels {
        run_id: format!("{kind}-{seed}"),
        topology_ref: "test".into(),
    };
    let mut session = run_rounds(agents, task, rounds, labels, opts).unwrap();
    let answers = session.collect_final_answers().unwrap();
    let labeled = t.clone().with_labels(&names).unwrap();
    let eval = task.evaluate(&labeled, &answers);
    (labeled, session, eval)
}

/// One request received by [`StubServer`].
#[derive(Debug, Clone)]
pub struct StubRequest {
    pub path: String,
    pub authorization: Option<String>,
    pub body: serde_json::Value,
}

type Handler = dyn Fn(usize, &StubRequest) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server standing in for a chat-completion endpoint. Each
/// connection is served on its own thread and closed after one response.
pub struct StubServer {
    pub base_url: String,
    pub requests: std::sync::Arc<std::sync::Mutex<Vec<StubRequest>>>,
    pub max_in_flight: std::sync::Arc<std::sync::atomic::AtomicUsize>,
}

fn read_request(stream: &mut std::net::TcpStream) -> Option<StubRequest> {
    use std::io::Read;
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    let header_end = loop {
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            return None;
        }
        buf.extend_from_slice(&chunk[..n]);
        if let Some(p) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
            break p + 4;
        }
    };
    let head = String::from_utf8_lossy(&buf[..header_end]).to_string();
    let mut lines = head.lines();
    let path = lines.next()?.split_whitespace().nth(1)?.to_string();
    let mut length = 0usize;
    let mut authorization = None;
    for line in lines {
        if let Some((k, v)) = line.split_once(':') {
            match k.trim().to_ascii_lowercase().as_str() {
                "content-length" => length = v.trim().parse().ok()?,
                "authorization" => authorization = Some(v.trim().to_string()),
                _ => {}
            }
        }
    }
    while buf.len() < header_end + length {
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            break;
        }
        buf.extend_from_slice(&chunk[..n]);
    }
    let body = serde_json::from_slice(&buf[header_end..]).unwrap_or(serde_json::Value::Null);
    Some(StubRequest {
        path,
        authorization,
        body,
    })
}

impl StubServer {
    /// `handler(index, request)` returns the status code and body for the
    /// `index`-th request (0-based, in arrival order).
    pub fn start(handler: impl Fn(usize, &StubRequest) -> (u16, String) + Send + Sync + 'static) -> Self {
        use std::io::Write;
        use std::sync::atomic::Ordering;
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}/v1", listener.local_addr().unwrap());
        let requests = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
        let in_flight = std::sync::Arc::new(std::sync::atomic::AtomicUsize::new(0));
        let max_in_flight = std::sync::Arc::new(std::sync::atomic::AtomicUsize::new(0));
        let handler: std::sync::Arc<Handler> = std::sync::Arc::new(handler);
        let (log, cur, max) = (requests.clone(), in_flight, max_in_flight.clone());
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let (log, cur, max, handler) = (log.clone(), cur.clone(), max.clone(), handler.clone());
                std::thread::spawn(move || {
                    let Some(req) = read_request(&mut stream) else { return };
                    let now = cur.fetch_add(1, Ordering::SeqCst) + 1;
                    max.fetch_max(now, Ordering::SeqCst);
                    let index = {
                        let mut log = log.lock().unwrap();
                        log.push(req.clone());
                        log.len() - 1
                    };
                    let (status, body) = handler(index, &req);
                    cur.fetch_sub(1, Ordering::SeqCst);
                    let reason = if status == 200 { "OK" } else { "Error" };
                    let _ = write!(
                        stream,
                        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                        body.len()
                    );
                });
            }
        });
        StubServer {
            base_url,
            requests,
            max_in_flight,
        }
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

/// Body of a successful chat-completion response.
pub fn completion_body(text: &str, prompt_tokens: u64, completion_tokens: u64) -> String {
    serde_json::json!({
        "id": "cmpl-test",
        "object": "chat.completion",
        "choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
        "usage": {"prompt_tokens": prompt_tokens, "completion_tokens": completion_tokens, "total_tokens": prompt_tokens + completion_tokens},
    })
    .to_string()
}

/// Chat messages carried by a completion request.
pub fn request_messages(req: &StubRequest) -> Vec<meshbench::agents::ChatMessage> {
    serde_json::from_value(req.body["messages"].clone()).unwrap()
}

/// A completed run record with the given coordinates and scores.
#[allow(clippy::too_many_arguments)]
pub fn record(
    model: &str,
    task: TaskKind,
    size: usize,
    family: meshbench::topology::GraphFamily,
    instance: usize,
    repeat: usize,
    solved: bool,
    soft_score: f64,
) -> meshbench::harness::RunRecord {
    meshbench::harness::RunRecord {
        schema_version: meshbench::harness::RECORD_SCHEMA_VERSION,
        run_id: format!("{model}-{task}-{family}-n{size}-i{instance}-r{repeat}"),
        model: model.to_string(),
        task,
        topology_ref: format!("{family}-n{size}-i{instance}"),
        size,
        family,
        instance,
        repeat,
        rounds: 4,
        seed: 0,
        soft_score,
        solved: u8::from(solved),
        agents: Vec::new(),
        stats: Default::default(),
        wall_time_ms: None,
        failed: false,
        failure: None,
    }
}
