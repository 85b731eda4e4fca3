use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, RoundPolicy};
use super::record::{read_records, RecordKey, RunRecord, RECORD_SCHEMA_VERSION};
use super::{io_err, HarnessError};
use crate::agents::{AgentBackend, BackendFactory};
use crate::protocol::{
    assign_names, compute_round_budget, run_rounds, AgentIdentity, EventKind, RunError, RunLabels, RunStats, Transcript,
    NAME_POOL,
};
use crate::seed::derive;
use crate::tasks::{parse_answer_body, AnswerSheet, TaskKind, TaskSpec};
use crate::topology::{gen_benchmark_suite, parse_topology, serialize_topology, SuiteTopology, Topology};

/// Files of one experiment directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentLayout {
    pub root: PathBuf,
    pub config: PathBuf,
    pub records: PathBuf,
    pub topologies: PathBuf,
    pub transcripts: PathBuf,
}

impl ExperimentLayout {
    pub fn topology_file(&self, reference: &str) -> PathBuf {
        self.topologies.join(format!("{reference}.txt"))
    }

    pub fn transcript_file(&self, run_id: &str) -> PathBuf {
        self.transcripts.join(format!("{run_id}.jsonl"))
    }
}

pub fn experiment_layout(root: &Path) -> ExperimentLayout {
    ExperimentLayout {
        root: root.to_path_buf(),
        config: root.join("config.toml"),
        records: root.join("records.jsonl"),
        topologies: root.join("topologies"),
        transcripts: root.join("transcripts"),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Continue an existing experiment directory, skipping completed runs.
    pub resume: bool,
    /// Stop after this many new runs (used to emulate interruptions).
    pub limit: Option<usize>,
}

/// Runs the configured experiment with the backend it names and returns all
/// records of the experiment directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, HarnessError> {
    let factory = cfg.backend.factory()?;
    run_experiment_with(cfg, factory.as_ref(), RunOptions::default())
}

struct Job {
    task: TaskKind,
    member: usize,
    repeat: usize,
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn rounds_for(policy: RoundPolicy, kind: TaskKind, t: &Topology) -> Result<usize, HarnessError> {
    Ok(match policy {
        RoundPolicy::NodeCount => t.node_count(),
        RoundPolicy::Fixed(r) => r,
        RoundPolicy::Benchmark | RoundPolicy::Scaling => {
            compute_round_budget(kind, t, policy.budget_mode().expect("budget policy"))?
        }
    })
}

/// Executes one run. Returns the record and the transcript text.
fn execute(
    cfg: &ExperimentConfig,
    factory: &dyn BackendFactory,
    label: &str,
    member: &SuiteTopology,
    task_kind: TaskKind,
    repeat: usize,
) -> Result<(RunRecord, String), HarnessError> {
    let started = Instant::now();
    let t = &member.topology;
    let reference = member.reference();
    let seed = derive(
        cfg.seed,
        &[
            task_kind.index(),
            member.size as u64,
            member.family.index(),
            member.instance as u64,
            repeat as u64,
        ],
    );
    let ids = assign_names(t, NAME_POOL, seed).map_err(|e| HarnessError::Config(e.to_string()))?;
    let names: Vec<String> = ids.iter().map(|i| i.name.clone()).collect();
    let task = TaskSpec::for_topology(task_kind, t);
    let rounds = rounds_for(cfg.rounds, task_kind, t)?;
    let run_id = file_safe(&format!("{label}-{task_kind}-{reference}-r{repeat}"));
    let mut record = RunRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        run_id: run_id.clone(),
        model: label.to_string(),
        task: task_kind,
        topology_ref: reference.clone(),
        size: member.size,
        family: member.family,
        instance: member.instance,
        repeat,
        rounds,
        seed,
        soft_score: 0.0,
        solved: 0,
        agents: names.clone(),
        stats: RunStats::default(),
        wall_time_ms: None,
        failed: false,
        failure: None,
    };
    let mut agents: Vec<(AgentIdentity, Arc<dyn AgentBackend>)> = Vec::with_capacity(ids.len());
    for id in ids {
        let backend = factory.make(&task, &id, seed)?;
        agents.push((id, backend));
    }
    let labels = RunLabels {
        run_id,
        topology_ref: reference,
    };
    let outcome = run_rounds(agents, task, rounds, labels, cfg.engine.clone())
        .and_then(|mut session| match session.collect_final_answers() {
            Ok(answers) => Ok((session.transcript(), session.stats().clone(), answers)),
            Err(e) => Err(e),
        });
    let transcript = match outcome {
        Ok((transcript, stats, answers)) => {
            let labeled = t.clone().with_labels(&names)?;
            let eval = task.evaluate(&labeled, &answers);
            record.soft_score = eval.soft_score;
            record.solved = u8::from(eval.solved);
            record.stats = stats;
            transcript
        }
        Err(RunError::Backend { agent, error, partial }) => {
            log::warn!("{}: backend of {agent} failed: {error}", record.run_id);
            record.failed = true;
            record.failure = Some(format!("backend for {agent} failed: {error}"));
            *partial
        }
        Err(e @ RunError::Setup(_)) => return Err(HarnessError::Config(e.to_string())),
    };
    if cfg.record_wall_time {
        record.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    }
    Ok((record, transcript.to_jsonl()))
}

fn prepare_directory(cfg: &ExperimentConfig, layout: &ExperimentLayout, opts: RunOptions) -> Result<(), HarnessError> {
    let snapshot = cfg.to_toml_string();
    if layout.config.exists() {
        if !opts.resume {
            return Err(HarnessError::Config(format!(
                "{} already holds an experiment; resume it or choose another output_dir",
                layout.root.display()
            )));
        }
        let existing = ExperimentConfig::load(&layout.config)?;
        if existing != *cfg {
            return Err(HarnessError::Config(
                "configuration differs from the snapshot of the experiment being resumed".into(),
            ));
        }
    }
    for dir in [&layout.root, &layout.topologies, &layout.transcripts] {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(&layout.config, snapshot).map_err(io_err(&layout.config))
}

/// Runs every (task, topology, repeat) combination not yet present in the
/// records file, `cfg.concurrency` at a time. Records are appended by a
/// single writer in job order, so the records file does not depend on
/// scheduling. Returns all records of the experiment (previous and new).
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    factory: &dyn BackendFactory,
    opts: RunOptions,
) -> Result<Vec<RunRecord>, HarnessError> {
    cfg.validate()?;
    let layout = experiment_layout(&cfg.output_dir);
    prepare_directory(cfg, &layout, opts)?;
    let suite = gen_benchmark_suite(&cfg.suite.spec())?;
    for m in &suite {
        let path = layout.topology_file(&m.reference());
        fs::write(&path, serialize_topology(&m.topology)).map_err(io_err(&path))?;
    }

    let mut records = read_records(&layout.records)?;
    let done: BTreeSet<RecordKey> = records.iter().map(RunRecord::key).collect();
    let mut jobs = Vec::new();
    for &task in &cfg.tasks {
        for (member, m) in suite.iter().enumerate() {
            for repeat in 0..cfg.repeats {
                if !done.contains(&(m.size, task, m.family, m.instance, repeat)) {
                    jobs.push(Job { task, member, repeat });
                }
            }
        }
    }
    if let Some(limit) = opts.limit {
        jobs.truncate(limit);
    }
    log::info!(
        "{}: {} runs to execute, {} already recorded",
        cfg.name,
        jobs.len(),
        records.len()
    );

    let label = factory.label();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&layout.records)
        .map_err(io_err(&layout.records))?;

    let (tx, rx) = mpsc::channel::<(usize, Result<(RunRecord, String), HarnessError>)>();
    let written = std::thread::scope(|scope| {
        let writer = scope.spawn(|| -> Result<Vec<RunRecord>, HarnessError> {
            let mut pending = BTreeMap::new();
            let mut next = 0;
            let mut out = Vec::new();
            for (idx, result) in rx {
                pending.insert(idx, result);
                while let Some(result) = pending.remove(&next) {
                    let (record, transcript) = result?;
                    let tpath = layout.transcript_file(&record.run_id);
                    fs::write(&tpath, transcript).map_err(io_err(&tpath))?;
                    file.write_all(record.to_json_line().as_bytes())
                        .and_then(|_| file.flush())
                        .map_err(io_err(&layout.records))?;
                    out.push(record);
                    next += 1;
                }
            }
            Ok(out)
        });
        pool.install(|| {
            jobs.par_iter().enumerate().for_each_with(tx, |tx, (idx, job)| {
                let result = execute(cfg, factory, &label, &suite[job.member], job.task, job.repeat);
                // The writer only stops early on an error, which is reported below.
                let _ = tx.send((idx, result));
            });
        });
        writer.join().expect("record writer panicked")
    })?;
    records.extend(written);
    Ok(records)
}

/// Recomputed evaluation of one persisted run.
#[derive(Debug, Clone, PartialEq)]
pub struct Reevaluation {
    pub record: RunRecord,
    pub soft_score: f64,
    pub solved: u8,
}

impl Reevaluation {
    pub fn matches(&self) -> bool {
        self.soft_score == self.record.soft_score && self.solved == self.record.solved
    }
}

/// Answers recorded in a transcript's final events, parsed with the task grammar.
pub fn answers_from_transcript(tr: &Transcript, task: &TaskSpec, names: &[String]) -> AnswerSheet {
    let grammar = task.grammar(names);
    tr.events
        .iter()
        .filter(|e| e.event_kind == EventKind::Final)
        .map(|e| (e.agent.clone(), parse_answer_body(task.kind, &e.content, &grammar)))
        .collect()
}

/// Re-evaluates every completed run of an experiment directory from its
/// topology and transcript files.
pub fn reevaluate(root: &Path) -> Result<Vec<Reevaluation>, HarnessError> {
    let layout = experiment_layout(root);
    let mut out = Vec::new();
    for record in read_records(&layout.records)? {
        if record.failed {
            continue;
        }
        let tpath = layout.topology_file(&record.topology_ref);
        let topo_text = fs::read_to_string(&tpath).map_err(io_err(&tpath))?;
        let topology = parse_topology(&topo_text)?.with_labels(&record.agents)?;
        let path = layout.transcript_file(&record.run_id);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let transcript = Transcript::from_jsonl(&text).map_err(|e| HarnessError::Record {
            path: path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        let task = TaskSpec::for_topology(record.task, &topology);
        let answers = answers_from_transcript(&transcript, &task, &record.agents);
        let eval = task.evaluate(&topology, &answers);
        out.push(Reevaluation {
            soft_score: eval.soft_score,
            solved: u8::from(eval.solved),
            record,
        });
    }
    Ok(out)
}
