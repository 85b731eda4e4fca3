//! C interface to the meshbench library.
//!
//! Objects cross the boundary as opaque handles created by `mb_*_new`-style
//! constructors and released with the matching `mb_*_free`. Every fallible
//! function returns an [`MbStatus`]; on failure a description is available
//! from [`mb_last_error`] on the same thread. Strings returned through out
//! parameters are owned by the caller and must be released with
//! [`mb_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use meshbench::agents::{AgentBackend, BackendFactory, ScriptedFactory};
use meshbench::harness::{
    read_records, run_experiment, summarize, AggregateOptions, ExperimentConfig, Metric, ReportFormat, ReportTable,
    RunRecord,
};
use meshbench::protocol::{
    assign_names, compute_round_budget, run_rounds, AgentIdentity, BudgetMode, EngineOptions, RunLabels, NAME_POOL,
};
use meshbench::tasks::{oracle_check, parse_answer_body, AnswerSheet, TaskKind, TaskSpec};
use meshbench::topology::{metrics, parse_topology, serialize_topology, FamilyParams, GraphFamily, Topology};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument had an invalid value (unknown task name, bad index, ...).
    InvalidArgument = 2,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 3,
    /// Reading or writing a file failed.
    Io = 4,
    /// Topology generation or parsing failed.
    Topology = 5,
    /// An experiment or run could not be completed.
    Run = 6,
    /// The brute-force validator cannot handle the input size.
    TooLarge = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 99,
}

/// A generated or parsed network.
pub struct MbTopology {
    inner: Topology,
}

/// Records of one or more experiments.
pub struct MbRecords {
    inner: Vec<RunRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(MbStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: MbStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Outcome) -> MbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error (panic caught at the C boundary)");
            MbStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(MbStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(MbStatus::NullArgument, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return fail(MbStatus::NullArgument, format!("{what} is null"));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NUL bytes removed").into_raw()
}

fn task_kind(name: &str) -> Result<TaskKind, Failure> {
    name.parse()
        .map_err(|e: meshbench::tasks::UnknownTask| Failure(MbStatus::InvalidArgument, e.to_string()))
}

/// Answers keyed by node index (as a JSON object of strings).
fn answer_sheet(t: &Topology, kind: TaskKind, json: &str) -> Result<AnswerSheet, Failure> {
    let raw: BTreeMap<String, String> =
        serde_json::from_str(json).map_err(|e| Failure(MbStatus::InvalidArgument, format!("answers: {e}")))?;
    let names = t.names();
    let grammar = TaskSpec::for_topology(kind, t).grammar(&names);
    Ok(raw
        .iter()
        .map(|(k, v)| (k.clone(), parse_answer_body(kind, v, &grammar)))
        .collect())
}

/// Description of the last failure on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generates a connected topology. `family` is `small_world`, `scale_free`
/// or `delaunay`; generator parameters use the suite defaults.
///
/// # Safety
/// `family` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_generate(
    family: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut MbTopology,
) -> MbStatus {
    guard(|| {
        let family: GraphFamily = text(family, "family")?
            .parse()
            .map_err(|e: meshbench::topology::TopologyError| Failure(MbStatus::InvalidArgument, e.to_string()))?;
        let t = FamilyParams::default()
            .generate(family, n, seed)
            .map_err(|e| Failure(MbStatus::Topology, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(MbTopology { inner: t })), "out")
    })
}

/// Parses a topology in the text exchange format.
///
/// # Safety
/// `text_in` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_parse(text_in: *const c_char, out: *mut *mut MbTopology) -> MbStatus {
    guard(|| {
        let t = parse_topology(text(text_in, "text")?).map_err(|e| Failure(MbStatus::Topology, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(MbTopology { inner: t })), "out")
    })
}

/// # Safety
/// `t` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_free(t: *mut MbTopology) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_node_count(t: *const MbTopology) -> usize {
    t.as_ref().map_or(0, |t| t.inner.node_count())
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_edge_count(t: *const MbTopology) -> usize {
    t.as_ref().map_or(0, |t| t.inner.edge_count())
}

/// Endpoints (`u < v`) of edge `index` in sorted edge order.
///
/// # Safety
/// `t` must be a live handle; `u` and `v` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_edge(t: *const MbTopology, index: usize, u: *mut usize, v: *mut usize) -> MbStatus {
    guard(|| {
        let t = handle(t, "topology")?;
        let &(a, b) = t
            .inner
            .edges()
            .get(index)
            .ok_or_else(|| Failure(MbStatus::InvalidArgument, format!("edge index {index} out of range")))?;
        write_out(u, a, "u")?;
        write_out(v, b, "v")
    })
}

/// Diameter and maximum degree.
///
/// # Safety
/// `t` must be a live handle; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_metrics(
    t: *const MbTopology,
    diameter: *mut usize,
    max_degree: *mut usize,
) -> MbStatus {
    guard(|| {
        let m = metrics(&handle(t, "topology")?.inner).map_err(|e| Failure(MbStatus::Topology, e.to_string()))?;
        write_out(diameter, m.diameter, "diameter")?;
        write_out(max_degree, m.max_degree, "max_degree")
    })
}

/// Text exchange format of the topology; free with [`mb_string_free`].
///
/// # Safety
/// `t` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mb_topology_serialize(t: *const MbTopology, out: *mut *mut c_char) -> MbStatus {
    guard(|| {
        let s = serialize_topology(&handle(t, "topology")?.inner);
        write_out(out, owned_string(s), "out")
    })
}

/// Round budget for a task (`coloring`, `consensus`, `leader_election`,
/// `matching`, `vertex_cover`); `scaling` selects `2D + 1` for every task.
///
/// # Safety
/// `t` must be a live handle, `task` a NUL-terminated string, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mb_round_budget(t: *const MbTopology, task: *const c_char, scaling: bool, out: *mut usize) -> MbStatus {
    guard(|| {
        let kind = task_kind(text(task, "task")?)?;
        let mode = if scaling { BudgetMode::Scaling } else { BudgetMode::Benchmark };
        let r = compute_round_budget(kind, &handle(t, "topology")?.inner, mode)
            .map_err(|e| Failure(MbStatus::Topology, e.to_string()))?;
        write_out(out, r, "out")
    })
}

/// Scores answers given as a JSON object mapping node index to answer text
/// (e.g. `{"0": "Group 1", "1": "Group 2"}`).
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mb_evaluate(
    t: *const MbTopology,
    task: *const c_char,
    answers_json: *const c_char,
    soft_score: *mut f64,
    solved: *mut bool,
) -> MbStatus {
    guard(|| {
        let t = &handle(t, "topology")?.inner;
        let kind = task_kind(text(task, "task")?)?;
        let sheet = answer_sheet(t, kind, text(answers_json, "answers")?)?;
        let eval = TaskSpec::for_topology(kind, t).evaluate(t, &sheet);
        write_out(soft_score, eval.soft_score, "soft_score")?;
        write_out(solved, eval.solved, "solved")
    })
}

/// Brute-force validation of answers (same format as [`mb_evaluate`]);
/// returns `MB_STATUS_TOO_LARGE` beyond the validator's node limit.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mb_oracle_check(
    t: *const MbTopology,
    task: *const c_char,
    answers_json: *const c_char,
    solved: *mut bool,
) -> MbStatus {
    guard(|| {
        let t = &handle(t, "topology")?.inner;
        let kind = task_kind(text(task, "task")?)?;
        let sheet = answer_sheet(t, kind, text(answers_json, "answers")?)?;
        let ok = oracle_check(kind, t, &sheet).map_err(|e| Failure(MbStatus::TooLarge, e.to_string()))?;
        write_out(solved, ok, "solved")
    })
}

/// Runs the scripted algorithm for `task` on the topology for `rounds`
/// rounds (0 selects the benchmark budget). Writes the scores and, when
/// `transcript` is non-null, the transcript as JSON lines.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated; `transcript` may be null.
#[no_mangle]
pub unsafe extern "C" fn mb_run_scripted(
    t: *const MbTopology,
    task: *const c_char,
    rounds: usize,
    seed: u64,
    soft_score: *mut f64,
    solved: *mut bool,
    transcript: *mut *mut c_char,
) -> MbStatus {
    guard(|| {
        let t = &handle(t, "topology")?.inner;
        let kind = task_kind(text(task, "task")?)?;
        let rounds = if rounds == 0 {
            compute_round_budget(kind, t, BudgetMode::Benchmark).map_err(|e| Failure(MbStatus::Topology, e.to_string()))?
        } else {
            rounds
        };
        let ids = assign_names(t, NAME_POOL, seed).map_err(|e| Failure(MbStatus::InvalidArgument, e.to_string()))?;
        let names: Vec<String> = ids.iter().map(|i| i.name.clone()).collect();
        let spec = TaskSpec::for_topology(kind, t);
        let mut agents: Vec<(AgentIdentity, Arc<dyn AgentBackend>)> = Vec::new();
        for id in ids {
            let b = ScriptedFactory
                .make(&spec, &id, seed)
                .map_err(|e| Failure(MbStatus::Run, e.to_string()))?;
            agents.push((id, b));
        }
        let labels = RunLabels {
            run_id: format!("scripted-{kind}"),
            topology_ref: "ffi".into(),
        };
        let mut session = run_rounds(agents, spec, rounds, labels, EngineOptions::default())
            .map_err(|e| Failure(MbStatus::Run, e.to_string()))?;
        let answers = session
            .collect_final_answers()
            .map_err(|e| Failure(MbStatus::Run, e.to_string()))?;
        let labeled = t
            .clone()
            .with_labels(&names)
            .map_err(|e| Failure(MbStatus::Topology, e.to_string()))?;
        let eval = spec.evaluate(&labeled, &answers);
        write_out(soft_score, eval.soft_score, "soft_score")?;
        write_out(solved, eval.solved, "solved")?;
        if !transcript.is_null() {
            transcript.write(owned_string(session.transcript().to_jsonl()));
        }
        Ok(())
    })
}

/// Runs the experiment described by a TOML configuration and returns its
/// records.
///
/// # Safety
/// `config_toml` must be NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mb_experiment_run(config_toml: *const c_char, out: *mut *mut MbRecords) -> MbStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_toml_str(text(config_toml, "config")?)
            .map_err(|e| Failure(MbStatus::InvalidArgument, e.to_string()))?;
        let records = run_experiment(&cfg).map_err(|e| Failure(MbStatus::Run, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(MbRecords { inner: records })), "out")
    })
}

/// Loads a records file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mb_records_load(path: *const c_char, out: *mut *mut MbRecords) -> MbStatus {
    guard(|| {
        let path = Path::new(text(path, "path")?);
        if !path.exists() {
            return fail(MbStatus::Io, format!("{} does not exist", path.display()));
        }
        let records = read_records(path).map_err(|e| Failure(MbStatus::Io, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(MbRecords { inner: records })), "out")
    })
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_records_len(r: *const MbRecords) -> usize {
    r.as_ref().map_or(0, |r| r.inner.len())
}

/// Number of solved runs, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_records_solved(r: *const MbRecords) -> usize {
    r.as_ref()
        .map_or(0, |r| r.inner.iter().filter(|x| !x.failed && x.solved == 1).count())
}

/// # Safety
/// `r` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mb_records_free(r: *mut MbRecords) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Renders the results table. `format` is `text`, `csv` or `markdown`;
/// `metric` is `solved` or `soft`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mb_records_report(
    r: *const MbRecords,
    format: *const c_char,
    metric: *const c_char,
    allow_partial: bool,
    out: *mut *mut c_char,
) -> MbStatus {
    guard(|| {
        let records = &handle(r, "records")?.inner;
        let format: ReportFormat = text(format, "format")?
            .parse()
            .map_err(|e: String| Failure(MbStatus::InvalidArgument, e))?;
        let metric = match text(metric, "metric")? {
            "solved" => Metric::Solved,
            "soft" => Metric::Soft,
            other => return fail(MbStatus::InvalidArgument, format!("unknown metric `{other}`")),
        };
        let opts = AggregateOptions {
            allow_partial,
            ..Default::default()
        };
        let reports = summarize(records, metric, &opts).map_err(|e| Failure(MbStatus::InvalidArgument, e.to_string()))?;
        write_out(out, owned_string(ReportTable::from_reports(&reports).render(format)), "out")
    })
}
