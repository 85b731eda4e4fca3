mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use meshbench::agents::{AgentBackend, BackendError, BackendFactory, ChatMessage, Generation, ScriptedFactory};
use meshbench::harness::{
    emit_plots, experiment_layout, read_records, reevaluate, run_experiment, run_experiment_with, summarize, AggregateOptions,
    BackendSpec, ExperimentConfig, Metric, PlotData, ReportColumn, ReportFormat, ReportTable, RoundPolicy, RunOptions,
};
use meshbench::protocol::AgentIdentity;
use meshbench::tasks::{TaskKind, TaskSpec};
use meshbench::topology::GraphFamily;

fn scripted(dir: &Path, name: &str) -> ExperimentConfig {
    ExperimentConfig::new(name, dir.join(name), BackendSpec::Scripted {})
}

fn records_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    std::fs::read(experiment_layout(&cfg.output_dir).records).unwrap()
}

#[test]
fn full_suite_yields_one_record_per_task_and_topology() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scripted(dir.path(), "full");
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 135);
    let keys: BTreeSet<_> = records.iter().map(|r| r.key()).collect();
    assert_eq!(keys.len(), 135);
    let layout = experiment_layout(&cfg.output_dir);
    assert_eq!(read_records(&layout.records).unwrap(), records);
    for r in &records {
        assert!(layout.transcript_file(&r.run_id).exists(), "{}", r.run_id);
        assert!(layout.topology_file(&r.topology_ref).exists());
        assert_eq!(r.model, "scripted");
        assert_eq!(r.agents.len(), r.size);
        assert!(r.wall_time_ms.is_none());
    }
    assert_eq!(ExperimentConfig::load(&layout.config).unwrap(), cfg);
}

#[test]
fn interrupted_then_resumed_run_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let whole = scripted(dir.path(), "whole");
    run_experiment_with(&whole, &ScriptedFactory, RunOptions::default()).unwrap();

    let mut parts = whole.clone();
    parts.output_dir = dir.path().join("parts");
    let first = run_experiment_with(
        &parts,
        &ScriptedFactory,
        RunOptions {
            resume: false,
            limit: Some(40),
        },
    )
    .unwrap();
    assert_eq!(first.len(), 40);
    let all = run_experiment_with(
        &parts,
        &ScriptedFactory,
        RunOptions {
            resume: true,
            limit: None,
        },
    )
    .unwrap();
    assert_eq!(all.len(), 135);
    assert_eq!(records_bytes(&parts), records_bytes(&whole));

    // Resuming a complete experiment adds nothing.
    let again = run_experiment_with(
        &parts,
        &ScriptedFactory,
        RunOptions {
            resume: true,
            limit: None,
        },
    )
    .unwrap();
    assert_eq!(again.len(), 135);
    assert_eq!(records_bytes(&parts), records_bytes(&whole));
}

#[test]
fn existing_directory_requires_resume_and_identical_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = scripted(dir.path(), "guarded");
    cfg.tasks = vec![TaskKind::Consensus];
    cfg.suite.sizes = Some(vec![4]);
    run_experiment(&cfg).unwrap();
    assert!(run_experiment(&cfg).is_err());

    let mut changed = cfg.clone();
    changed.seed = 9;
    let err = run_experiment_with(
        &changed,
        &ScriptedFactory,
        RunOptions {
            resume: true,
            limit: None,
        },
    )
    .unwrap_err();
    assert!(err.to_string().contains("differs"), "{err}");
}

#[test]
fn repeats_multiply_runs_with_distinct_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new("rand", dir.path().join("rand"), BackendSpec::Random {});
    cfg.repeats = 3;
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 405);
    assert_eq!(records.iter().filter(|r| r.repeat == 2).count(), 135);
    let seeds: BTreeSet<u64> = records.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 405);

    let one = records
        .iter()
        .filter(|r| r.task == TaskKind::Coloring && r.topology_ref == records[0].topology_ref)
        .count();
    assert_eq!(one, 3);
    let reports = summarize(&records, Metric::Solved, &AggregateOptions::default()).unwrap();
    assert_eq!(reports[0].repeats, 3);
    assert_eq!(reports[0].runs, 405);
}

/// Agents that fail every request on graphs with eight nodes.
struct FailsOnEight;

struct Failing;

impl AgentBackend for Failing {
    fn generate(&self, _history: &[ChatMessage]) -> Result<Generation, BackendError> {
        Err(BackendError::Transport {
            attempts: 3,
            message: "connection reset".into(),
        })
    }
}

impl BackendFactory for FailsOnEight {
    fn label(&self) -> String {
        "flaky".into()
    }

    fn make(&self, task: &TaskSpec, agent: &AgentIdentity, seed: u64) -> Result<Arc<dyn AgentBackend>, BackendError> {
        if agent.node_index == 7 {
            Ok(Arc::new(Failing))
        } else {
            ScriptedFactory.make(task, agent, seed)
        }
    }
}

#[test]
fn backend_failures_are_recorded_and_excluded_from_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new("flaky", dir.path().join("flaky"), BackendSpec::Scripted {});
    cfg.tasks = vec![TaskKind::LeaderElection];
    cfg.suite.sizes = Some(vec![4, 8]);
    let records = run_experiment_with(&cfg, &FailsOnEight, RunOptions::default()).unwrap();
    assert_eq!(records.len(), 18);
    for r in &records {
        assert_eq!(r.failed, r.size == 8, "{}", r.run_id);
        if r.failed {
            assert!(r.failure.as_deref().unwrap().contains("connection reset"));
            let transcript = experiment_layout(&cfg.output_dir).transcript_file(&r.run_id);
            assert!(transcript.exists());
        }
    }
    let cells = meshbench::harness::cell_stats(&records, Metric::Solved);
    let eight: Vec<_> = cells.iter().filter(|c| c.key.size == 8).collect();
    assert!(eight.iter().all(|c| c.n == 0 && c.failures == 3));
    assert!(summarize(&records, Metric::Solved, &AggregateOptions::default()).is_err());
    let partial = summarize(
        &records,
        Metric::Solved,
        &AggregateOptions {
            allow_partial: true,
            ..Default::default()
        },
    )
    .unwrap();
    let r = &partial[0];
    assert!(r.partial);
    assert_eq!(r.missing_cells, 3);
    assert_eq!(r.runs, 9);
    assert_eq!(r.failures, 9);
    assert_eq!(r.overall.unwrap().mean, 1.0);

    // Failed runs are skipped by re-evaluation.
    assert_eq!(reevaluate(&cfg.output_dir).unwrap().len(), 9);
}

#[test]
fn reevaluation_reproduces_recorded_scores() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new("rand", dir.path().join("rand"), BackendSpec::Random {});
    cfg.suite.sizes = Some(vec![4, 8]);
    let records = run_experiment(&cfg).unwrap();
    let checks = reevaluate(&cfg.output_dir).unwrap();
    assert_eq!(checks.len(), records.len());
    assert!(checks.iter().all(|c| c.matches()));
}

#[test]
fn soft_metric_has_no_cross_task_aggregate() {
    let recs = vec![
        common::record("m", TaskKind::Coloring, 4, GraphFamily::Delaunay, 0, 0, false, 0.75),
        common::record("m", TaskKind::Coloring, 4, GraphFamily::Delaunay, 1, 0, true, 1.0),
        common::record("m", TaskKind::Consensus, 4, GraphFamily::Delaunay, 0, 0, true, 1.0),
    ];
    let soft = summarize(&recs, Metric::Soft, &AggregateOptions::default()).unwrap();
    assert!(soft[0].overall.is_none());
    assert_eq!(soft[0].per_task[&TaskKind::Coloring].mean, 0.875);
    let table = ReportTable::from_reports(&soft);
    assert!(!table.columns.contains(&ReportColumn::Aggregate));

    let solved = summarize(&recs, Metric::Solved, &AggregateOptions::default()).unwrap();
    assert_eq!(solved[0].overall.unwrap().mean, 0.75);
    let single = summarize(&recs[..2], Metric::Soft, &AggregateOptions::default()).unwrap();
    assert_eq!(single[0].overall.unwrap().mean, 0.875);
}

fn two_model_reports() -> Vec<meshbench::harness::AggregateReport> {
    let mut recs = Vec::new();
    for (model, p, cost) in [("cheap", 1usize, 0.01), ("strong", 2, 0.05), ("wasteful", 1, 0.09)] {
        for task in [TaskKind::Coloring, TaskKind::Consensus] {
            for i in 0..3 {
                let mut r = common::record(model, task, 4, GraphFamily::ScaleFree, i, 0, i < p, 0.5);
                r.stats.usage.cost_usd = cost;
                recs.push(r);
            }
        }
    }
    summarize(&recs, Metric::Solved, &AggregateOptions::default()).unwrap()
}

#[test]
fn report_formats_round_trip() {
    let reports = two_model_reports();
    let table = ReportTable::from_reports(&reports);
    assert_eq!(table.rows.len(), 3);
    let csv = table.render(ReportFormat::Csv);
    let back = ReportTable::parse_csv(&csv).unwrap();
    assert_eq!(back.columns, table.columns);
    for (a, b) in back.rows.iter().zip(&table.rows) {
        assert_eq!(a.model, b.model);
        for (x, y) in a.values.iter().zip(&b.values) {
            let ((m1, s1), (m2, s2)) = (x.unwrap(), y.unwrap());
            assert!((m1 - m2).abs() < 1e-9 && (s1 - s2).abs() < 1e-9);
        }
    }
    let md = table.render(ReportFormat::Markdown);
    let parsed = ReportTable::parse_markdown(&md).unwrap();
    assert_eq!(parsed.render(ReportFormat::Markdown), md);
    assert!(table.render(ReportFormat::Text).contains("strong"));
}

#[test]
fn plot_data_matches_report_and_marks_pareto_front() {
    let dir = tempfile::tempdir().unwrap();
    let reports = two_model_reports();
    let out = emit_plots(&reports, dir.path()).unwrap();
    assert!(out.warnings.is_empty());
    for f in ["plot_data.json", "score_vs_cost.svg", "size_breakdown.svg", "size_curves.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let data: PlotData = serde_json::from_str(&std::fs::read_to_string(dir.path().join("plot_data.json")).unwrap()).unwrap();
    assert_eq!(data, PlotData::from_reports(&reports));
    for (p, r) in data.score_vs_cost.iter().zip(&reports) {
        let e = r.overall.unwrap();
        assert_eq!(p.model, r.model);
        assert_eq!((p.mean, p.se), (e.mean, e.se));
        assert!((p.cost_per_repeat - r.cost_usd).abs() < 1e-12);
    }
    let pareto: Vec<(&str, bool)> = data.score_vs_cost.iter().map(|p| (p.model.as_str(), p.pareto)).collect();
    assert_eq!(pareto, vec![("cheap", true), ("strong", true), ("wasteful", false)]);
    let svg = std::fs::read_to_string(dir.path().join("score_vs_cost.svg")).unwrap();
    assert!(svg.contains("<svg"));
}

#[test]
fn plots_skip_cost_figure_without_cost_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = scripted(dir.path(), "free");
    cfg.suite.sizes = Some(vec![4]);
    let records = run_experiment(&cfg).unwrap();
    let reports = summarize(&records, Metric::Solved, &AggregateOptions::default()).unwrap();
    let out = emit_plots(&reports, &dir.path().join("plots")).unwrap();
    assert_eq!(out.warnings.len(), 1);
    assert!(!dir.path().join("plots/score_vs_cost.svg").exists());
    assert!(dir.path().join("plots/plot_data.json").exists());
}

#[test]
fn fixed_and_node_count_round_policies() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = scripted(dir.path(), "fixed");
    cfg.tasks = vec![TaskKind::Consensus];
    cfg.rounds = RoundPolicy::Fixed(2);
    assert!(run_experiment(&cfg).unwrap().iter().all(|r| r.rounds == 2));
    let mut cfg = scripted(dir.path(), "nodes");
    cfg.tasks = vec![TaskKind::Coloring];
    cfg.rounds = RoundPolicy::NodeCount;
    assert!(run_experiment(&cfg).unwrap().iter().all(|r| r.rounds == r.size));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["scripted.toml", "random.toml", "remote.toml"] {
        let cfg = ExperimentConfig::load(&root.join(name)).unwrap();
        assert_eq!(cfg.name, name.trim_end_matches(".toml"));
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    for bad in [
        "name = \"x\"\noutput_dir = \"o\"\nrepeats = 0\n[backend]\nkind = \"scripted\"\n",
        "name = \"x\"\noutput_dir = \"o\"\ntasks = []\n[backend]\nkind = \"scripted\"\n",
        "name = \"x\"\noutput_dir = \"o\"\nsurprise = 1\n[backend]\nkind = \"scripted\"\n",
        "name = \"x\"\noutput_dir = \"o\"\n[backend]\nkind = \"oracle\"\n",
    ] {
        assert!(ExperimentConfig::from_toml_str(bad).is_err(), "{bad}");
    }
}
