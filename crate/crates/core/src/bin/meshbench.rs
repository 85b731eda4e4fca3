use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use meshbench::harness::{
    answers_from_transcript, emit_plots, experiment_layout, read_records, reevaluate, run_experiment_with, summarize, write_records,
    AggregateOptions, ExperimentConfig, Metric, ReportFormat, ReportTable, RunOptions, RunRecord,
};
use meshbench::protocol::Transcript;
use meshbench::tasks::{oracle_check, parse_answer_body, AnswerSheet, TaskKind, TaskSpec};
use meshbench::topology::{gen_benchmark_suite, metrics, parse_topology, serialize_topology, SuiteSpec};

#[derive(Parser)]
#[command(name = "meshbench", version, about = "Multi-agent coordination benchmark on generated networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Benchmark,
    Scaling,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Solved,
    Soft,
}

#[derive(Subcommand)]
enum Command {
    /// Generate suite topologies into a directory.
    Gen {
        #[arg(long, value_enum, default_value = "benchmark")]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute the experiment described by a TOML configuration file.
    Run {
        config: PathBuf,
        /// Continue an interrupted experiment, skipping completed runs.
        #[arg(long)]
        resume: bool,
        /// Stop after this many new runs.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Recompute evaluations of an experiment from its transcripts.
    Eval {
        dir: PathBuf,
        /// Rewrite the records file with the recomputed scores.
        #[arg(long)]
        write: bool,
    },
    /// Print or write the results table.
    Report {
        /// Records files or experiment directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, value_enum, default_value = "solved")]
        metric: MetricArg,
        #[arg(long)]
        allow_partial: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write figures and their data.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        allow_partial: bool,
    },
    /// Check answers with the brute-force validators.
    Oracle {
        /// Topology file.
        #[arg(long, required_unless_present = "experiment")]
        topology: Option<PathBuf>,
        #[arg(long, required_unless_present = "experiment")]
        task: Option<TaskKind>,
        /// JSON object mapping node index to answer text.
        #[arg(long, required_unless_present = "experiment")]
        answers: Option<PathBuf>,
        /// Check every recorded run of an experiment directory instead.
        #[arg(long, conflicts_with_all = ["topology", "task", "answers"])]
        experiment: Option<PathBuf>,
    },
}

type Fallible<T> = Result<T, Box<dyn std::error::Error>>;

fn load_inputs(inputs: &[PathBuf]) -> Fallible<Vec<RunRecord>> {
    let mut all = Vec::new();
    for p in inputs {
        let file = if p.is_dir() { experiment_layout(p).records } else { p.clone() };
        if !file.exists() {
            return Err(format!("{} does not exist", file.display()).into());
        }
        all.extend(read_records(&file)?);
    }
    Ok(all)
}

fn metric(m: MetricArg) -> Metric {
    match m {
        MetricArg::Solved => Metric::Solved,
        MetricArg::Soft => Metric::Soft,
    }
}

fn gen(preset: Preset, seed: u64, out: &Path) -> Fallible<ExitCode> {
    let spec = match preset {
        Preset::Benchmark => SuiteSpec::benchmark(seed),
        Preset::Scaling => SuiteSpec::scaling(seed),
    };
    std::fs::create_dir_all(out)?;
    println!("{:<24} {:>5} {:>5} {:>8} {:>10}", "topology", "nodes", "edges", "diameter", "max_degree");
    for m in gen_benchmark_suite(&spec)? {
        let g = metrics(&m.topology)?;
        std::fs::write(out.join(format!("{}.txt", m.reference())), serialize_topology(&m.topology))?;
        println!(
            "{:<24} {:>5} {:>5} {:>8} {:>10}",
            m.reference(),
            m.topology.node_count(),
            m.topology.edge_count(),
            g.diameter,
            g.max_degree
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run(config: &Path, resume: bool, limit: Option<usize>) -> Fallible<ExitCode> {
    let cfg = ExperimentConfig::load(config)?;
    let factory = cfg.backend.factory()?;
    let records = run_experiment_with(&cfg, factory.as_ref(), RunOptions { resume, limit })?;
    let failed = records.iter().filter(|r| r.failed).count();
    println!(
        "{} runs recorded in {} ({} failed)",
        records.len(),
        experiment_layout(&cfg.output_dir).records.display(),
        failed
    );
    let opts = AggregateOptions {
        allow_partial: true,
        ..Default::default()
    };
    let reports = summarize(&records, Metric::Solved, &opts)?;
    print!("{}", ReportTable::from_reports(&reports).to_text());
    Ok(ExitCode::SUCCESS)
}

fn eval(dir: &Path, write: bool) -> Fallible<ExitCode> {
    let checks = reevaluate(dir)?;
    let mismatches: Vec<_> = checks.iter().filter(|c| !c.matches()).collect();
    for c in &mismatches {
        println!(
            "{}: recorded solved={} soft={}, recomputed solved={} soft={}",
            c.record.run_id, c.record.solved, c.record.soft_score, c.solved, c.soft_score
        );
    }
    println!("{} runs re-evaluated, {} differ", checks.len(), mismatches.len());
    if write && !mismatches.is_empty() {
        let layout = experiment_layout(dir);
        let fixed: BTreeMap<String, (f64, u8)> = checks
            .iter()
            .map(|c| (c.record.run_id.clone(), (c.soft_score, c.solved)))
            .collect();
        let mut records = read_records(&layout.records)?;
        for r in &mut records {
            if let Some(&(soft, solved)) = fixed.get(&r.run_id) {
                r.soft_score = soft;
                r.solved = solved;
            }
        }
        write_records(&layout.records, &records)?;
        println!("rewrote {}", layout.records.display());
        return Ok(ExitCode::SUCCESS);
    }
    Ok(if mismatches.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn report(inputs: &[PathBuf], format: Format, m: MetricArg, allow_partial: bool, out: Option<&Path>) -> Fallible<ExitCode> {
    let records = load_inputs(inputs)?;
    let opts = AggregateOptions {
        allow_partial,
        ..Default::default()
    };
    let reports = summarize(&records, metric(m), &opts)?;
    let table = ReportTable::from_reports(&reports);
    let format = match format {
        Format::Text => ReportFormat::Text,
        Format::Csv => ReportFormat::Csv,
        Format::Markdown => ReportFormat::Markdown,
    };
    let text = table.render(format);
    match out {
        Some(p) => std::fs::write(p, &text)?,
        None => {
            if format == ReportFormat::Text {
                println!("{}", metric(m).caption());
            }
            print!("{text}");
        }
    }
    if table.rows.is_empty() {
        eprintln!("no records to report");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn plot(inputs: &[PathBuf], out: &Path, allow_partial: bool) -> Fallible<ExitCode> {
    let records = load_inputs(inputs)?;
    let opts = AggregateOptions {
        allow_partial,
        ..Default::default()
    };
    let reports = summarize(&records, Metric::Solved, &opts)?;
    let output = emit_plots(&reports, out)?;
    for f in &output.files {
        println!("{}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_answers(topology: &Path, task: TaskKind, answers: &Path) -> Fallible<ExitCode> {
    let t = parse_topology(&std::fs::read_to_string(topology)?)?;
    let raw: BTreeMap<String, String> = serde_json::from_str(&std::fs::read_to_string(answers)?)?;
    let names = t.names();
    let spec = TaskSpec::for_topology(task, &t);
    let grammar = spec.grammar(&names);
    let sheet: AnswerSheet = raw
        .iter()
        .map(|(k, v)| (k.clone(), parse_answer_body(task, v, &grammar)))
        .collect();
    let solved = oracle_check(task, &t, &sheet)?;
    let eval = spec.evaluate(&t, &sheet);
    println!("oracle solved: {solved}");
    println!("evaluator solved: {} (soft score {:.4})", eval.solved, eval.soft_score);
    Ok(if solved == eval.solved { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn oracle_experiment(dir: &Path) -> Fallible<ExitCode> {
    let layout = experiment_layout(dir);
    let mut checked = 0;
    let mut skipped = 0;
    let mut disagreements = 0;
    for c in reevaluate(dir)? {
        let r = &c.record;
        let t = parse_topology(&std::fs::read_to_string(layout.topology_file(&r.topology_ref))?)?.with_labels(&r.agents)?;
        let transcript = std::fs::read_to_string(layout.transcript_file(&r.run_id))?;
        let transcript = Transcript::from_jsonl(&transcript)?;
        let spec = TaskSpec::for_topology(r.task, &t);
        let sheet = answers_from_transcript(&transcript, &spec, &r.agents);
        match oracle_check(r.task, &t, &sheet) {
            Ok(solved) => {
                checked += 1;
                if u8::from(solved) != r.solved {
                    disagreements += 1;
                    println!("{}: recorded solved={}, oracle says {solved}", r.run_id, r.solved);
                }
            }
            Err(_) => skipped += 1,
        }
    }
    println!("{checked} runs checked, {skipped} too large for the oracle, {disagreements} disagreements");
    Ok(if disagreements == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { preset, seed, out } => gen(preset, seed, &out),
        Command::Run { config, resume, limit } => run(&config, resume, limit),
        Command::Eval { dir, write } => eval(&dir, write),
        Command::Report {
            inputs,
            format,
            metric,
            allow_partial,
            out,
        } => report(&inputs, format, metric, allow_partial, out.as_deref()),
        Command::Plot {
            inputs,
            out,
            allow_partial,
        } => plot(&inputs, &out, allow_partial),
        Command::Oracle {
            topology,
            task,
            answers,
            experiment,
        } => match (experiment, topology, task, answers) {
            (Some(dir), ..) => oracle_experiment(&dir),
            (None, Some(t), Some(k), Some(a)) => oracle_answers(&t, k, &a),
            _ => Err("either --experiment or --topology, --task and --answers are required".into()),
        },
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
