use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use super::HarnessError;
use crate::tasks::TaskKind;
use crate::topology::GraphFamily;

/// Per-run score fed into the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Binary solved flag (the headline score).
    #[default]
    Solved,
    /// Task-specific soft score; never averaged across tasks.
    Soft,
}

impl Metric {
    fn score(self, r: &RunRecord) -> f64 {
        match self {
            Metric::Solved => f64::from(r.solved),
            Metric::Soft => r.soft_score,
        }
    }
}

/// A configuration triplet: graph size, task, graph family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub size: usize,
    pub task: TaskKind,
    pub family: GraphFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStat {
    pub model: String,
    pub key: CellKey,
    pub mean: f64,
    /// Sample standard deviation over the cell's runs divided by `sqrt(n)`;
    /// 0 when `se_defined` is false.
    pub se: f64,
    /// Runs that entered the statistics (failed runs excluded).
    pub n: usize,
    /// False for cells with fewer than two runs.
    pub se_defined: bool,
    pub failures: usize,
    /// Distinct repeat indices among the cell's runs.
    pub repeats: usize,
    pub cost_usd: f64,
}

/// Mean and standard error over cell means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub cells: usize,
}

/// Mean of the cell means and the propagated error `sqrt(sum SE^2 / |C|^2)`.
pub fn propagate<'a>(cells: impl IntoIterator<Item = &'a CellStat>) -> Estimate {
    let (mut sum, mut sq, mut count) = (0.0, 0.0, 0usize);
    for c in cells {
        sum += c.mean;
        sq += c.se * c.se;
        count += 1;
    }
    if count == 0 {
        return Estimate {
            mean: 0.0,
            se: 0.0,
            cells: 0,
        };
    }
    let k = count as f64;
    Estimate {
        mean: sum / k,
        se: (sq / (k * k)).sqrt(),
        cells: count,
    }
}

/// Groups records by model and cell and computes mean and standard error.
/// Cells whose runs all failed are reported with `n = 0`.
pub fn cell_stats(records: &[RunRecord], metric: Metric) -> Vec<CellStat> {
    let mut groups: BTreeMap<(String, CellKey), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = CellKey {
            size: r.size,
            task: r.task,
            family: r.family,
        };
        groups.entry((r.model.clone(), key)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((model, key), runs)| {
            let ok: Vec<&RunRecord> = runs.iter().copied().filter(|r| !r.failed).collect();
            let scores: Vec<f64> = ok.iter().map(|r| metric.score(r)).collect();
            let n = scores.len();
            let mean = if n == 0 { 0.0 } else { scores.iter().sum::<f64>() / n as f64 };
            let se = if n < 2 {
                0.0
            } else {
                let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                var.sqrt() / (n as f64).sqrt()
            };
            CellStat {
                model,
                key,
                mean,
                se,
                n,
                se_defined: n >= 2,
                failures: runs.len() - n,
                repeats: ok.iter().map(|r| r.repeat).collect::<BTreeSet<_>>().len(),
                cost_usd: runs.iter().map(|r| r.cost_usd()).sum(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggregateOptions {
    /// Cells every model must cover. `None` uses every combination of the
    /// sizes, tasks and families present in the input.
    pub expected: Option<BTreeSet<CellKey>>,
    /// Aggregate over the present cells instead of refusing when cells are
    /// missing.
    pub allow_partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeTaskEstimate {
    pub size: usize,
    pub task: TaskKind,
    pub estimate: Estimate,
}

/// Aggregate scores of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub model: String,
    pub metric: Metric,
    /// Over all cells; `None` for the soft metric spanning several tasks,
    /// since soft scores are not comparable across tasks.
    pub overall: Option<Estimate>,
    pub per_task: BTreeMap<TaskKind, Estimate>,
    pub per_size: BTreeMap<usize, Estimate>,
    pub per_size_task: Vec<SizeTaskEstimate>,
    pub runs: usize,
    pub failures: usize,
    pub repeats: usize,
    pub cost_usd: f64,
    /// Cells of the expected set without a successful run.
    pub missing_cells: usize,
    pub partial: bool,
}

impl AggregateReport {
    /// Total cost divided by the number of repeats.
    pub fn cost_per_repeat(&self) -> f64 {
        self.cost_usd / self.repeats.max(1) as f64
    }
}

/// Aggregates cell statistics per model: the mean of cell means with
/// propagated standard error, overall and broken down by task and by size.
pub fn aggregate(cells: &[CellStat], opts: &AggregateOptions) -> Result<Vec<AggregateReport>, HarnessError> {
    let expected = opts.expected.clone().unwrap_or_else(|| {
        let sizes: BTreeSet<usize> = cells.iter().map(|c| c.key.size).collect();
        let tasks: BTreeSet<TaskKind> = cells.iter().map(|c| c.key.task).collect();
        let families: BTreeSet<GraphFamily> = cells.iter().map(|c| c.key.family).collect();
        let mut all = BTreeSet::new();
        for &size in &sizes {
            for &task in &tasks {
                for &family in &families {
                    all.insert(CellKey { size, task, family });
                }
            }
        }
        all
    });
    let mut by_model: BTreeMap<&str, Vec<&CellStat>> = BTreeMap::new();
    for c in cells {
        by_model.entry(c.model.as_str()).or_default().push(c);
    }
    let mut out = Vec::new();
    for (model, model_cells) in by_model {
        let present: Vec<&CellStat> = model_cells
            .iter()
            .copied()
            .filter(|c| c.n > 0 && expected.contains(&c.key))
            .collect();
        let present_keys: BTreeSet<CellKey> = present.iter().map(|c| c.key).collect();
        let missing = expected.difference(&present_keys).count();
        if missing > 0 && !opts.allow_partial {
            return Err(HarnessError::Stats(format!(
                "{model}: {missing} of {} cells have no successful run",
                expected.len()
            )));
        }
        let metric = Metric::Solved;
        let mut per_task = BTreeMap::new();
        let mut per_size = BTreeMap::new();
        let mut per_size_task = Vec::new();
        let tasks: BTreeSet<TaskKind> = present.iter().map(|c| c.key.task).collect();
        let sizes: BTreeSet<usize> = present.iter().map(|c| c.key.size).collect();
        for &task in &tasks {
            per_task.insert(task, propagate(present.iter().copied().filter(|c| c.key.task == task)));
        }
        for &size in &sizes {
            per_size.insert(size, propagate(present.iter().copied().filter(|c| c.key.size == size)));
            for &task in &tasks {
                let est = propagate(
                    present
                        .iter()
                        .copied()
                        .filter(|c| c.key.size == size && c.key.task == task),
                );
                if est.cells > 0 {
                    per_size_task.push(SizeTaskEstimate { size, task, estimate: est });
                }
            }
        }
        out.push(AggregateReport {
            model: model.to_string(),
            metric,
            overall: (!present.is_empty()).then(|| propagate(present.iter().copied())),
            per_task,
            per_size,
            per_size_task,
            runs: model_cells.iter().map(|c| c.n).sum(),
            failures: model_cells.iter().map(|c| c.failures).sum(),
            repeats: model_cells.iter().map(|c| c.repeats).max().unwrap_or(0),
            cost_usd: model_cells.iter().map(|c| c.cost_usd).sum(),
            missing_cells: missing,
            partial: missing > 0,
        });
    }
    Ok(out)
}

/// Cell statistics and aggregates for `metric`. Soft-score aggregates carry
/// no cross-task overall value.
pub fn summarize(
    records: &[RunRecord],
    metric: Metric,
    opts: &AggregateOptions,
) -> Result<Vec<AggregateReport>, HarnessError> {
    let cells = cell_stats(records, metric);
    let mut reports = aggregate(&cells, opts)?;
    for r in &mut reports {
        r.metric = metric;
        if metric == Metric::Soft && r.per_task.len() > 1 {
            r.overall = None;
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::super::record::fixture;
    use super::*;

    fn cell(mean: f64, se: f64) -> CellStat {
        CellStat {
            model: "m".into(),
            key: CellKey {
                size: 4,
                task: TaskKind::Consensus,
                family: GraphFamily::Delaunay,
            },
            mean,
            se,
            n: 3,
            se_defined: true,
            failures: 0,
            repeats: 1,
            cost_usd: 0.0,
        }
    }

    #[test]
    fn two_of_three() {
        let recs: Vec<RunRecord> = [true, false, true]
            .iter()
            .enumerate()
            .map(|(i, &s)| fixture(TaskKind::Consensus, GraphFamily::Delaunay, 4, i, 0, s))
            .collect();
        let cells = cell_stats(&recs, Metric::Solved);
        assert_eq!(cells.len(), 1);
        assert!((cells[0].mean - 2.0 / 3.0).abs() < 1e-15);
        assert!((cells[0].se - (1.0f64 / 3.0).sqrt() / 3.0f64.sqrt() * 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagation() {
        let cells = [cell(1.0, 0.0), cell(0.5, 0.0), cell(0.0, 0.0)];
        let e = propagate(cells.iter());
        assert_eq!(e.mean, 0.5);
        assert_eq!(e.se, 0.0);
        let many: Vec<CellStat> = (0..45).map(|_| cell(0.5, 0.1)).collect();
        let e = propagate(many.iter());
        assert!((e.se - (45.0f64 * 0.01 / (45.0 * 45.0)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_run_flagged_and_failures_excluded() {
        let mut recs = vec![
            fixture(TaskKind::Matching, GraphFamily::ScaleFree, 8, 0, 0, true),
            fixture(TaskKind::Matching, GraphFamily::ScaleFree, 8, 1, 0, false),
        ];
        recs[1].failed = true;
        let cells = cell_stats(&recs, Metric::Solved);
        assert_eq!(cells[0].n, 1);
        assert!(!cells[0].se_defined);
        assert_eq!(cells[0].failures, 1);
        assert_eq!(cells[0].mean, 1.0);
    }

    #[test]
    fn missing_cells_refused_unless_partial() {
        let recs = vec![
            fixture(TaskKind::Matching, GraphFamily::ScaleFree, 8, 0, 0, true),
            fixture(TaskKind::Consensus, GraphFamily::Delaunay, 4, 0, 0, true),
        ];
        let cells = cell_stats(&recs, Metric::Solved);
        assert!(aggregate(&cells, &AggregateOptions::default()).is_err());
        let r = aggregate(
            &cells,
            &AggregateOptions {
                allow_partial: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r[0].partial);
        assert_eq!(r[0].missing_cells, 6);
        assert_eq!(r[0].overall.unwrap().cells, 2);
    }
}
