use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{AggregateReport, Metric};
use super::{io_err, HarnessError};
use crate::tasks::TaskKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    pub model: String,
    pub cost_per_repeat: f64,
    pub mean: f64,
    /// Half-width of the error bar.
    pub se: f64,
    pub pareto: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSegment {
    pub task: TaskKind,
    /// Share of the size's mean score contributed by this task's cells.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBar {
    pub model: String,
    pub size: usize,
    pub total: f64,
    pub segments: Vec<SizeSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub model: String,
    pub task: TaskKind,
    pub points: Vec<CurvePoint>,
}

/// Everything the figures show, also written as `plot_data.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub metric: Metric,
    pub score_vs_cost: Vec<CostPoint>,
    pub size_breakdown: Vec<SizeBar>,
    pub size_curves: Vec<Curve>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Points not dominated by another point with lower-or-equal cost and
/// higher-or-equal score (strictly better in at least one).
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(c, s)| {
            !points
                .iter()
                .any(|&(c2, s2)| c2 <= c && s2 >= s && (c2 < c || s2 > s))
        })
        .collect()
}

impl PlotData {
    pub fn from_reports(reports: &[AggregateReport]) -> Self {
        let with_score: Vec<&AggregateReport> = reports.iter().filter(|r| r.overall.is_some()).collect();
        let coords: Vec<(f64, f64)> = with_score
            .iter()
            .map(|r| (r.cost_per_repeat(), r.overall.map_or(0.0, |e| e.mean)))
            .collect();
        let front = pareto_front(&coords);
        let score_vs_cost = with_score
            .iter()
            .zip(front)
            .map(|(r, pareto)| {
                let e = r.overall.expect("filtered");
                CostPoint {
                    model: r.model.clone(),
                    cost_per_repeat: r.cost_per_repeat(),
                    mean: e.mean,
                    se: e.se,
                    pareto,
                }
            })
            .collect();
        let mut size_breakdown = Vec::new();
        let mut size_curves = Vec::new();
        for r in reports {
            for (&size, est) in &r.per_size {
                let at_size: Vec<_> = r.per_size_task.iter().filter(|s| s.size == size).collect();
                let cells: usize = at_size.iter().map(|s| s.estimate.cells).sum();
                size_breakdown.push(SizeBar {
                    model: r.model.clone(),
                    size,
                    total: est.mean,
                    segments: at_size
                        .iter()
                        .map(|s| SizeSegment {
                            task: s.task,
                            value: s.estimate.mean * s.estimate.cells as f64 / cells.max(1) as f64,
                        })
                        .collect(),
                });
            }
            for &task in r.per_task.keys() {
                size_curves.push(Curve {
                    model: r.model.clone(),
                    task,
                    points: r
                        .per_size_task
                        .iter()
                        .filter(|s| s.task == task)
                        .map(|s| CurvePoint {
                            size: s.size,
                            mean: s.estimate.mean,
                            se: s.estimate.se,
                        })
                        .collect(),
                });
            }
        }
        PlotData {
            metric: reports.first().map_or(Metric::Solved, |r| r.metric),
            score_vs_cost,
            size_breakdown,
            size_curves,
        }
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Plot(e.to_string())
}

fn task_color(task: TaskKind) -> RGBColor {
    let c = Palette99::pick(task.index() as usize).to_rgba();
    RGBColor(c.0, c.1, c.2)
}

fn star(x: i32, y: i32, r: i32) -> Vec<(i32, i32)> {
    (0..10)
        .map(|k| {
            let radius = if k % 2 == 0 { r as f64 } else { r as f64 * 0.45 };
            let a = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            (x + (radius * a.cos()).round() as i32, y + (radius * a.sin()).round() as i32)
        })
        .collect()
}

fn draw_cost(data: &PlotData, path: &Path) -> Result<(), HarnessError> {
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let max_cost = data
        .score_vs_cost
        .iter()
        .map(|p| p.cost_per_repeat)
        .fold(0.0, f64::max)
        * 1.15;
    let mut chart = ChartBuilder::on(&root)
        .caption("Score versus cost per repeat", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0.0..max_cost.max(1e-9), 0.0..1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("Cost per repeat (USD)")
        .y_desc("Score")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(data.score_vs_cost.iter().map(|p| {
            ErrorBar::new_vertical(p.cost_per_repeat, p.mean - p.se, p.mean, p.mean + p.se, BLACK.filled(), 8)
        }))
        .map_err(plot_err)?;
    for p in &data.score_vs_cost {
        let color = if p.pareto { RED } else { BLUE };
        let shape = EmptyElement::at((p.cost_per_repeat, p.mean))
            + Text::new(p.model.clone(), (8, -14), ("sans-serif", 13));
        chart.draw_series(std::iter::once(shape)).map_err(plot_err)?;
        if p.pareto {
            let at = chart.backend_coord(&(p.cost_per_repeat, p.mean));
            root.draw(&Polygon::new(star(at.0, at.1, 9), color.filled())).map_err(plot_err)?;
        } else {
            chart
                .draw_series(std::iter::once(Circle::new((p.cost_per_repeat, p.mean), 5, color.filled())))
                .map_err(plot_err)?;
        }
    }
    root.present().map_err(plot_err)
}

fn draw_breakdown(data: &PlotData, path: &Path) -> Result<(), HarnessError> {
    let bars = &data.size_breakdown;
    let root = SVGBackend::new(path, (120 + 60 * bars.len() as u32, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Score by network size and task", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(60)
        .y_label_area_size(50)
        .build_cartesian_2d(0.0..bars.len() as f64, 0.0..1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(bars.len().max(1))
        .x_label_formatter(&|x| {
            let i = x.floor() as usize;
            bars.get(i).map_or(String::new(), |b| format!("{} n={}", b.model, b.size))
        })
        .y_desc("Score")
        .draw()
        .map_err(plot_err)?;
    let mut legend_done = std::collections::BTreeSet::new();
    for (i, bar) in bars.iter().enumerate() {
        let mut base = 0.0;
        for seg in &bar.segments {
            let color = task_color(seg.task);
            let x0 = i as f64 + 0.15;
            let x1 = i as f64 + 0.85;
            let series = chart
                .draw_series(std::iter::once(Rectangle::new([(x0, base), (x1, base + seg.value)], color.filled())))
                .map_err(plot_err)?;
            if legend_done.insert(seg.task) {
                series
                    .label(seg.task.title())
                    .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 10, y + 5)], color.filled()));
            }
            base += seg.value;
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

fn draw_curves(data: &PlotData, path: &Path) -> Result<(), HarnessError> {
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let sizes: Vec<usize> = data.size_curves.iter().flat_map(|c| c.points.iter().map(|p| p.size)).collect();
    let lo = sizes.iter().copied().min().unwrap_or(0) as f64;
    let hi = sizes.iter().copied().max().unwrap_or(1) as f64;
    let pad = ((hi - lo) * 0.05).max(1.0);
    let mut chart = ChartBuilder::on(&root)
        .caption("Score versus network size", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d((lo - pad)..(hi + pad), 0.0..1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("Number of agents")
        .y_desc("Score")
        .draw()
        .map_err(plot_err)?;
    let multi_model = data
        .size_curves
        .iter()
        .map(|c| c.model.as_str())
        .collect::<std::collections::BTreeSet<_>>()
        .len()
        > 1;
    for curve in &data.size_curves {
        let color = task_color(curve.task);
        let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.size as f64, p.mean)).collect();
        let label = if multi_model {
            format!("{} ({})", curve.task.title(), curve.model)
        } else {
            curve.task.title().to_string()
        };
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
        chart
            .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(plot_err)?;
        chart
            .draw_series(curve.points.iter().map(|p| {
                let x = p.size as f64;
                ErrorBar::new_vertical(x, p.mean - p.se, p.mean, p.mean + p.se, color.filled(), 6)
            }))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::LowerLeft)
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

/// Writes `plot_data.json`, the score-versus-cost scatter (skipped when no
/// cost data exists), the per-size task breakdown and the score-versus-size
/// curves into `out_dir`.
pub fn emit_plots(reports: &[AggregateReport], out_dir: &Path) -> Result<PlotOutput, HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let data = PlotData::from_reports(reports);
    let mut out = PlotOutput::default();
    let json_path = out_dir.join("plot_data.json");
    let json = serde_json::to_string_pretty(&data).expect("plot data serializes");
    std::fs::write(&json_path, json).map_err(io_err(&json_path))?;
    out.files.push(json_path);

    if data.score_vs_cost.iter().any(|p| p.cost_per_repeat > 0.0) {
        let p = out_dir.join("score_vs_cost.svg");
        draw_cost(&data, &p)?;
        out.files.push(p);
    } else {
        let w = "no cost data in the records; skipping the score-versus-cost plot".to_string();
        log::warn!("{w}");
        out.warnings.push(w);
    }
    if !data.size_breakdown.is_empty() {
        let p = out_dir.join("size_breakdown.svg");
        draw_breakdown(&data, &p)?;
        out.files.push(p);
    }
    if !data.size_curves.is_empty() {
        let p = out_dir.join("size_curves.svg");
        draw_curves(&data, &p)?;
        out.files.push(p);
    }
    Ok(out)
}
