use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::stats::{AggregateReport, Metric};
use super::{io_err, HarnessError};
use crate::tasks::TaskKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" | "delimited" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportColumn {
    Task(TaskKind),
    Aggregate,
}

impl ReportColumn {
    pub fn title(self) -> &'static str {
        match self {
            ReportColumn::Task(t) => t.title(),
            ReportColumn::Aggregate => "Aggregate",
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            ReportColumn::Task(t) => t.as_str(),
            ReportColumn::Aggregate => "aggregate",
        }
    }

    fn from_title(s: &str) -> Option<Self> {
        if s == "Aggregate" {
            return Some(ReportColumn::Aggregate);
        }
        TaskKind::ALL.into_iter().find(|t| t.title() == s).map(ReportColumn::Task)
    }

    fn from_id(s: &str) -> Option<Self> {
        if s == "aggregate" {
            return Some(ReportColumn::Aggregate);
        }
        s.parse().ok().map(ReportColumn::Task)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    /// `(mean, standard error)` per column.
    pub values: Vec<Option<(f64, f64)>>,
}

/// One row per model, one column per task plus the aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub columns: Vec<ReportColumn>,
    pub rows: Vec<ReportRow>,
    /// Decimals in the text and markdown renderings.
    pub precision: usize,
}

fn fmt_cell(v: Option<(f64, f64)>, precision: usize) -> String {
    match v {
        Some((m, se)) => format!("{m:.precision$} ({se:.precision$})"),
        None => "-".to_string(),
    }
}

fn parse_cell(s: &str) -> Result<Option<(f64, f64)>, String> {
    let s = s.trim();
    if s == "-" || s.is_empty() {
        return Ok(None);
    }
    let (m, rest) = s.split_once('(').ok_or_else(|| format!("bad cell `{s}`"))?;
    let se = rest.trim_end_matches(')');
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number in `{s}`"));
    Ok(Some((num(m)?, num(se)?)))
}

impl ReportTable {
    /// Builds the table from aggregates (sorted by model). The aggregate
    /// column is present when any model has an overall value.
    pub fn from_reports(reports: &[AggregateReport]) -> Self {
        let mut columns: Vec<ReportColumn> = TaskKind::ALL
            .into_iter()
            .filter(|t| reports.iter().any(|r| r.per_task.contains_key(t)))
            .map(ReportColumn::Task)
            .collect();
        if reports.iter().any(|r| r.overall.is_some()) || reports.is_empty() {
            columns.push(ReportColumn::Aggregate);
        }
        let rows = reports
            .iter()
            .map(|r| ReportRow {
                model: r.model.clone(),
                values: columns
                    .iter()
                    .map(|c| match c {
                        ReportColumn::Task(t) => r.per_task.get(t).map(|e| (e.mean, e.se)),
                        ReportColumn::Aggregate => r.overall.map(|e| (e.mean, e.se)),
                    })
                    .collect(),
            })
            .collect();
        ReportTable {
            columns,
            rows,
            precision: 2,
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }

    fn grid(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = std::iter::once("Model".to_string())
            .chain(self.columns.iter().map(|c| c.title().to_string()))
            .collect();
        let body = self
            .rows
            .iter()
            .map(|r| {
                std::iter::once(r.model.clone())
                    .chain(r.values.iter().map(|v| fmt_cell(*v, self.precision)))
                    .collect()
            })
            .collect();
        (header, body)
    }

    pub fn to_text(&self) -> String {
        let (header, body) = self.grid();
        let mut widths: Vec<usize> = header.iter().map(String::len).collect();
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&header);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for row in &body {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let (header, body) = self.grid();
        let mut out = format!("| {} |\n", header.join(" | "));
        let _ = writeln!(
            out,
            "|{}",
            std::iter::once("---|".to_string())
                .chain(self.columns.iter().map(|_| "---:|".to_string()))
                .collect::<String>()
        );
        for row in &body {
            let _ = writeln!(out, "| {} |", row.join(" | "));
        }
        out
    }

    /// Delimited format with full-precision values: one `mean` and one
    /// `<column>_se` field per column, empty fields for missing values.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["model".to_string()];
        for c in &self.columns {
            header.push(c.id().to_string());
            header.push(format!("{}_se", c.id()));
        }
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.model.clone()];
            for v in &r.values {
                match v {
                    Some((m, se)) => {
                        rec.push(m.to_string());
                        rec.push(se.to_string());
                    }
                    None => {
                        rec.push(String::new());
                        rec.push(String::new());
                    }
                }
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn parse_csv(text: &str) -> Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| e.to_string())?.clone();
        if header.get(0) != Some("model") || header.len() % 2 != 1 {
            return Err("bad header".into());
        }
        let columns = (1..header.len())
            .step_by(2)
            .map(|i| ReportColumn::from_id(&header[i]).ok_or_else(|| format!("unknown column `{}`", &header[i])))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
            let mut values = Vec::new();
            for i in (1..rec.len()).step_by(2) {
                values.push(if rec[i].is_empty() {
                    None
                } else {
                    Some((num(&rec[i])?, num(&rec[i + 1])?))
                });
            }
            rows.push(ReportRow {
                model: rec[0].to_string(),
                values,
            });
        }
        Ok(ReportTable {
            columns,
            rows,
            precision: 2,
        })
    }

    pub fn parse_markdown(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| l.trim_start().starts_with('|'));
        let split = |l: &str| -> Vec<String> {
            l.trim()
                .trim_matches('|')
                .split('|')
                .map(|c| c.trim().to_string())
                .collect()
        };
        let header = split(lines.next().ok_or("empty table")?);
        let columns = header[1..]
            .iter()
            .map(|h| ReportColumn::from_title(h).ok_or_else(|| format!("unknown column `{h}`")))
            .collect::<Result<Vec<_>, _>>()?;
        lines.next().ok_or("missing separator row")?;
        let mut rows = Vec::new();
        let mut precision = 2;
        for l in lines {
            let cells = split(l);
            if cells.len() != columns.len() + 1 {
                return Err(format!("row `{l}` has {} cells", cells.len()));
            }
            if let Some(c) = cells[1..].iter().find(|c| c.as_str() != "-") {
                precision = c.split(['.', ' ']).nth(1).map_or(0, str::len);
            }
            rows.push(ReportRow {
                model: cells[0].clone(),
                values: cells[1..].iter().map(|c| parse_cell(c)).collect::<Result<_, _>>()?,
            });
        }
        Ok(ReportTable { columns, rows, precision })
    }
}

/// Writes the table in `format` to `path`.
pub fn emit_report(table: &ReportTable, format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, table.render(format)).map_err(io_err(path))
}

impl Metric {
    /// Title line describing a table of this metric.
    pub fn caption(self) -> &'static str {
        match self {
            Metric::Solved => "Fraction of solved instances (standard error)",
            Metric::Soft => "Mean soft score (standard error)",
        }
    }
}
