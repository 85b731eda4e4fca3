use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError};
use crate::protocol::RunStats;
use crate::tasks::TaskKind;
use crate::topology::GraphFamily;

/// Version of the records-file line format.
pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// Identifies a record within an experiment: (size, task, family, instance,
/// repeat).
pub type RecordKey = (usize, TaskKind, GraphFamily, usize, usize);

/// Outcome of one run, one line of a records file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub schema_version: u32,
    pub run_id: String,
    /// Backend label (model name, `scripted`, `random`).
    pub model: String,
    pub task: TaskKind,
    pub topology_ref: String,
    pub size: usize,
    pub family: GraphFamily,
    pub instance: usize,
    pub repeat: usize,
    pub rounds: usize,
    pub seed: u64,
    pub soft_score: f64,
    pub solved: u8,
    /// Agent names by node index.
    pub agents: Vec<String>,
    pub stats: RunStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    /// Failed runs are excluded from statistics.
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn key(&self) -> RecordKey {
        (self.size, self.task, self.family, self.instance, self.repeat)
    }

    pub fn cost_usd(&self) -> f64 {
        self.stats.usage.cost_usd
    }

    pub fn to_json_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("record serializes");
        line.push('\n');
        line
    }

    fn check(&self) -> Result<(), String> {
        if self.schema_version != RECORD_SCHEMA_VERSION {
            return Err(format!(
                "schema version {} (expected {RECORD_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.solved > 1 {
            return Err(format!("solved flag {} is not 0/1", self.solved));
        }
        if !(0.0..=1.0).contains(&self.soft_score) {
            return Err(format!("soft score {} outside [0, 1]", self.soft_score));
        }
        Ok(())
    }
}

/// Reads a records file; blank lines are ignored. A missing file yields no
/// records.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| HarnessError::Record {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let r: RunRecord = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        r.check().map_err(fail)?;
        out.push(r);
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<(), HarnessError> {
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    for r in records {
        f.write_all(r.to_json_line().as_bytes()).map_err(io_err(path))?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn fixture(task: TaskKind, family: GraphFamily, size: usize, instance: usize, repeat: usize, solved: bool) -> RunRecord {
    RunRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        run_id: format!("m-{task}-{family}-n{size}-i{instance}-r{repeat}"),
        model: "m".into(),
        task,
        topology_ref: format!("{family}-n{size}-i{instance}"),
        size,
        family,
        instance,
        repeat,
        rounds: 3,
        seed: 0,
        soft_score: if solved { 1.0 } else { 0.0 },
        solved: u8::from(solved),
        agents: vec![],
        stats: RunStats::default(),
        wall_time_ms: None,
        failed: false,
        failure: None,
    }
}
