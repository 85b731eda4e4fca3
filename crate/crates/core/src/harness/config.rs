use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError};
use crate::agents::{BackendFactory, RandomFactory, RemoteFactory, RemoteModelConfig, ScriptedFactory};
use crate::protocol::{BudgetMode, EngineOptions};
use crate::tasks::TaskKind;
use crate::topology::{FamilyParams, GraphFamily, SuiteSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuitePreset {
    /// Sizes 4, 8, 16.
    #[default]
    Benchmark,
    /// Sizes 20, 30, ..., 100.
    Scaling,
}

/// Topology suite: a preset whose fields can be overridden individually.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub preset: SuitePreset,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<GraphFamily>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<usize>,
    pub params: FamilyParams,
}

impl SuiteConfig {
    pub fn spec(&self) -> SuiteSpec {
        let mut spec = match self.preset {
            SuitePreset::Benchmark => SuiteSpec::benchmark(self.seed),
            SuitePreset::Scaling => SuiteSpec::scaling(self.seed),
        };
        if let Some(s) = &self.sizes {
            spec.sizes = s.clone();
        }
        if let Some(f) = &self.families {
            spec.families = f.clone();
        }
        if let Some(p) = self.per_cell {
            spec.per_cell = p;
        }
        spec.params = self.params.clone();
        spec
    }
}

/// How many message-passing rounds each run gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundPolicy {
    /// Fixed size table for local tasks, `2D + 1` for global tasks.
    #[default]
    Benchmark,
    /// `2D + 1` for every task.
    Scaling,
    /// One round per agent.
    NodeCount,
    /// The same number of rounds everywhere.
    Fixed(usize),
}

impl RoundPolicy {
    pub fn budget_mode(self) -> Option<BudgetMode> {
        match self {
            RoundPolicy::Benchmark => Some(BudgetMode::Benchmark),
            RoundPolicy::Scaling => Some(BudgetMode::Scaling),
            RoundPolicy::NodeCount | RoundPolicy::Fixed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    Scripted {},
    Random {},
    Remote(RemoteModelConfig),
}

impl BackendSpec {
    /// Builds the factory; remote backends check their credential here.
    pub fn factory(&self) -> Result<Box<dyn BackendFactory>, HarnessError> {
        Ok(match self {
            BackendSpec::Scripted {} => Box::new(ScriptedFactory),
            BackendSpec::Random {} => Box::new(RandomFactory),
            BackendSpec::Remote(cfg) => Box::new(RemoteFactory::new(cfg.clone())?),
        })
    }
}

fn default_tasks() -> Vec<TaskKind> {
    TaskKind::ALL.to_vec()
}
fn default_repeats() -> usize {
    1
}
fn default_concurrency() -> usize {
    4
}

/// A complete, serializable experiment description. Together with the seeds
/// it contains, it determines scripted and random runs exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub output_dir: PathBuf,
    /// Base seed for names and agent randomness; topologies use the suite
    /// seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<TaskKind>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub rounds: RoundPolicy,
    /// Runs executed concurrently.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Store per-run wall time in the records (makes records files differ
    /// between otherwise identical executions).
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub suite: SuiteConfig,
    #[serde(default)]
    pub engine: EngineOptions,
    pub backend: BackendSpec,
}

impl ExperimentConfig {
    /// Scripted agents on the default suite.
    pub fn new(name: impl Into<String>, output_dir: impl Into<PathBuf>, backend: BackendSpec) -> Self {
        ExperimentConfig {
            name: name.into(),
            output_dir: output_dir.into(),
            seed: 0,
            tasks: default_tasks(),
            repeats: 1,
            rounds: RoundPolicy::Benchmark,
            concurrency: default_concurrency(),
            record_wall_time: false,
            suite: SuiteConfig::default(),
            engine: EngineOptions::default(),
            backend,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.name.trim().is_empty() {
            return bad("name must not be empty");
        }
        if self.tasks.is_empty() {
            return bad("at least one task is required");
        }
        let mut tasks = self.tasks.clone();
        tasks.sort();
        tasks.dedup();
        if tasks.len() != self.tasks.len() {
            return bad("tasks are listed more than once");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1");
        }
        if self.rounds == RoundPolicy::Fixed(0) {
            return bad("fixed round count must be at least 1");
        }
        let spec = self.suite.spec();
        if spec.sizes.is_empty() || spec.families.is_empty() || spec.per_cell == 0 {
            return bad("suite must have sizes, families and per_cell >= 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
output_dir = "runs/demo"
seed = 3
tasks = ["consensus", "coloring"]
rounds = { fixed = 5 }

[suite]
preset = "scaling"
sizes = [20, 30]

[backend]
kind = "remote"
model = "some-model"
base_url = "http://localhost:8000/v1"
api_key_env = "MY_KEY"
temperature = 0.2
"#;

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.rounds, RoundPolicy::Fixed(5));
        assert_eq!(cfg.suite.spec().sizes, vec![20, 30]);
        assert_eq!(cfg.repeats, 1);
        match &cfg.backend {
            BackendSpec::Remote(r) => {
                assert_eq!(r.temperature, Some(0.2));
                assert_eq!(r.max_attempts, 5);
            }
            other => panic!("unexpected backend {other:?}"),
        }
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
        let plain = ExperimentConfig::new("x", "out", BackendSpec::Scripted {});
        assert_eq!(ExperimentConfig::from_toml_str(&plain.to_toml_string()).unwrap(), plain);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml_str("name = \"x\"\noutput_dir = \"o\"\n[backend]\nkind = \"scripted\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml_str("name = \"x\"\noutput_dir = \"o\"\nrepeats = 0\n[backend]\nkind = \"random\"\n").is_err());
        assert!(ExperimentConfig::from_toml_str("name = \"x\"\noutput_dir = \"o\"\nsurprise = 1\n[backend]\nkind = \"random\"\n").is_err());
    }

    #[test]
    fn named_round_policies() {
        let cfg = ExperimentConfig::from_toml_str("name = \"x\"\noutput_dir = \"o\"\nrounds = \"node_count\"\n[backend]\nkind = \"scripted\"\n").unwrap();
        assert_eq!(cfg.rounds, RoundPolicy::NodeCount);
    }
}
