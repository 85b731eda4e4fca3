//! The five coordination tasks: prompt fragments, final-answer grammar,
//! evaluators and brute-force oracles.

mod answer;
mod evaluate;
mod oracle;
mod prompts;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use answer::{parse_answer_body, parse_final_answer, AnswerGrammar, FinalAnswer, FINAL_ANSWER_MARKER};
pub use evaluate::{
    evaluate, evaluate_coloring, evaluate_consensus, evaluate_leader_election, evaluate_matching,
    evaluate_vertex_cover, Evaluation,
};
pub use oracle::{oracle_check, OracleError, ORACLE_MAX_NODES};
pub use prompts::{final_request, task_prompts};

/// A task bound to one topology: the group count for coloring is fixed by
/// the graph's maximum degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Max degree + 1.
    pub groups: usize,
}

impl TaskSpec {
    pub fn for_topology(kind: TaskKind, t: &crate::topology::Topology) -> Self {
        TaskSpec {
            kind,
            groups: t.max_degree() + 1,
        }
    }

    pub fn prompts(&self) -> (String, String) {
        task_prompts(self.kind, self.groups)
    }

    pub fn final_request(&self, neighbors: &[String]) -> String {
        final_request(self.kind, self.groups, neighbors)
    }

    pub fn grammar(&self, names: &[String]) -> AnswerGrammar {
        AnswerGrammar {
            groups: self.groups,
            names: names.to_vec(),
        }
    }

    pub fn evaluate(&self, t: &crate::topology::Topology, answers: &AnswerSheet) -> Evaluation {
        evaluate(self.kind, t, answers)
    }
}

/// Answers keyed by agent name. Agents without an entry count as invalid.
pub type AnswerSheet = BTreeMap<String, FinalAnswer>;

#[derive(Debug, Error, PartialEq)]
#[error("unknown task `{0}`")]
pub struct UnknownTask(pub String);

/// Declaration order is the report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Coloring,
    Consensus,
    LeaderElection,
    Matching,
    VertexCover,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Coloring,
        TaskKind::Consensus,
        TaskKind::LeaderElection,
        TaskKind::Matching,
        TaskKind::VertexCover,
    ];

    /// Leader election and consensus need information from the whole network.
    pub fn is_global(self) -> bool {
        matches!(self, TaskKind::LeaderElection | TaskKind::Consensus)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Coloring => "coloring",
            TaskKind::Consensus => "consensus",
            TaskKind::LeaderElection => "leader_election",
            TaskKind::Matching => "matching",
            TaskKind::VertexCover => "vertex_cover",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            TaskKind::Coloring => "Coloring",
            TaskKind::Consensus => "Consensus",
            TaskKind::LeaderElection => "Leader Election",
            TaskKind::Matching => "Matching",
            TaskKind::VertexCover => "Vertex Cover",
        }
    }

    pub fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "coloring" | "colouring" => Ok(TaskKind::Coloring),
            "consensus" => Ok(TaskKind::Consensus),
            "leaderelection" | "leader" => Ok(TaskKind::LeaderElection),
            "matching" => Ok(TaskKind::Matching),
            "vertexcover" | "cover" => Ok(TaskKind::VertexCover),
            _ => Err(UnknownTask(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for k in TaskKind::ALL {
            assert_eq!(k.as_str().parse::<TaskKind>().unwrap(), k);
            assert_eq!(k.title().parse::<TaskKind>().unwrap(), k);
        }
        assert!("sorting".parse::<TaskKind>().is_err());
    }

    #[test]
    fn classification() {
        let global: Vec<_> = TaskKind::ALL.into_iter().filter(|k| k.is_global()).collect();
        assert_eq!(global, vec![TaskKind::Consensus, TaskKind::LeaderElection]);
    }
}
