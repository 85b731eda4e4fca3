use serde::{Deserialize, Serialize};

use crate::tasks::TaskKind;
use crate::topology::{metrics, Topology, TopologyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// Local tasks use the fixed size table, global tasks `2D + 1`.
    #[default]
    Benchmark,
    /// `2D + 1` for every task.
    Scaling,
}

/// Round budget from the graph size and diameter.
pub fn round_budget(kind: TaskKind, node_count: usize, diameter: usize, mode: BudgetMode) -> usize {
    let diameter_rule = 2 * diameter + 1;
    if mode == BudgetMode::Scaling || kind.is_global() {
        return diameter_rule;
    }
    match node_count {
        4 => 4,
        8 => 5,
        16 => 6,
        other => {
            log::info!("no fixed round budget for {other} nodes; using 2D+1 = {diameter_rule}");
            diameter_rule
        }
    }
}

pub fn compute_round_budget(kind: TaskKind, t: &Topology, mode: BudgetMode) -> Result<usize, TopologyError> {
    let m = metrics(t)?;
    Ok(round_budget(kind, t.node_count(), m.diameter, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::GraphFamily;

    #[test]
    fn consensus_on_path() {
        let p4 = Topology::from_edges(4, [(0, 1), (1, 2), (2, 3)], GraphFamily::SmallWorld, 0).unwrap();
        assert_eq!(compute_round_budget(TaskKind::Consensus, &p4, BudgetMode::Benchmark), Ok(7));
        assert_eq!(compute_round_budget(TaskKind::Coloring, &p4, BudgetMode::Benchmark), Ok(4));
        assert_eq!(compute_round_budget(TaskKind::Coloring, &p4, BudgetMode::Scaling), Ok(7));
    }

    #[test]
    fn size_table() {
        assert_eq!(round_budget(TaskKind::Coloring, 8, 3, BudgetMode::Benchmark), 5);
        assert_eq!(round_budget(TaskKind::VertexCover, 16, 3, BudgetMode::Benchmark), 6);
        assert_eq!(round_budget(TaskKind::Matching, 20, 4, BudgetMode::Scaling), 9);
        // Unknown size falls back to the diameter rule.
        assert_eq!(round_budget(TaskKind::Matching, 20, 4, BudgetMode::Benchmark), 9);
    }
}
