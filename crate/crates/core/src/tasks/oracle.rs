//! Brute-force ground truth for the solved predicates.
//!
//! These checks restate each task from its textbook definition (proper
//! coloring, minimal vertex cover by trial removal, maximal matching by
//! searching for an addable edge) and share no code with the evaluators.

use thiserror::Error;

use super::{AnswerSheet, FinalAnswer, TaskKind};
use crate::topology::Topology;

pub const ORACLE_MAX_NODES: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle limited to {ORACLE_MAX_NODES} nodes, got {0}")]
    TooLarge(usize),
}

pub fn oracle_check(kind: TaskKind, t: &Topology, answers: &AnswerSheet) -> Result<bool, OracleError> {
    let n = t.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(OracleError::TooLarge(n));
    }
    let names: Vec<String> = t.names();
    let answer = |v: usize| answers.get(&names[v]);
    Ok(match kind {
        TaskKind::Coloring => {
            let k = t.degrees().into_iter().max().unwrap_or(0) + 1;
            let color = |v: usize| match answer(v) {
                Some(FinalAnswer::GroupChoice(g)) if *g >= 1 && *g <= k => Some(*g),
                _ => None,
            };
            (0..n).all(|v| color(v).is_some()) && t.edges().iter().all(|&(u, v)| color(u) != color(v))
        }
        TaskKind::VertexCover => {
            let members: Vec<usize> = (0..n)
                .filter(|&v| answer(v) == Some(&FinalAnswer::YesNo(true)))
                .collect();
            let covers = |set: &[usize]| {
                t.edges()
                    .iter()
                    .all(|(u, v)| set.contains(u) || set.contains(v))
            };
            covers(&members)
                && (0..members.len()).all(|i| {
                    let mut without = members.clone();
                    without.remove(i);
                    !covers(&without)
                })
        }
        TaskKind::Matching => {
            let mut partner: Vec<Option<usize>> = vec![None; n];
            for u in 0..n {
                match answer(u) {
                    Some(FinalAnswer::PartnerChoice(None)) => {}
                    Some(FinalAnswer::PartnerChoice(Some(name))) => {
                        let Some(v) = names.iter().position(|x| x == name) else {
                            return Ok(false);
                        };
                        partner[u] = Some(v);
                    }
                    _ => return Ok(false),
                }
            }
            // Valid matching: every choice is an edge and is reciprocated.
            for u in 0..n {
                if let Some(v) = partner[u] {
                    let adjacent = t.edges().contains(&(u.min(v), u.max(v)));
                    if !adjacent || partner[v] != Some(u) {
                        return Ok(false);
                    }
                }
            }
            // Maximal: no edge joins two unmatched agents.
            !t.edges()
                .iter()
                .any(|&(u, v)| partner[u].is_none() && partner[v].is_none())
        }
        TaskKind::LeaderElection => {
            (0..n)
                .filter(|&v| answer(v) == Some(&FinalAnswer::YesNo(true)))
                .count()
                == 1
        }
        TaskKind::Consensus => {
            let zeros = (0..n).filter(|&v| answer(v) == Some(&FinalAnswer::Bit(0))).count();
            let ones = (0..n).filter(|&v| answer(v) == Some(&FinalAnswer::Bit(1))).count();
            zeros == n || ones == n
        }
    })
}
