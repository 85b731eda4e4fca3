use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnswerSheet, FinalAnswer, TaskKind};
use crate::topology::Topology;

/// Score for one run. `solved` is computed from the task predicate directly,
/// never by comparing `soft_score` against 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub soft_score: f64,
    pub solved: bool,
    pub diagnostics: Vec<String>,
}

impl Evaluation {
    fn new(soft_score: f64, solved: bool, mut diagnostics: Vec<String>) -> Self {
        diagnostics.sort();
        Evaluation {
            soft_score,
            solved,
            diagnostics,
        }
    }
}

fn answers_by_node<'a>(t: &Topology, answers: &'a AnswerSheet) -> Vec<&'a FinalAnswer> {
    (0..t.node_count())
        .map(|v| answers.get(&t.name_of(v)).unwrap_or(&FinalAnswer::Invalid))
        .collect()
}

fn ratio(num: usize, den: usize) -> f64 {
    num as f64 / den as f64
}

pub fn evaluate(kind: TaskKind, t: &Topology, answers: &AnswerSheet) -> Evaluation {
    match kind {
        TaskKind::Coloring => evaluate_coloring(t, answers),
        TaskKind::VertexCover => evaluate_vertex_cover(t, answers),
        TaskKind::Matching => evaluate_matching(t, answers),
        TaskKind::LeaderElection => evaluate_leader_election(t, answers),
        TaskKind::Consensus => evaluate_consensus(t, answers),
    }
}

/// Fraction of edges whose endpoints chose different valid groups out of
/// `1..=max_degree + 1`. Invalid answers conflict with every neighbor.
pub fn evaluate_coloring(t: &Topology, answers: &AnswerSheet) -> Evaluation {
    let groups = t.max_degree() + 1;
    let by_node = answers_by_node(t, answers);
    let group = |v: usize| match by_node[v] {
        FinalAnswer::GroupChoice(g) if (1..=groups).contains(g) => Some(*g),
        _ => None,
    };
    let mut diagnostics = Vec::new();
    let mut all_valid = true;
    for v in 0..t.node_count() {
        if group(v).is_none() {
            all_valid = false;
            diagnostics.push(format!("{}: invalid group answer {}", t.name_of(v), by_node[v].canonical()));
        }
    }
    let mut proper = 0;
    for &(u, v) in t.edges() {
        match (group(u), group(v)) {
            (Some(a), Some(b)) if a != b => proper += 1,
            (Some(a), Some(_)) => diagnostics.push(format!(
                "edge {}-{}: both in group {a}",
                t.name_of(u),
                t.name_of(v)
            )),
            _ => {}
        }
    }
    let edges = t.edge_count();
    let soft = if edges == 0 { 1.0 } else { ratio(proper, edges) };
    Evaluation::new(soft, all_valid && proper == edges, diagnostics)
}

/// `coverage * (1 - N / #coordinators)`, where N counts coordinators whose
/// neighbors are all coordinators. Invalid answers count as "No".
pub fn evaluate_vertex_cover(t: &Topology, answers: &AnswerSheet) -> Evaluation {
    let by_node = answers_by_node(t, answers);
    let coord: Vec<bool> = by_node
        .iter()
        .map(|a| matches!(a, FinalAnswer::YesNo(true)))
        .collect();
    let mut diagnostics = Vec::new();
    let mut covered = 0;
    for &(u, v) in t.edges() {
        if coord[u] || coord[v] {
            covered += 1;
        } else {
            diagnostics.push(format!("edge {}-{}: not covered", t.name_of(u), t.name_of(v)));
        }
    }
    let adj = t.adjacency();
    let mut non_essential = 0;
    for v in (0..t.node_count()).filter(|&v| coord[v]) {
        if adj[v].iter().all(|&w| coord[w]) {
            non_essential += 1;
            diagnostics.push(format!("{}: non-essential coordinator", t.name_of(v)));
        }
    }
    let coordinators = coord.iter().filter(|&&c| c).count();
    let edges = t.edge_count();
    let coverage = if edges == 0 { 1.0 } else { ratio(covered, edges) };
    let soft = if coordinators == 0 {
        if edges == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        coverage * (1.0 - ratio(non_essential, coordinators))
    };
    Evaluation::new(soft, covered == edges && non_essential == 0, diagnostics)
}

/// `1 - I / #agents`, where each agent contributes at most one inconsistency:
/// a non-mutual choice, a choice that is not a neighbor, or "None" next to
/// another "None".
pub fn evaluate_matching(t: &Topology, answers: &AnswerSheet) -> Evaluation {
    let by_node = answers_by_node(t, answers);
    let index: BTreeMap<String, usize> = (0..t.node_count()).map(|v| (t.name_of(v), v)).collect();
    let adj = t.adjacency();
    let is_none = |v: usize| matches!(by_node[v], FinalAnswer::PartnerChoice(None));
    let mut diagnostics = Vec::new();
    let mut inconsistent = 0;
    for u in 0..t.node_count() {
        let me = t.name_of(u);
        let problem = match by_node[u] {
            FinalAnswer::PartnerChoice(Some(partner)) => match index.get(partner) {
                Some(&v) if t.has_edge(u, v) => match by_node[v] {
                    FinalAnswer::PartnerChoice(Some(back)) if *back == me => None,
                    _ => Some(format!("{me}: chose {partner}, who did not choose back")),
                },
                _ => Some(format!("{me}: chose {partner}, who is not a neighbor")),
            },
            FinalAnswer::PartnerChoice(None) => adj[u]
                .iter()
                .find(|&&w| is_none(w))
                .map(|&w| format!("{me}: answered None next to unmatched {}", t.name_of(w))),
            other => Some(format!("{me}: invalid partner answer {}", other.canonical())),
        };
        if let Some(p) = problem {
            inconsistent += 1;
            diagnostics.push(p);
        }
    }
    let n = t.node_count();
    Evaluation::new(1.0 - ratio(inconsistent, n), inconsistent == 0, diagnostics)
}

/// Solved iff exactly one agent says "Yes"; invalid answers count as "No".
pub fn evaluate_leader_election(t: &Topology, answers: &AnswerSheet) -> Evaluation {
    let mut yes: Vec<String> = answers_by_node(t, answers)
        .iter()
        .enumerate()
        .filter(|(_, a)| matches!(a, FinalAnswer::YesNo(true)))
        .map(|(v, _)| t.name_of(v))
        .collect();
    yes.sort();
    let solved = yes.len() == 1;
    let diagnostics = if solved {
        Vec::new()
    } else {
        vec![format!("{} leaders: [{}]", yes.len(), yes.join(", "))]
    };
    Evaluation::new(if solved { 1.0 } else { 0.0 }, solved, diagnostics)
}

/// Solved iff every agent announces the same bit.
pub fn evaluate_consensus(t: &Topology, answers: &AnswerSheet) -> Evaluation {
    let by_node = answers_by_node(t, answers);
    let mut counts = [0usize; 2];
    let mut diagnostics = Vec::new();
    for (v, a) in by_node.iter().enumerate() {
        match a {
            FinalAnswer::Bit(b) if *b <= 1 => counts[*b as usize] += 1,
            other => diagnostics.push(format!("{}: invalid value {}", t.name_of(v), other.canonical())),
        }
    }
    let n = t.node_count();
    let solved = counts[0] == n || counts[1] == n;
    if !solved && diagnostics.is_empty() {
        diagnostics.push(format!("split vote: {} zeros, {} ones", counts[0], counts[1]));
    }
    Evaluation::new(if solved { 1.0 } else { 0.0 }, solved, diagnostics)
}
