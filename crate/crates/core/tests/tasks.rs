mod common;

use std::collections::BTreeMap;

use meshbench::seed::rng;
use meshbench::tasks::{
    evaluate, oracle_check, parse_answer_body, parse_final_answer, AnswerSheet, FinalAnswer, OracleError, TaskKind,
    TaskSpec, FINAL_ANSWER_MARKER, ORACLE_MAX_NODES,
};
use meshbench::topology::{FamilyParams, GraphFamily, Topology};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn kind_strategy() -> impl Strategy<Value = TaskKind> {
    proptest::sample::select(TaskKind::ALL.to_vec())
}

fn family_strategy() -> impl Strategy<Value = GraphFamily> {
    proptest::sample::select(GraphFamily::ALL.to_vec())
}

fn labeled(t: Topology) -> Topology {
    let names: Vec<String> = (0..t.node_count()).map(|v| format!("N{v:02}")).collect();
    t.with_labels(&names).unwrap()
}

fn path(n: usize) -> Topology {
    labeled(Topology::from_edges(n, (1..n).map(|v| (v - 1, v)), GraphFamily::SmallWorld, 0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn evaluator_agrees_with_oracle(
        kind in kind_strategy(),
        family in family_strategy(),
        n in 4usize..=ORACLE_MAX_NODES,
        seed in any::<u64>(),
        draw in any::<u64>(),
    ) {
        let t = labeled(FamilyParams::default().generate(family, n, seed).unwrap());
        let mut r = rng(draw, &[]);
        for _ in 0..8 {
            let sheet = common::random_sheet(kind, &t, &mut r);
            let eval = evaluate(kind, &t, &sheet);
            prop_assert_eq!(eval.solved, oracle_check(kind, &t, &sheet).unwrap(), "{:?}", sheet);
            prop_assert!((0.0..=1.0).contains(&eval.soft_score));
            if eval.solved {
                prop_assert_eq!(eval.soft_score, 1.0);
            }
        }
    }

    #[test]
    fn evaluation_is_invariant_under_relabeling(
        kind in kind_strategy(),
        family in family_strategy(),
        n in 4usize..20,
        seed in any::<u64>(),
        draw in any::<u64>(),
    ) {
        let t = labeled(FamilyParams::default().generate(family, n, seed).unwrap());
        let mut r = rng(draw, &[]);
        let sheet = common::random_sheet(kind, &t, &mut r);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let moved = t.relabeled(&perm).unwrap();
        let a = evaluate(kind, &t, &sheet);
        let b = evaluate(kind, &moved, &sheet);
        prop_assert_eq!(a.soft_score, b.soft_score);
        prop_assert_eq!(a.solved, b.solved);
        prop_assert_eq!(a.diagnostics.len(), b.diagnostics.len());
    }

    #[test]
    fn canonical_answers_parse_back(
        kind in kind_strategy(),
        n in 4usize..12,
        seed in any::<u64>(),
        draw in any::<u64>(),
    ) {
        let t = labeled(FamilyParams::default().generate(GraphFamily::SmallWorld, n, seed).unwrap());
        let spec = TaskSpec::for_topology(kind, &t);
        let grammar = spec.grammar(&t.names());
        let mut r = rng(draw, &[]);
        for (_, a) in common::random_sheet(kind, &t, &mut r) {
            let text = a.canonical();
            prop_assert_eq!(parse_answer_body(kind, &text, &grammar), a.clone());
            let response = format!("Some reasoning.\n{FINAL_ANSWER_MARKER} {text}");
            prop_assert_eq!(parse_final_answer(kind, &response, &grammar), a);
        }
    }
}

#[test]
fn oracle_rejects_large_graphs() {
    let t = path(ORACLE_MAX_NODES + 1);
    assert_eq!(
        oracle_check(TaskKind::Consensus, &t, &AnswerSheet::new()),
        Err(OracleError::TooLarge(ORACLE_MAX_NODES + 1))
    );
}

fn sheet(t: &Topology, answers: &[FinalAnswer]) -> AnswerSheet {
    answers.iter().enumerate().map(|(v, a)| (t.name_of(v), a.clone())).collect()
}

#[test]
fn coloring_soft_score_counts_proper_edges() {
    let t = path(4);
    let g = FinalAnswer::GroupChoice;
    let e = evaluate(TaskKind::Coloring, &t, &sheet(&t, &[g(1), g(2), g(2), g(1)]));
    assert!(!e.solved);
    assert!((e.soft_score - 2.0 / 3.0).abs() < 1e-12);
    let e = evaluate(TaskKind::Coloring, &t, &sheet(&t, &[g(1), g(2), g(1), g(4)]));
    assert!(!e.solved, "group 4 exceeds max degree + 1 = 3");
    assert!((e.soft_score - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn vertex_cover_penalizes_non_essential_coordinators() {
    let t = path(4);
    let yn = FinalAnswer::YesNo;
    let e = evaluate(TaskKind::VertexCover, &t, &sheet(&t, &[yn(true), yn(true), yn(true), yn(false)]));
    // Full coverage; N00 and N01 have only coordinator neighbors, so two of
    // three coordinators are non-essential.
    assert!(!e.solved);
    assert!((e.soft_score - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn matching_counts_each_agent_once() {
    let t = path(4);
    let p = |s: Option<&str>| FinalAnswer::PartnerChoice(s.map(String::from));
    let e = evaluate(
        TaskKind::Matching,
        &t,
        &sheet(&t, &[p(Some("N01")), p(Some("N00")), p(None), p(None)]),
    );
    assert!(!e.solved);
    assert!((e.soft_score - 0.5).abs() < 1e-12);
    let e = evaluate(
        TaskKind::Matching,
        &t,
        &sheet(&t, &[p(Some("N01")), p(Some("N00")), p(Some("N03")), p(Some("N02"))]),
    );
    assert!(e.solved);
}

#[test]
fn global_tasks_are_all_or_nothing() {
    let t = path(5);
    let mut answers: Vec<FinalAnswer> = vec![FinalAnswer::Bit(1); 5];
    assert!(evaluate(TaskKind::Consensus, &t, &sheet(&t, &answers)).solved);
    answers[3] = FinalAnswer::Bit(0);
    let e = evaluate(TaskKind::Consensus, &t, &sheet(&t, &answers));
    assert_eq!((e.solved, e.soft_score), (false, 0.0));
    let leaders: BTreeMap<usize, bool> = [(0, false), (1, true), (2, false), (3, false), (4, false)].into();
    let answers: Vec<FinalAnswer> = leaders.values().map(|&b| FinalAnswer::YesNo(b)).collect();
    assert!(evaluate(TaskKind::LeaderElection, &t, &sheet(&t, &answers)).solved);
    assert!(!evaluate(TaskKind::LeaderElection, &t, &AnswerSheet::new()).solved);
}

#[test]
fn missing_answers_count_as_invalid() {
    let t = path(3);
    for kind in TaskKind::ALL {
        let e = evaluate(kind, &t, &AnswerSheet::new());
        assert!(!e.solved, "{kind}");
        assert_eq!(oracle_check(kind, &t, &AnswerSheet::new()), Ok(false), "{kind}");
    }
}
