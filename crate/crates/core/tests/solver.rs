mod common;

use std::collections::BTreeMap;

use orc_core::solver::{brute_force_leaves, brute_force_solve_with_limits, OracleLimits};
use orc_core::{
    apply_edits, brute_force_solve, eval_formula, explain_infeasible, resolve_incremental, resolve_warm, solve,
    solve_with, Attr, Clause, EditBatch, Formula, LayoutProblem, LinExpr, SolveError, SolveOptions, Strength, VarId,
    Viewport, WarmStart, Widget, WidgetChange,
};
use proptest::prelude::*;

const LIMITS: OracleLimits = OracleLimits { max_branches: 24, max_soft: 16 };

fn x() -> LinExpr {
    LinExpr::var(VarId::new("x", Attr::Left))
}

fn one_var(clauses: Vec<Clause>) -> LayoutProblem {
    LayoutProblem::raw(vec![Widget::fixed("x", 10.0, 10.0)], Viewport::new(100.0, 100.0), clauses, 1.0).unwrap()
}

fn range() -> Clause {
    Clause::hard("range", Formula::all([x().at_least(0.0), x().at_most(10.0)]))
}

#[test]
fn hard_only_uses_secondary_objective() {
    let s = solve(&one_var(vec![range()]), None).unwrap();
    assert!(s.optimal);
    assert_eq!(s.satisfied_weight, 0.0);
    assert_eq!(s.value("x", Attr::Left), Some(0.0));
    assert_eq!(s.value("x", Attr::Width), Some(10.0));
}

#[test]
fn heavier_soft_clause_wins() {
    let p = one_var(vec![
        range(),
        Clause::soft("zero", 2.0, x().equal_to(0.0)),
        Clause::soft("five", 3.0, x().equal_to(5.0)),
    ]);
    for s in [solve(&p, None).unwrap(), brute_force_solve(&p).unwrap()] {
        assert_eq!(s.satisfied_weight, 3.0);
        assert_eq!(s.value("x", Attr::Left), Some(5.0));
    }
}

#[test]
fn disjunction_choice_is_reported() {
    let p = one_var(vec![
        Clause::hard("pick", Formula::or([x().equal_to(0.0).into(), x().equal_to(10.0).into()])),
        Clause::soft("big", 1.0, x().at_least(5.0)),
    ]);
    let s = solve(&p, None).unwrap();
    assert_eq!(s.value("x", Attr::Left), Some(10.0));
    assert_eq!(s.satisfied_weight, 1.0);
    assert_eq!(s.branch_choices.get("pick"), Some(&1));
}

#[test]
fn contradictory_hard_clauses() {
    let p = one_var(vec![Clause::hard("lo", x().at_least(1.0)), Clause::hard("hi", x().at_most(0.0))]);
    match solve(&p, None) {
        Err(SolveError::HardInfeasible(labels)) => assert_eq!(labels, vec!["lo", "hi"]),
        other => panic!("expected HardInfeasible, got {other:?}"),
    }
}

#[test]
fn explain_filters_bystanders() {
    let y = LinExpr::var(VarId::new("x", Attr::Top));
    let p = one_var(vec![
        Clause::hard("a", x().at_least(1.0)),
        Clause::hard("b", x().at_most(0.0)),
        Clause::hard("c", y.at_least(0.0)),
    ]);
    assert_eq!(explain_infeasible(&p).unwrap(), vec!["a", "b"]);
    let single = one_var(vec![Clause::hard("self", Formula::all([x().at_least(1.0), x().at_most(0.0)]))]);
    assert_eq!(explain_infeasible(&single).unwrap(), vec!["self"]);
    assert_eq!(explain_infeasible(&one_var(vec![range()])), Err(SolveError::CalledOnFeasibleProblem));
}

#[test]
fn oracle_small_cases() {
    let empty = LayoutProblem::raw(vec![], Viewport::new(10.0, 10.0), vec![], 1.0).unwrap();
    assert_eq!(brute_force_solve(&empty).unwrap().satisfied_weight, 0.0);
    assert_eq!(solve(&empty, None).unwrap().satisfied_weight, 0.0);
    let big: Vec<Clause> = (0..17).map(|i| Clause::soft(format!("s{i}"), 1.0, x().at_least(0.0))).collect();
    assert!(matches!(brute_force_solve(&one_var(big)), Err(SolveError::TooLargeForOracle(_))));
}

#[test]
fn empty_batch_keeps_weight() {
    let p = one_var(vec![range(), Clause::soft("five", 3.0, x().equal_to(5.0))]);
    let prev = solve(&p, None).unwrap();
    let (_, s) = resolve_incremental(&p, &prev, &EditBatch::default(), None).unwrap();
    assert_eq!(s.satisfied_weight, prev.satisfied_weight);
    assert_eq!(s.assignment, prev.assignment);
}

#[test]
fn deleting_only_widget_leaves_empty_solution() {
    let p = LayoutProblem::assemble(vec![Widget::fixed("w", 10.0, 10.0)], Viewport::new(50.0, 50.0), vec![]).unwrap();
    let prev = solve(&p, None).unwrap();
    let edits = EditBatch { widget_changes: vec![WidgetChange::Remove("w".into())], ..Default::default() };
    let (q, s) = resolve_incremental(&p, &prev, &edits, None).unwrap();
    assert!(q.widgets.is_empty() && q.clauses.is_empty());
    assert_eq!(s.satisfied_weight, 0.0);
    assert!(s.assignment.is_empty());
}

#[test]
fn unknown_remove_label() {
    let p = one_var(vec![range()]);
    let prev = solve(&p, None).unwrap();
    let edits = EditBatch { remove: vec!["nope".into()], ..Default::default() };
    assert_eq!(
        resolve_incremental(&p, &prev, &edits, None).unwrap_err(),
        SolveError::UnknownLabelInRemove("nope".into())
    );
}

fn assert_hard_hold(p: &LayoutProblem, assignment: &BTreeMap<VarId, f64>) {
    for c in p.clauses.iter().filter(|c| c.strength == Strength::Hard) {
        assert!(eval_formula(&c.formula, assignment).unwrap(), "hard clause {} violated", c.label);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_oracle(seed in any::<u64>()) {
        let p = common::random_problem(seed);
        let fast = solve(&p, None);
        let slow = brute_force_solve_with_limits(&p, LIMITS);
        match (fast, slow) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.satisfied_weight, b.satisfied_weight);
                prop_assert_eq!(&a.branch_choices, &b.branch_choices);
                prop_assert_eq!(&a.assignment, &b.assignment);
                prop_assert!(a.optimal);
                assert_hard_hold(&p, &a.assignment);
            }
            (Err(SolveError::HardInfeasible(_)), Err(SolveError::HardInfeasible(_))) => {}
            (a, b) => prop_assert!(false, "solver {:?} vs oracle {:?}", a, b),
        }
    }

    #[test]
    fn warm_start_is_neutral(seed in any::<u64>()) {
        let p = common::random_problem(seed);
        if let Ok(cold) = solve(&p, None) {
            let (_, warm) = resolve_incremental(&p, &cold, &EditBatch::default(), None).unwrap();
            prop_assert_eq!(warm.satisfied_weight, cold.satisfied_weight);
            prop_assert_eq!(&warm.branch_choices, &cold.branch_choices);
        }
    }

    #[test]
    fn learned_conflicts_survive_an_edit(seed in any::<u64>(), extra in 0u64..1000) {
        let p = common::random_problem(seed);
        let other = common::random_problem(seed ^ (extra + 1));
        let Ok((cold, stats)) = solve_with(&p, &SolveOptions::default()) else { return Ok(()) };
        let add: Vec<Clause> = other
            .clauses
            .iter()
            .filter(|c| !c.strength.is_hard())
            .take(1)
            .map(|c| Clause { label: "extra".into(), ..c.clone() })
            .collect();
        let edits = EditBatch { add, ..Default::default() };
        let target = apply_edits(&p, &edits).unwrap();
        let (q, warm, _) = resolve_warm(p, WarmStart::from_solve(&cold, &stats), &edits, None).unwrap();
        prop_assert_eq!(&q, &target);
        let fresh = solve(&target, None).unwrap();
        prop_assert_eq!(warm.satisfied_weight, fresh.satisfied_weight);
        prop_assert_eq!(&warm.branch_choices, &fresh.branch_choices);
    }

    #[test]
    fn adding_soft_clause_never_lowers_optimum(seed in any::<u64>(), extra in 0u64..1000) {
        let p = common::random_problem(seed);
        let other = common::random_problem(seed ^ (extra + 1));
        let Ok(base) = solve(&p, None) else { return Ok(()) };
        let Some(c) = other.clauses.iter().find(|c| !c.strength.is_hard()) else { return Ok(()) };
        let mut q = p.clone();
        q.clauses.push(Clause { label: "extra".into(), ..c.clone() });
        let more = solve(&q, None).unwrap();
        prop_assert!(more.satisfied_weight >= base.satisfied_weight);
    }

    #[test]
    fn pruned_subtrees_hold_no_better_leaf(seed in any::<u64>()) {
        let p = common::random_problem(seed);
        let opts = SolveOptions { record_pruned: true, ..Default::default() };
        let Ok((_, stats)) = solve_with(&p, &opts) else { return Ok(()) };
        let leaves = brute_force_leaves(&p, LIMITS).unwrap();
        for node in &stats.pruned {
            for leaf in leaves.iter().filter(|l| l.path.starts_with(&node.path)) {
                prop_assert!(leaf.weight <= node.bound + 1e-9, "bound {} below leaf {}", node.bound, leaf.weight);
            }
        }
    }

    #[test]
    fn repeated_solves_are_identical(seed in any::<u64>()) {
        let p = common::random_problem(seed);
        if let (Ok(a), Ok(b)) = (solve(&p, None), solve(&p, None)) {
            prop_assert_eq!(a.branch_choices, b.branch_choices);
            prop_assert_eq!(a.assignment, b.assignment);
        }
    }
}
