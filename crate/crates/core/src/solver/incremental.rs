//! Edits applied to a solved problem, re-solved with the previous solution
//! as a warm start.

use std::collections::{HashMap, HashSet};
use std::time::Duration;

use super::{solve_with, SolveError, SolveOptions, SolveStats, WarmStart};
use crate::model::{box_clause, box_label, pref_clauses, pref_labels, Clause, LayoutProblem, Solution, Viewport, Widget};

#[derive(Clone, Debug, PartialEq)]
pub enum WidgetChange {
    Add(Widget),
    Remove(String),
    /// Replaces the widget record with the same id (sizes, kind, priority).
    Retarget(Widget),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EditBatch {
    pub remove: Vec<String>,
    pub add: Vec<Clause>,
    pub widget_changes: Vec<WidgetChange>,
    pub viewport: Option<Viewport>,
}

impl EditBatch {
    pub fn is_empty(&self) -> bool {
        self.remove.is_empty() && self.add.is_empty() && self.widget_changes.is_empty() && self.viewport.is_none()
    }
}

fn is_auto_label(label: &str, widgets: &[Widget]) -> bool {
    widgets.iter().any(|w| label == box_label(&w.id) || pref_labels(&w.id).iter().any(|l| l == label))
}

/// The problem after `edits`: removals, widget changes (automatic clauses
/// regenerated in place), viewport, then additions appended.
pub fn apply_edits(problem: &LayoutProblem, edits: &EditBatch) -> Result<LayoutProblem, SolveError> {
    let mut p = problem.clone();
    edit_in_place(&mut p, edits)?;
    Ok(p)
}

/// [`apply_edits`] on an owned problem. Unknown removal labels are reported
/// before anything changes; on a later validation error the problem is left
/// part-way edited.
pub fn edit_in_place(problem: &mut LayoutProblem, edits: &EditBatch) -> Result<(), SolveError> {
    if !edits.remove.is_empty() {
        let present: HashSet<&str> = problem.clauses.iter().map(|c| c.label.as_str()).collect();
        if let Some(l) = edits.remove.iter().find(|l| !present.contains(l.as_str())) {
            return Err(SolveError::UnknownLabelInRemove(l.clone()));
        }
        let gone: HashSet<&String> = edits.remove.iter().collect();
        problem.clauses.retain(|c| !gone.contains(&c.label));
    }
    let resized = edits.viewport.is_some_and(|v| v != problem.viewport);
    let viewport = edits.viewport.unwrap_or(problem.viewport);
    problem.viewport = viewport;
    let mut auto: HashSet<String> = HashSet::new();
    if edits.widget_changes.iter().any(|c| matches!(c, WidgetChange::Add(_))) {
        for w in &problem.widgets {
            auto.insert(box_label(&w.id));
            auto.extend(pref_labels(&w.id));
        }
    }
    for change in &edits.widget_changes {
        match change {
            WidgetChange::Add(w) => {
                let at = problem.clauses.iter().rposition(|c| auto.contains(&c.label)).map_or(0, |i| i + 1);
                let mut fresh = vec![box_clause(w, viewport)];
                fresh.extend(pref_clauses(w));
                auto.extend(fresh.iter().map(|c| c.label.clone()));
                problem.clauses.splice(at..at, fresh);
                problem.widgets.push(w.clone());
            }
            WidgetChange::Remove(id) => {
                problem.widgets.retain(|w| &w.id != id);
                let box_l = box_label(id);
                let pref_l = pref_labels(id);
                problem.clauses.retain(|c| c.label != box_l && !pref_l.contains(&c.label));
            }
            WidgetChange::Retarget(w) => {
                if let Some(slot) = problem.widgets.iter_mut().find(|x| x.id == w.id) {
                    *slot = w.clone();
                }
                let mut fresh = vec![box_clause(w, viewport)];
                fresh.extend(pref_clauses(w));
                for c in problem.clauses.iter_mut() {
                    if let Some(f) = fresh.iter().find(|f| f.label == c.label) {
                        *c = f.clone();
                    }
                }
            }
        }
    }
    // box clauses depend on the viewport
    if resized {
        let boxes: HashMap<String, Clause> =
            problem.widgets.iter().map(|w| (box_label(&w.id), box_clause(w, viewport))).collect();
        for c in problem.clauses.iter_mut() {
            if let Some(b) = boxes.get(&c.label) {
                *c = b.clone();
            }
        }
    }
    problem.clauses.extend(edits.add.iter().cloned());
    Ok(problem.validate()?)
}

/// Applies `edits` and re-solves, seeding branch order and LP values from `prev`.
pub fn resolve_incremental(
    problem: &LayoutProblem,
    prev: &Solution,
    edits: &EditBatch,
    budget: Option<Duration>,
) -> Result<(LayoutProblem, Solution), SolveError> {
    resolve_warm(problem.clone(), WarmStart::from_solution(prev), edits, budget).map(|(p, s, _)| (p, s))
}

/// Like [`resolve_incremental`] with a full warm start, including conflicts
/// learned by the previous solve. Returns the new stats for chaining.
pub fn resolve_warm(
    mut problem: LayoutProblem,
    warm: WarmStart,
    edits: &EditBatch,
    budget: Option<Duration>,
) -> Result<(LayoutProblem, Solution, SolveStats), SolveError> {
    edit_in_place(&mut problem, edits)?;
    let edited = problem;
    let opts = SolveOptions { budget, warm: Some(warm), record_pruned: false };
    let (solution, stats) = solve_with(&edited, &opts)?;
    Ok((edited, solution, stats))
}

/// An edit batch taking `old` to `new`: widget records are diffed, the
/// longest common prefix of pattern and user clauses is kept and the rest
/// replaced. Callers needing exact clause order should compare
/// `apply_edits(old, batch)` with `new`; reordered widgets do not round-trip.
pub fn diff_batch(old: &LayoutProblem, new: &LayoutProblem) -> EditBatch {
    let mut batch = EditBatch { viewport: (old.viewport != new.viewport).then_some(new.viewport), ..Default::default() };
    for w in &old.widgets {
        if new.widget(&w.id).is_none() {
            batch.widget_changes.push(WidgetChange::Remove(w.id.clone()));
        }
    }
    for w in &new.widgets {
        match old.widget(&w.id) {
            None => batch.widget_changes.push(WidgetChange::Add(w.clone())),
            Some(o) if o != w => batch.widget_changes.push(WidgetChange::Retarget(w.clone())),
            Some(_) => {}
        }
    }
    let user = |p: &LayoutProblem| -> Vec<Clause> {
        p.clauses.iter().filter(|c| !is_auto_label(&c.label, &p.widgets)).cloned().collect()
    };
    let (a, b) = (user(old), user(new));
    let keep = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    batch.remove = a[keep..].iter().map(|c| c.label.clone()).collect();
    batch.add = b[keep..].to_vec();
    batch
}
