//! Weighted-max search over clauses with OR-constraints.
//!
//! Clauses are lowered to negation normal form in an arena. A soft clause
//! becomes `Or(Weighted(w, f), True)`, so "satisfy" and "give up the weight"
//! are ordinary disjuncts. The search walks the choice tree depth-first in
//! declaration order, committing atoms to an incremental simplex and pruning
//! on infeasibility and on an admissible reward bound.

mod explain;
mod incremental;
mod oracle;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::lp::{Col, Direction, LpStatus, Prepared, Tableau};
use crate::model::{nnf, Atom, Attr, Clause, Formula, LayoutProblem, ModelError, Rel, Solution, Strength, VarId};

pub use explain::explain_infeasible;
pub use incremental::{apply_edits, diff_batch, resolve_incremental, resolve_warm, EditBatch, WidgetChange};
pub use oracle::{brute_force_leaves, Leaf, brute_force_solve, brute_force_solve_with_limits, OracleLimits};

/// Weight comparisons treat differences below this as ties.
pub const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("hard clauses are unsatisfiable: {}", .0.join(", "))]
    HardInfeasible(Vec<String>),
    #[error("problem too large for the brute-force oracle ({0})")]
    TooLargeForOracle(String),
    #[error("unknown clause label in remove: {0}")]
    UnknownLabelInRemove(String),
    #[error("problem is feasible")]
    CalledOnFeasibleProblem,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Previous solution data used to order the search.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WarmStart {
    pub branch_choices: BTreeMap<String, usize>,
    pub assignment_hint: BTreeMap<VarId, f64>,
    /// Conflicting sets learned by an earlier solve, as (clause label,
    /// disjunction ordinal) pairs. Each is re-checked before use. `None`
    /// when unknown; an empty list marks an earlier search that never
    /// needed one, and the guided dive is then skipped.
    pub conflicts: Option<Vec<Vec<(String, usize)>>>,
}

impl WarmStart {
    pub fn from_solution(s: &Solution) -> Self {
        WarmStart {
            branch_choices: s.branch_choices.clone(),
            assignment_hint: s.assignment.clone(),
            conflicts: None,
        }
    }

    /// Also carries the conflicts learned while producing `s`.
    pub fn from_solve(s: &Solution, stats: &SolveStats) -> Self {
        WarmStart { conflicts: Some(stats.learned.clone()), ..WarmStart::from_solution(s) }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub budget: Option<Duration>,
    pub warm: Option<WarmStart>,
    /// Keep every node cut by the bound, for admissibility checks.
    pub record_pruned: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrunedNode {
    pub path: Vec<usize>,
    pub bound: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_checks: u64,
    pub pruned: Vec<PrunedNode>,
    /// Choice path of the returned skeleton.
    pub path: Vec<usize>,
    pub learned: Vec<Vec<(String, usize)>>,
}

pub fn solve(problem: &LayoutProblem, budget: Option<Duration>) -> Result<Solution, SolveError> {
    solve_with(problem, &SolveOptions { budget, ..Default::default() }).map(|(s, _)| s)
}

pub fn solve_with(problem: &LayoutProblem, opts: &SolveOptions) -> Result<(Solution, SolveStats), SolveError> {
    let start = Instant::now();
    problem.validate()?;
    let prog = Program::compile(problem, opts.warm.as_ref());
    let mut search = Search::new(&prog, opts, start, false);
    search.run();
    let Some(best) = search.best.take() else {
        return Err(SolveError::HardInfeasible(explain_infeasible(problem).unwrap_or_default()));
    };
    let atoms: Vec<Atom> = best.atoms.iter().map(|&i| prog.atoms[i].clone()).collect();
    let assignment = realize(problem, &atoms);
    let branch_choices = best
        .choices
        .iter()
        .map(|&(c, i)| (problem.clauses[c].label.clone(), i))
        .collect();
    let learned = search
        .learned
        .iter()
        .map(|core| {
            core.iter()
                .map(|id| {
                    let (c, k) = prog.key_of[id];
                    (problem.clauses[c].label.clone(), k)
                })
                .collect()
        })
        .collect();
    let stats = SolveStats { path: best.path.clone(), learned, ..std::mem::take(&mut search.stats) };
    log::debug!("solve: {} nodes, {} lp checks, weight {}", stats.nodes, stats.lp_checks, best.weight);
    let solution = Solution {
        assignment,
        satisfied_weight: best.weight,
        total_soft_weight: problem.total_soft_weight(),
        branch_choices,
        optimal: !search.truncated,
        solve_time: start.elapsed(),
    };
    Ok((solution, stats))
}

/// True when the hard clauses of `problem` (soft ones ignored) are jointly satisfiable.
pub(crate) fn hard_feasible(problem: &LayoutProblem) -> bool {
    let hard = LayoutProblem {
        clauses: problem.clauses.iter().filter(|c| c.strength.is_hard()).cloned().collect(),
        ..problem.clone()
    };
    let prog = Program::compile(&hard, None);
    let mut search = Search::new(&prog, &SolveOptions::default(), Instant::now(), true);
    search.run();
    search.best.is_some()
}

/// Formula a clause contributes to the search: soft clauses become a
/// satisfy-or-forfeit choice.
pub(crate) fn clause_formula(c: &Clause, epsilon: f64) -> Formula {
    let f = nnf(&c.formula, epsilon);
    match c.strength {
        Strength::Hard => f,
        Strength::Soft(w) => Formula::Or(vec![Formula::weighted(w, f), Formula::truth()]),
    }
}

/// Or node whose choice is reported in `branch_choices` for the clause.
pub(crate) fn reported_or(strength: Strength, f: &Formula) -> Option<&Formula> {
    match (strength, f) {
        (Strength::Hard, Formula::Or(_)) => Some(f),
        (Strength::Soft(_), Formula::Or(ch)) => match &ch[0] {
            Formula::Weighted(_, inner) if matches!(**inner, Formula::Or(_)) => Some(inner),
            _ => None,
        },
        _ => None,
    }
}

enum Kind {
    Atom(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Weighted(f64, usize),
}

struct Node {
    kind: Kind,
    potential: f64,
}

struct Program {
    nodes: Vec<Node>,
    atoms: Vec<Atom>,
    prepared: Vec<Prepared>,
    lp: Tableau,
    /// Atoms of hard clauses without choices, asserted once at the root.
    root_atoms: Vec<usize>,
    pending: Vec<usize>,
    reported: HashMap<usize, usize>,
    /// Soft wrappers whose satisfy branch is a plain conjunction of atoms.
    soft_conj: HashMap<usize, Vec<usize>>,
    preferred: HashMap<usize, usize>,
    /// Whether a guided dive along `preferred` should seed the incumbent.
    dive: bool,
    hints: Vec<(Col, f64)>,
    /// Or nodes whose richest child is a weighted conjunction of atoms:
    /// those atoms and the weight lost by taking any other child.
    optimistic: HashMap<usize, (Vec<usize>, f64)>,
    /// Or node → (clause index, ordinal among the clause's Or nodes).
    key_of: HashMap<usize, (usize, usize)>,
    seeds: Vec<Vec<usize>>,
}

impl Program {
    fn compile(problem: &LayoutProblem, warm: Option<&WarmStart>) -> Program {
        let mut prog = Program {
            nodes: Vec::new(),
            atoms: Vec::new(),
            prepared: Vec::new(),
            lp: Tableau::new(),
            root_atoms: Vec::new(),
            pending: Vec::new(),
            reported: HashMap::new(),
            soft_conj: HashMap::new(),
            preferred: HashMap::new(),
            dive: false,
            hints: Vec::new(),
            optimistic: HashMap::new(),
            key_of: HashMap::new(),
            seeds: Vec::new(),
        };
        let mut vars: Vec<VarId> = problem.variables().collect();
        vars.sort();
        for v in &vars {
            prog.lp.structural(v);
        }
        let mut roots = Vec::new();
        for (ci, c) in problem.clauses.iter().enumerate() {
            let f = clause_formula(c, problem.epsilon);
            if c.strength.is_hard() {
                if let Some(atoms) = plain_atoms(&f) {
                    for a in atoms {
                        let id = prog.add_atom(a);
                        prog.root_atoms.push(id);
                    }
                    continue;
                }
            }
            let first = prog.nodes.len();
            let root = prog.add(&f);
            let ors = (first..prog.nodes.len()).filter(|&id| matches!(prog.nodes[id].kind, Kind::Or(_)));
            for (k, id) in ors.enumerate() {
                prog.key_of.insert(id, (ci, k));
            }
            if reported_or(c.strength, &f).is_some() {
                let id = prog.find_reported(root, c);
                prog.reported.insert(id, ci);
                if let Some(&k) = warm.and_then(|w| w.branch_choices.get(&c.label)) {
                    if let Kind::Or(ch) = &prog.nodes[id].kind {
                        if k < ch.len() {
                            prog.preferred.insert(id, k);
                        }
                    }
                }
            }
            if let (Strength::Soft(_), Formula::Or(ch)) = (c.strength, &f) {
                if let Formula::Weighted(_, inner) = &ch[0] {
                    if let Some(atoms) = plain_atoms(inner) {
                        let idx = atoms.into_iter().map(|a| prog.add_atom(a)).collect();
                        prog.soft_conj.insert(root, idx);
                    }
                }
            }
            roots.push(root);
        }
        prog.pending = roots.into_iter().rev().collect();
        if let Some(w) = warm {
            prog.dive = w.conflicts.as_ref().is_none_or(|c| !c.is_empty());
            let label_of: HashMap<&str, usize> =
                problem.clauses.iter().enumerate().map(|(i, c)| (c.label.as_str(), i)).collect();
            let node_of: HashMap<(usize, usize), usize> = prog.key_of.iter().map(|(&id, &key)| (key, id)).collect();
            for core in w.conflicts.iter().flatten() {
                let ids: Option<Vec<usize>> = core
                    .iter()
                    .map(|(l, k)| {
                        let id = *node_of.get(&(*label_of.get(l.as_str())?, *k))?;
                        prog.optimistic.contains_key(&id).then_some(id)
                    })
                    .collect();
                prog.seeds.extend(ids);
            }
            for (v, &x) in &w.assignment_hint {
                if let Some(c) = prog.lp.col_of(v) {
                    prog.hints.push((c, x));
                }
            }
        }
        prog
    }

    fn find_reported(&self, root: usize, c: &Clause) -> usize {
        match c.strength {
            Strength::Hard => root,
            Strength::Soft(_) => {
                let Kind::Or(ch) = &self.nodes[root].kind else { unreachable!() };
                let Kind::Weighted(_, inner) = self.nodes[ch[0]].kind else { unreachable!() };
                inner
            }
        }
    }

    fn add_atom(&mut self, a: &Atom) -> usize {
        let p = self.lp.prepare(a);
        self.atoms.push(a.clone());
        self.prepared.push(p);
        self.atoms.len() - 1
    }

    fn add(&mut self, f: &Formula) -> usize {
        let (kind, potential) = match f {
            Formula::Atom(a) => (Kind::Atom(self.add_atom(a)), 0.0),
            Formula::And(ch) => {
                let ids: Vec<usize> = ch.iter().map(|c| self.add(c)).collect();
                let p = ids.iter().map(|&i| self.nodes[i].potential).sum();
                (Kind::And(ids), p)
            }
            Formula::Or(ch) => {
                let ids: Vec<usize> = ch.iter().map(|c| self.add(c)).collect();
                let p = ids.iter().map(|&i| self.nodes[i].potential).fold(0.0, f64::max);
                let id = self.nodes.len();
                if let Some(entry) = self.optimistic_entry(&ids, p) {
                    self.optimistic.insert(id, entry);
                }
                (Kind::Or(ids), p)
            }
            Formula::Weighted(w, c) => {
                let id = self.add(c);
                (Kind::Weighted(*w, id), w + self.nodes[id].potential)
            }
            Formula::Not(_) => unreachable!("formula is in negation normal form"),
        };
        self.nodes.push(Node { kind, potential });
        self.nodes.len() - 1
    }

    fn optimistic_entry(&self, children: &[usize], potential: f64) -> Option<(Vec<usize>, f64)> {
        let best = children.iter().position(|&c| self.nodes[c].potential == potential)?;
        let Kind::Weighted(_, inner) = self.nodes[children[best]].kind else { return None };
        if self.nodes[inner].potential != 0.0 {
            return None;
        }
        let mut atoms = Vec::new();
        if !self.plain(inner, &mut atoms) {
            return None;
        }
        let rest = children.iter().enumerate().filter(|&(i, _)| i != best);
        let loss = potential - rest.map(|(_, &c)| self.nodes[c].potential).fold(0.0, f64::max);
        (loss > WEIGHT_TOL).then_some((atoms, loss))
    }

    fn plain(&self, id: usize, out: &mut Vec<usize>) -> bool {
        match &self.nodes[id].kind {
            Kind::Atom(a) => {
                out.push(*a);
                true
            }
            Kind::And(ch) => ch.iter().all(|&c| self.plain(c, out)),
            _ => false,
        }
    }

    fn pending_potential(&self, pending: &[usize]) -> f64 {
        pending.iter().map(|&i| self.nodes[i].potential).sum()
    }
}

/// The atoms of a formula built only from atoms and conjunctions.
fn plain_atoms(f: &Formula) -> Option<Vec<&Atom>> {
    fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) -> bool {
        match f {
            Formula::Atom(a) => {
                out.push(a);
                true
            }
            Formula::And(ch) => ch.iter().all(|c| go(c, out)),
            _ => false,
        }
    }
    let mut out = Vec::new();
    go(f, &mut out).then_some(out)
}

struct Incumbent {
    weight: f64,
    path: Vec<usize>,
    atoms: Vec<usize>,
    choices: Vec<(usize, usize)>,
}

struct Search<'p> {
    prog: &'p Program,
    lp: Tableau,
    budget: Option<Duration>,
    record_pruned: bool,
    start: Instant,
    first_leaf_only: bool,
    /// Follows warm-start choices and LP hints; stops at its first leaf.
    guided: bool,
    node_cap: Option<u64>,
    best: Option<Incumbent>,
    path: Vec<usize>,
    committed: Vec<usize>,
    choices: Vec<(usize, usize)>,
    stats: SolveStats,
    truncated: bool,
    done: bool,
    learned: Vec<Vec<usize>>,
    seen: HashSet<Vec<usize>>,
    by_item: HashMap<usize, Vec<usize>>,
}

impl<'p> Search<'p> {
    fn new(prog: &'p Program, opts: &SolveOptions, start: Instant, first_leaf_only: bool) -> Self {
        Search {
            prog,
            lp: prog.lp.clone(),
            budget: opts.budget,
            record_pruned: opts.record_pruned,
            start,
            first_leaf_only,
            guided: false,
            node_cap: None,
            best: None,
            path: Vec::new(),
            committed: Vec::new(),
            choices: Vec::new(),
            stats: SolveStats::default(),
            truncated: false,
            done: false,
            learned: Vec::new(),
            seen: HashSet::new(),
            by_item: HashMap::new(),
        }
    }

    fn run(&mut self) {
        for core in &self.prog.seeds {
            self.learn(core.clone());
        }
        let warm = !self.prog.preferred.is_empty() || !self.prog.hints.is_empty();
        if warm && self.prog.dive && !self.first_leaf_only {
            // A short dive along the previous choices seeds the incumbent;
            // the full search then runs in declaration order.
            let mut dive = Search::new(self.prog, &SolveOptions::default(), self.start, true);
            dive.guided = true;
            dive.node_cap = Some(64 + 8 * self.prog.nodes.len() as u64);
            dive.run();
            self.stats.nodes += dive.stats.nodes;
            self.stats.lp_checks += dive.stats.lp_checks;
            self.best = dive.best;
        }
        if self.guided {
            for &(c, x) in &self.prog.hints {
                self.lp.hint(c, x);
            }
        }
        let root: Vec<Prepared> = self.prog.root_atoms.iter().map(|&i| self.prog.prepared[i].clone()).collect();
        self.lp.push_prepared(&root);
        self.committed.extend(&self.prog.root_atoms);
        self.stats.lp_checks += 1;
        if !self.lp.feasible() {
            return;
        }
        self.dfs(self.prog.pending.clone(), 0.0);
    }

    fn out_of_time(&mut self) -> bool {
        if self.done {
            return true;
        }
        if self.node_cap.is_some_and(|cap| self.stats.nodes >= cap) {
            self.done = true;
            return true;
        }
        if let (Some(b), Some(_)) = (self.budget, &self.best) {
            if self.stats.nodes.is_multiple_of(32) && self.start.elapsed() > b {
                self.truncated = true;
                self.done = true;
            }
        }
        self.done
    }

    fn dfs(&mut self, mut pending: Vec<usize>, mut collected: f64) {
        if self.out_of_time() {
            return;
        }
        self.stats.nodes += 1;
        let nodes = &self.prog.nodes;
        let committed_len = self.committed.len();
        let mut fresh = Vec::new();
        let branch = loop {
            let Some(id) = pending.pop() else { break None };
            match &nodes[id].kind {
                Kind::Atom(a) => fresh.push(*a),
                Kind::And(ch) => pending.extend(ch.iter().rev()),
                Kind::Weighted(w, c) => {
                    collected += w;
                    pending.push(*c);
                }
                Kind::Or(_) => {
                    pending.push(id);
                    break Some(id);
                }
            }
        };
        let mark = (!fresh.is_empty()).then(|| {
            let prepared: Vec<Prepared> = fresh.iter().map(|&i| self.prog.prepared[i].clone()).collect();
            self.committed.extend(&fresh);
            self.lp.push_prepared(&prepared)
        });
        // Prefixes of the incumbent's path are feasible: their atoms are a
        // subset of its leaf. The guided dive defers the LP to its leaf.
        let on_incumbent = self.best.as_ref().is_some_and(|b| b.path.starts_with(&self.path));
        let check = mark.is_some() && !on_incumbent && (!self.guided || branch.is_none());
        let feasible = !check || {
            self.stats.lp_checks += 1;
            self.lp.feasible()
        };
        if self.guided && !feasible {
            self.done = true;
        }
        if feasible {
            let mut bound = collected + self.prog.pending_potential(&pending);
            if !on_incumbent && !self.cut(bound) && self.best.is_some() {
                bound -= self.conflict_loss(&pending);
            }
            if self.cut(bound) {
                if self.record_pruned {
                    self.stats.pruned.push(PrunedNode { path: self.path.clone(), bound });
                }
            } else {
                match branch {
                    None => self.leaf(collected),
                    Some(id) => self.branch(id, pending, collected),
                }
            }
        }
        if let Some(m) = mark {
            self.lp.pop(m).expect("own mark");
        }
        self.committed.truncate(committed_len);
    }

    fn branch(&mut self, id: usize, mut pending: Vec<usize>, collected: f64) {
        let Kind::Or(children) = &self.prog.nodes[id].kind else { unreachable!() };
        pending.pop();
        let mut order: Vec<usize> = (0..children.len()).collect();
        if let Some(&k) = self.prog.preferred.get(&id).filter(|_| self.guided) {
            order.retain(|&i| i != k);
            order.insert(0, k);
        }
        if let Some(atoms) = self.prog.soft_conj.get(&id) {
            if atoms.iter().all(|&a| self.lp.entails(&self.prog.prepared[a])) {
                order = vec![0];
            }
        }
        let clause = self.prog.reported.get(&id).copied();
        let mut explored: Vec<usize> = Vec::new();
        for i in order {
            if !self.guided && explored.iter().any(|&j| j < i && self.same_region(children[j], children[i])) {
                continue;
            }
            explored.push(i);
            let mut next = pending.clone();
            next.push(children[i]);
            self.path.push(i);
            if let Some(c) = clause {
                self.choices.push((c, i));
            }
            self.dfs(next, collected);
            self.path.pop();
            if clause.is_some() {
                self.choices.pop();
            }
            if self.done {
                break;
            }
        }
    }

    /// Weight that must be forfeited below this node: pending disjunctions
    /// whose best children cannot all hold are split into disjoint minimal
    /// conflicting sets, and each set gives up at least its smallest loss.
    fn conflict_loss(&mut self, pending: &[usize]) -> f64 {
        let prog = self.prog;
        let mut left: Vec<usize> = pending.iter().rev().copied().filter(|id| prog.optimistic.contains_key(id)).collect();
        let loss = |core: &[usize]| core.iter().map(|id| prog.optimistic[id].1).fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        while !left.is_empty() {
            let Some(k) = self.first_conflict(&left) else { break };
            let core = match self.recall(&left[..=k]) {
                Some(i) => self.learned[i].clone(),
                None => self.shrink(&left[..k], left[k]),
            };
            total += loss(&core);
            left.retain(|id| !core.contains(id));
            self.learn(core);
        }
        total
    }

    fn learn(&mut self, mut core: Vec<usize>) {
        const CAPACITY: usize = 4096;
        core.sort_unstable();
        if self.learned.len() < CAPACITY && self.seen.insert(core.clone()) {
            for &id in &core {
                self.by_item.entry(id).or_default().push(self.learned.len());
            }
            self.learned.push(core);
        }
    }

    /// The smallest learned set inside `prefix` that uses its last item and
    /// still clashes.
    fn recall(&mut self, prefix: &[usize]) -> Option<usize> {
        let last = *prefix.last()?;
        let mut found: Vec<usize> = self.by_item.get(&last)?.clone();
        let within: HashSet<usize> = prefix.iter().copied().collect();
        found.retain(|&i| self.learned[i].iter().all(|id| within.contains(id)));
        found.sort_by_key(|&i| self.learned[i].len());
        found.into_iter().find(|&i| self.clashes(i))
    }

    /// Whether learned set `i` is still contradictory under the current context.
    fn clashes(&mut self, i: usize) -> bool {
        let mark = self.lp.push_prepared(&[]);
        for k in 0..self.learned[i].len() {
            self.push_optimistic(self.learned[i][k]);
        }
        self.stats.lp_checks += 1;
        let clash = !self.lp.feasible();
        self.lp.pop(mark).expect("own mark");
        clash
    }

    fn push_optimistic(&mut self, id: usize) {
        let prog = self.prog;
        let atoms: Vec<Prepared> = prog.optimistic[&id].0.iter().map(|&a| prog.prepared[a].clone()).collect();
        self.lp.push_prepared(&atoms);
    }

    /// Index of the first item whose best child clashes with those before it.
    fn first_conflict(&mut self, items: &[usize]) -> Option<usize> {
        let mark = self.lp.push_prepared(&[]);
        let mut hit = None;
        for (k, &id) in items.iter().enumerate() {
            self.push_optimistic(id);
            self.stats.lp_checks += 1;
            if !self.lp.feasible() {
                hit = Some(k);
                break;
            }
        }
        self.lp.pop(mark).expect("own mark");
        hit
    }

    /// A minimal conflicting subset of `candidates` plus `last`, by insertion.
    fn shrink(&mut self, candidates: &[usize], last: usize) -> Vec<usize> {
        let mut core = vec![last];
        let mut candidates = candidates.to_vec();
        loop {
            let mark = self.lp.push_prepared(&[]);
            for &id in &core {
                self.push_optimistic(id);
            }
            self.stats.lp_checks += 1;
            let trigger = if self.lp.feasible() {
                let mut hit = None;
                for (i, &id) in candidates.iter().enumerate() {
                    self.push_optimistic(id);
                    self.stats.lp_checks += 1;
                    if !self.lp.feasible() {
                        hit = Some(i);
                        break;
                    }
                }
                hit
            } else {
                None
            };
            self.lp.pop(mark).expect("own mark");
            match trigger {
                Some(i) => {
                    core.push(candidates[i]);
                    candidates.truncate(i);
                }
                None => return core,
            }
        }
    }

    /// Two single-atom disjuncts with the same relation whose difference the
    /// current context pins to zero lead to identical subtrees.
    fn same_region(&mut self, a: usize, b: usize) -> bool {
        let nodes = &self.prog.nodes;
        let (Kind::Atom(x), Kind::Atom(y)) = (&nodes[a].kind, &nodes[b].kind) else { return false };
        let (x, y) = (&self.prog.atoms[*x], &self.prog.atoms[*y]);
        if x.rel != y.rel {
            return false;
        }
        let diff = x.expr.clone() - y.expr.clone();
        let mut cols = Vec::new();
        for (v, c) in diff.terms() {
            match self.lp.col_of(v) {
                Some(col) => cols.push((col, c)),
                None => return false,
            }
        }
        let at = |lp: &Tableau| diff.constant_part() + cols.iter().map(|&(c, k)| k * lp.value(c)).sum::<f64>();
        if at(&self.lp).abs() > 1e-7 {
            return false;
        }
        if cols.is_empty() {
            return true;
        }
        let mark = self.lp.push_prepared(&[]);
        let mut pinned = true;
        for dir in [Direction::Min, Direction::Max] {
            if self.lp.optimize_cols(&cols, dir) != Ok(LpStatus::Optimal) || at(&self.lp).abs() > 1e-7 {
                pinned = false;
                break;
            }
        }
        self.lp.pop(mark).expect("own mark");
        pinned
    }

    fn cut(&self, bound: f64) -> bool {
        let Some(best) = &self.best else { return false };
        if bound < best.weight - WEIGHT_TOL {
            return true;
        }
        bound <= best.weight + WEIGHT_TOL && !may_precede(&self.path, &best.path)
    }

    fn leaf(&mut self, weight: f64) {
        let better = match &self.best {
            None => true,
            Some(b) => {
                weight > b.weight + WEIGHT_TOL || (weight >= b.weight - WEIGHT_TOL && self.path < b.path)
            }
        };
        if better {
            self.best = Some(Incumbent {
                weight,
                path: self.path.clone(),
                atoms: self.committed.clone(),
                choices: self.choices.clone(),
            });
        }
        if self.first_leaf_only {
            self.done = true;
        }
    }
}

/// Whether some completion of `prefix` can be lexicographically smaller than `path`.
fn may_precede(prefix: &[usize], path: &[usize]) -> bool {
    for (a, b) in prefix.iter().zip(path) {
        if a != b {
            return a < b;
        }
    }
    prefix.len() <= path.len()
}

/// Concrete coordinates for a fixed set of atoms: least total deviation
/// from preferred sizes, then pulled toward the top-left.
pub fn realize(problem: &LayoutProblem, atoms: &[Atom]) -> BTreeMap<VarId, f64> {
    let mut lp = Tableau::new();
    let mut vars: Vec<VarId> = problem.variables().collect();
    vars.sort();
    for v in &vars {
        lp.structural(v);
    }
    let mut keyed: Vec<(String, &Atom)> = atoms.iter().map(|a| (a.to_string(), a)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.0 == b.0);
    let sorted: Vec<Atom> = keyed.into_iter().map(|(_, a)| a.clone()).collect();
    lp.push(&sorted);
    if !lp.feasible() {
        log::warn!("skeleton infeasible when realizing; returning raw witness");
        return lp.assignment();
    }
    let mut deviation = Vec::new();
    for w in &problem.widgets {
        for (attr, pref) in [(Attr::Width, w.pref.w), (Attr::Height, w.pref.h)] {
            let size = lp.structural(&w.var(attr));
            let (over, under) = (lp.fresh_col(), lp.fresh_col());
            let atoms = [
                lp.prepare_terms(vec![(over, 1.0)], 0.0, Rel::Ge),
                lp.prepare_terms(vec![(under, 1.0)], 0.0, Rel::Ge),
                lp.prepare_terms(vec![(size, 1.0), (over, -1.0), (under, 1.0)], -pref, Rel::Eq),
            ];
            lp.push_prepared(&atoms);
            deviation.push((over, 1.0));
            deviation.push((under, 1.0));
        }
    }
    if lp.optimize_cols(&deviation, Direction::Min) == Ok(LpStatus::Optimal) {
        let best: f64 = deviation.iter().map(|&(c, _)| lp.value(c)).sum();
        let cap = lp.prepare_terms(deviation.clone(), -(best + 1e-7), Rel::Le);
        lp.push_prepared(&[cap]);
        let gravity: Vec<(Col, f64)> = vars
            .iter()
            .filter(|v| matches!(v.attr, Attr::Left | Attr::Top))
            .map(|v| (lp.structural(v), 1.0))
            .collect();
        let _ = lp.optimize_cols(&gravity, Direction::Min);
    }
    vars.iter()
        .map(|v| {
            let x = lp.value(lp.col_of(v).expect("registered"));
            let r = x.round();
            let x = if (x - r).abs() < 1e-9 { r } else { x };
            (v.clone(), if x == 0.0 { 0.0 } else { x })
        })
        .collect()
}
