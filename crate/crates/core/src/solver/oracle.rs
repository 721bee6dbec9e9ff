//! Exhaustive reference solver. Enumerates every choice path in declaration
//! order and keeps the first path of maximum weight; only LP infeasibility
//! stops a path early.

use std::collections::BTreeMap;
use std::time::Instant;

use super::{clause_formula, realize, reported_or, SolveError, WEIGHT_TOL};
use crate::lp::Tableau;
use crate::model::{Atom, Formula, LayoutProblem, Solution, Strength};

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_branches: usize,
    pub max_soft: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_branches: 20, max_soft: 16 }
    }
}

/// One feasible complete path: its weight and choice sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub weight: f64,
    pub path: Vec<usize>,
}

pub fn brute_force_solve(problem: &LayoutProblem) -> Result<Solution, SolveError> {
    brute_force_solve_with_limits(problem, OracleLimits::default())
}

pub fn brute_force_solve_with_limits(problem: &LayoutProblem, limits: OracleLimits) -> Result<Solution, SolveError> {
    let start = Instant::now();
    problem.validate()?;
    guard(problem, limits)?;
    let mut e = Enumerator::new(problem);
    e.run();
    let Some(best) = e.best else {
        return Err(SolveError::HardInfeasible(Vec::new()));
    };
    Ok(Solution {
        assignment: realize(problem, &best.atoms),
        satisfied_weight: best.weight,
        total_soft_weight: problem.total_soft_weight(),
        branch_choices: best.choices,
        optimal: true,
        solve_time: start.elapsed(),
    })
}

/// Every feasible leaf, in enumeration order.
pub fn brute_force_leaves(problem: &LayoutProblem, limits: OracleLimits) -> Result<Vec<Leaf>, SolveError> {
    guard(problem, limits)?;
    let mut e = Enumerator::new(problem);
    e.keep_leaves = true;
    e.run();
    Ok(e.leaves)
}

fn guard(problem: &LayoutProblem, limits: OracleLimits) -> Result<(), SolveError> {
    fn branches(f: &Formula) -> usize {
        match f {
            Formula::Atom(_) => 0,
            Formula::And(ch) => ch.iter().map(branches).sum(),
            Formula::Or(ch) => ch.len() + ch.iter().map(branches).sum::<usize>(),
            Formula::Not(c) | Formula::Weighted(_, c) => branches(c),
        }
    }
    let soft = problem.clauses.iter().filter(|c| !c.strength.is_hard()).count();
    let total: usize = problem
        .clauses
        .iter()
        .map(|c| branches(&crate::model::nnf(&c.formula, problem.epsilon)))
        .sum();
    if total > limits.max_branches || soft > limits.max_soft {
        return Err(SolveError::TooLargeForOracle(format!("{total} branches, {soft} soft clauses")));
    }
    Ok(())
}

struct Best {
    weight: f64,
    atoms: Vec<Atom>,
    choices: BTreeMap<String, usize>,
}

struct Enumerator<'a> {
    clauses: Vec<(&'a str, Formula, Strength)>,
    lp: Tableau,
    best: Option<Best>,
    keep_leaves: bool,
    leaves: Vec<Leaf>,
}

struct State {
    weight: f64,
    atoms: Vec<Atom>,
    path: Vec<usize>,
    choices: BTreeMap<String, usize>,
}

impl<'a> Enumerator<'a> {
    fn new(problem: &'a LayoutProblem) -> Self {
        let clauses = problem
            .clauses
            .iter()
            .map(|c| (c.label.as_str(), clause_formula(c, problem.epsilon), c.strength))
            .collect();
        let mut lp = Tableau::new();
        for v in problem.variables() {
            lp.structural(&v);
        }
        Enumerator { clauses, lp, best: None, keep_leaves: false, leaves: Vec::new() }
    }

    fn run(&mut self) {
        let clauses = std::mem::take(&mut self.clauses);
        let reported: Vec<(*const Formula, &str)> = clauses
            .iter()
            .filter_map(|(label, f, s)| reported_or(*s, f).map(|or| (or as *const Formula, *label)))
            .collect();
        let work: Vec<&Formula> = clauses.iter().rev().map(|(_, f, _)| f).collect();
        let mut st = State { weight: 0.0, atoms: Vec::new(), path: Vec::new(), choices: BTreeMap::new() };
        self.expand(work, &mut st, &reported);
    }

    fn expand(&mut self, mut work: Vec<&Formula>, st: &mut State, reported: &[(*const Formula, &str)]) {
        let mut added = 0usize;
        let mut gained = 0.0;
        let choice = loop {
            match work.pop() {
                None => break None,
                Some(f) => match f {
                    Formula::Atom(a) => {
                        st.atoms.push(a.clone());
                        added += 1;
                    }
                    Formula::And(ch) => work.extend(ch.iter().rev()),
                    Formula::Weighted(w, c) => {
                        gained += w;
                        work.push(c);
                    }
                    Formula::Or(ch) => break Some((f, ch)),
                    Formula::Not(_) => unreachable!("negation normal form"),
                },
            }
        };
        st.weight += gained;
        let mark = self.lp.push(&st.atoms[st.atoms.len() - added..]);
        if self.lp.feasible() {
            match choice {
                None => self.leaf(st),
                Some((node, ch)) => {
                    let label = reported.iter().find(|(p, _)| std::ptr::eq(*p, node)).map(|(_, l)| *l);
                    for (i, d) in ch.iter().enumerate() {
                        let mut next = work.clone();
                        next.push(d);
                        st.path.push(i);
                        if let Some(l) = label {
                            st.choices.insert(l.to_string(), i);
                        }
                        self.expand(next, st, reported);
                        st.path.pop();
                        if let Some(l) = label {
                            st.choices.remove(l);
                        }
                    }
                }
            }
        }
        self.lp.pop(mark).expect("own mark");
        st.weight -= gained;
        st.atoms.truncate(st.atoms.len() - added);
    }

    fn leaf(&mut self, st: &State) {
        if self.keep_leaves {
            self.leaves.push(Leaf { weight: st.weight, path: st.path.clone() });
        }
        if self.best.as_ref().is_none_or(|b| st.weight > b.weight + WEIGHT_TOL) {
            self.best = Some(Best { weight: st.weight, atoms: st.atoms.clone(), choices: st.choices.clone() });
        }
    }
}
