//! Infeasibility explanation by deletion filtering over hard clauses.

use super::{hard_feasible, SolveError};
use crate::model::{Clause, LayoutProblem};

/// Labels of hard clauses whose conjunction is unsatisfiable.
///
/// Each hard clause is dropped in turn and kept out whenever the rest stays
/// infeasible, so the result is irreducible with respect to single deletions.
pub fn explain_infeasible(problem: &LayoutProblem) -> Result<Vec<String>, SolveError> {
    let mut core: Vec<Clause> = problem.clauses.iter().filter(|c| c.strength.is_hard()).cloned().collect();
    let with = |clauses: Vec<Clause>| LayoutProblem { clauses, ..problem.clone() };
    if hard_feasible(&with(core.clone())) {
        return Err(SolveError::CalledOnFeasibleProblem);
    }
    let mut i = 0;
    while i < core.len() {
        let mut trial = core.clone();
        trial.remove(i);
        if hard_feasible(&with(trial.clone())) {
            i += 1;
        } else {
            core = trial;
        }
    }
    Ok(core.into_iter().map(|c| c.label).collect())
}
