use std::time::Duration;

use orc_core::lang::{self, Diagnostic, Document, Lowered, Span};
use orc_core::{
    apply_edits, diff_batch, resolve_incremental, solve, solve_with, LayoutProblem, Solution,
    SolveError, SolveOptions, Viewport, WarmStart,
};

use crate::edit::Edit;

/// One editing session. `lowered` and `solution` always describe `doc`.
#[derive(Clone, Debug)]
pub struct Session {
    pub doc: Document,
    pub revision: u64,
    pub lowered: Lowered,
    pub solution: Option<Solution>,
    pub conflicts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EditError {
    Invalid(String),
    Conflicts(Vec<String>),
}

fn start() -> Span {
    Span {
        line: 1,
        column: 1,
        len: 0,
    }
}

/// Parses canonical text so spans refer to what `GET /spec` returns.
fn canonical(doc: &Document) -> Result<Document, Vec<Diagnostic>> {
    lang::parse(&lang::print(doc))
}

fn outcome(r: Result<Solution, SolveError>) -> Result<(Option<Solution>, Vec<String>), String> {
    match r {
        Ok(s) => Ok((Some(s), Vec::new())),
        Err(SolveError::HardInfeasible(labels)) => Ok((None, labels)),
        Err(e) => Err(e.to_string()),
    }
}

impl Session {
    pub fn create(spec: &str, budget: Duration) -> Result<Session, Vec<Diagnostic>> {
        let doc = lang::parse(spec)?;
        let doc = canonical(&doc)?;
        let lowered = lang::lower(&doc, None).map_err(|e| vec![e.diagnostic()])?;
        let (solution, conflicts) = outcome(solve(&lowered.problem, Some(budget)))
            .map_err(|m| vec![Diagnostic::new(m, start())])?;
        Ok(Session {
            doc,
            revision: 0,
            lowered,
            solution,
            conflicts,
        })
    }

    pub fn spec(&self) -> String {
        lang::print(&self.doc)
    }

    pub fn viewport(&self) -> Viewport {
        self.lowered.problem.viewport
    }

    /// Applies `edit` and re-solves; on any error the session is untouched.
    pub fn apply(&mut self, edit: &Edit, budget: Duration) -> Result<(), EditError> {
        let doc = edit.apply(&self.doc).map_err(EditError::Invalid)?;
        let doc = canonical(&doc).map_err(|d| EditError::Invalid(d[0].message.clone()))?;
        let lowered = lang::lower(&doc, None).map_err(|e| EditError::Invalid(e.to_string()))?;
        let result = match &self.solution {
            Some(prev) => warm_solve(&self.lowered.problem, prev, &lowered.problem, budget),
            None => solve(&lowered.problem, Some(budget)),
        };
        match outcome(result).map_err(EditError::Invalid)? {
            (Some(s), _) => {
                self.doc = doc;
                self.lowered = lowered;
                self.solution = Some(s);
                self.conflicts.clear();
                self.revision += 1;
                Ok(())
            }
            (None, labels) => Err(EditError::Conflicts(labels)),
        }
    }

    /// Solves a copy of the document at another viewport.
    pub fn what_if(
        &self,
        viewport: Viewport,
        budget: Duration,
    ) -> Result<(LayoutProblem, Result<Solution, Vec<String>>), String> {
        let lowered = lang::lower(&self.doc, Some(viewport)).map_err(|e| e.to_string())?;
        let r = match outcome(solve(&lowered.problem, Some(budget)))? {
            (Some(s), _) => Ok(s),
            (None, labels) => Err(labels),
        };
        Ok((lowered.problem, r))
    }
}

/// Re-solves `new` from the previous solution, through an edit batch when
/// the batch reproduces `new` exactly.
fn warm_solve(
    old: &LayoutProblem,
    prev: &Solution,
    new: &LayoutProblem,
    budget: Duration,
) -> Result<Solution, SolveError> {
    let batch = diff_batch(old, new);
    if apply_edits(old, &batch).as_ref() == Ok(new) {
        return resolve_incremental(old, prev, &batch, Some(budget)).map(|(_, s)| s);
    }
    log::debug!("edit batch does not reproduce the lowered document; warm solving directly");
    let opts = SolveOptions {
        budget: Some(budget),
        warm: Some(WarmStart::from_solution(prev)),
        record_pruned: false,
    };
    solve_with(new, &opts).map(|(s, _)| s)
}
