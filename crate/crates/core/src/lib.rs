//! ORC layout: constraint-based GUI layout with OR-constraints and a
//! weighted-max solver.

pub mod lang;
pub mod lp;
pub mod model;
pub mod patterns;
pub mod report;
pub mod solver;

pub use lp::{ContextMark, Direction, LpError, LpResult, LpStatus, Tableau};
pub use model::*;
pub use report::{SolutionView, WidgetView};
pub use patterns::{compile, Container, FixedRect, Pattern, PatternError, PatternInstance, Weights};
pub use solver::{
    apply_edits, brute_force_solve, diff_batch, explain_infeasible, resolve_incremental, resolve_warm, solve, solve_with, EditBatch, SolveError, SolveOptions,
    WarmStart, WidgetChange,
};
