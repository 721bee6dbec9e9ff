//! Serializable solution view shared by the CLI and the service.
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{LayoutProblem, Solution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidgetView {
    pub id: String,
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub visible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionView {
    pub optimal: bool,
    pub satisfied_weight: f64,
    pub widgets: Vec<WidgetView>,
    pub branch_choices: BTreeMap<String, usize>,
    pub solve_ms: f64,
}

impl SolutionView {
    /// Widgets appear in declaration order.
    pub fn new(problem: &LayoutProblem, s: &Solution) -> SolutionView {
        let widgets = problem
            .widgets
            .iter()
            .filter_map(|w| {
                let r = s.rect(&w.id)?;
                Some(WidgetView {
                    id: w.id.clone(),
                    left: r.left,
                    top: r.top,
                    width: r.width,
                    height: r.height,
                    visible: r.is_visible(),
                })
            })
            .collect();
        SolutionView {
            optimal: s.optimal,
            satisfied_weight: s.satisfied_weight,
            widgets,
            branch_choices: s.branch_choices.clone(),
            solve_ms: s.solve_time.as_secs_f64() * 1000.0,
        }
    }

    /// The view with timing zeroed, for comparing solves.
    pub fn untimed(&self) -> SolutionView {
        SolutionView { solve_ms: 0.0, ..self.clone() }
    }
}
