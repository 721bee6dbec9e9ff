//! Incremental simplex over conjunctions of linear atoms.
//!
//! Every multi-variable linear form gets a slack column defined as that form;
//! atoms become bounds on a column. Rows of the dense tableau express basic
//! columns in terms of non-basic ones. Feasibility is restored by Bland-rule
//! pivoting on bound violations, optimization by bounded primal simplex from
//! a feasible point. `push`/`pop` only touch bounds, so the basis stays warm
//! across the solver's search tree.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::{Atom, LinExpr, Rel, VarId};

/// Bound violations up to this amount are accepted.
pub const FEAS_TOL: f64 = 1e-7;
const PIVOT_EPS: f64 = 1e-9;
const ZERO_EPS: f64 = 1e-11;
const PIVOT_CAP: u64 = 1_000_000;

pub type Col = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("optimize called on an infeasible context")]
    CalledOnInfeasibleContext,
    #[error("context mark is stale")]
    StaleMark,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContextMark {
    depth: usize,
    id: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Optimal,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub assignment: BTreeMap<VarId, f64>,
    pub value: Option<f64>,
}

/// An atom translated to tableau terms, ready to push repeatedly.
#[derive(Clone, Debug, PartialEq)]
pub enum Prepared {
    Const(bool),
    Bound { target: Target, rel: Rel, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Col(Col),
    Form(usize),
}

#[derive(Clone)]
struct Form {
    terms: Vec<(Col, f64)>,
    col: Option<Col>,
}

#[derive(Clone)]
struct Frame {
    id: u64,
    trail_len: usize,
    values: Vec<f64>,
    vars: usize,
    conflict: bool,
}

#[derive(Clone, Default)]
pub struct Tableau {
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    row_of: Vec<Option<usize>>,
    /// Slack columns carry their defining form over structural columns.
    definition: Vec<Option<usize>>,
    rows: Vec<Vec<f64>>,
    basic: Vec<Col>,
    forms: Vec<Form>,
    form_index: HashMap<Vec<(Col, i64)>, usize>,
    var_cols: HashMap<VarId, Col>,
    var_order: Vec<VarId>,
    col_vars: Vec<Option<VarId>>,
    trail: Vec<(Col, f64, f64)>,
    frames: Vec<Frame>,
    conflict: bool,
    next_id: u64,
    pivots: u64,
}

impl Tableau {
    pub fn new() -> Self {
        Tableau::default()
    }

    pub fn num_cols(&self) -> usize {
        self.value.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_count(&self) -> u64 {
        self.pivots
    }

    fn add_col(&mut self, var: Option<VarId>, definition: Option<usize>) -> Col {
        let c = self.value.len();
        self.lower.push(f64::NEG_INFINITY);
        self.upper.push(f64::INFINITY);
        self.value.push(0.0);
        self.row_of.push(None);
        self.definition.push(definition);
        self.col_vars.push(var);
        c
    }

    /// Column of a layout variable, created on first use.
    pub fn structural(&mut self, v: &VarId) -> Col {
        if let Some(&c) = self.var_cols.get(v) {
            return c;
        }
        let c = self.add_col(Some(v.clone()), None);
        self.var_cols.insert(v.clone(), c);
        self.var_order.push(v.clone());
        c
    }

    /// An auxiliary structural column not tied to any layout variable.
    pub fn fresh_col(&mut self) -> Col {
        self.add_col(None, None)
    }

    pub fn col_of(&self, v: &VarId) -> Option<Col> {
        self.var_cols.get(v).copied()
    }

    pub fn value(&self, c: Col) -> f64 {
        self.value[c]
    }

    pub fn bounds(&self, c: Col) -> (f64, f64) {
        (self.lower[c], self.upper[c])
    }

    pub fn prepare(&mut self, atom: &Atom) -> Prepared {
        let terms: Vec<(Col, f64)> = atom.expr.terms().map(|(v, c)| (self.structural(v), c)).collect();
        self.prepare_terms(terms, atom.expr.constant_part(), atom.rel)
    }

    /// `Σ coeff·col + constant ⋈ 0` over existing columns.
    pub fn prepare_terms(&mut self, mut terms: Vec<(Col, f64)>, constant: f64, rel: Rel) -> Prepared {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(Col, f64)> = Vec::with_capacity(terms.len());
        for (c, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += a,
                _ => merged.push((c, a)),
            }
        }
        merged.retain(|t| t.1.abs() > ZERO_EPS);
        if merged.is_empty() {
            let tol = 1e-9;
            let ok = match rel {
                Rel::Eq => constant.abs() <= tol,
                Rel::Le => constant <= tol,
                Rel::Ge => constant >= -tol,
            };
            return Prepared::Const(ok);
        }
        let lead = merged[0].1;
        let rel = if lead < 0.0 { flip(rel) } else { rel };
        let value = -constant / lead;
        if merged.len() == 1 {
            return Prepared::Bound { target: Target::Col(merged[0].0), rel, value };
        }
        let normalized: Vec<(Col, f64)> = merged.iter().map(|&(c, a)| (c, a / lead)).collect();
        let key: Vec<(Col, i64)> = normalized.iter().map(|&(c, a)| (c, (a * 1e9).round() as i64)).collect();
        let idx = match self.form_index.get(&key) {
            Some(&i) => i,
            None => {
                let i = self.forms.len();
                self.forms.push(Form { terms: normalized, col: None });
                self.form_index.insert(key, i);
                i
            }
        };
        Prepared::Bound { target: Target::Form(idx), rel, value }
    }

    fn target_col(&mut self, t: Target) -> Col {
        match t {
            Target::Col(c) => c,
            Target::Form(i) => match self.forms[i].col {
                Some(c) => c,
                None => self.materialize_form(i),
            },
        }
    }

    fn materialize_form(&mut self, i: usize) -> Col {
        let s = self.add_col(None, Some(i));
        self.forms[i].col = Some(s);
        let n = self.num_cols();
        let mut row = vec![0.0; n];
        let mut val = 0.0;
        for &(k, a) in &self.forms[i].terms {
            val += a * self.value[k];
            match self.row_of[k] {
                Some(rk) => {
                    for (j, x) in self.rows[rk].iter().enumerate() {
                        row[j] += a * x;
                    }
                }
                None => row[k] += a,
            }
        }
        clean(&mut row);
        self.value[s] = val;
        self.row_of[s] = Some(self.rows.len());
        self.rows.push(row);
        self.basic.push(s);
        s
    }

    pub fn push(&mut self, atoms: &[Atom]) -> ContextMark {
        let mark = self.open_frame();
        for a in atoms {
            let p = self.prepare(a);
            self.assert_prepared(&p);
        }
        mark
    }

    pub fn push_prepared(&mut self, atoms: &[Prepared]) -> ContextMark {
        let mark = self.open_frame();
        for a in atoms {
            self.assert_prepared(a);
        }
        mark
    }

    fn open_frame(&mut self) -> ContextMark {
        let id = self.next_id;
        self.next_id += 1;
        self.frames.push(Frame {
            id,
            trail_len: self.trail.len(),
            values: self.value.clone(),
            vars: self.var_order.len(),
            conflict: self.conflict,
        });
        ContextMark { depth: self.frames.len() - 1, id }
    }

    /// Adds one atom to the innermost open context.
    pub fn assert_prepared(&mut self, a: &Prepared) {
        match *a {
            Prepared::Const(true) => {}
            Prepared::Const(false) => self.conflict = true,
            Prepared::Bound { target, rel, value } => {
                let c = self.target_col(target);
                self.tighten(c, rel, value);
            }
        }
    }

    fn tighten(&mut self, c: Col, rel: Rel, v: f64) {
        let (lo, hi) = (self.lower[c], self.upper[c]);
        let new_lo = if matches!(rel, Rel::Ge | Rel::Eq) && v > lo { v } else { lo };
        let new_hi = if matches!(rel, Rel::Le | Rel::Eq) && v < hi { v } else { hi };
        if new_lo == lo && new_hi == hi {
            return;
        }
        self.trail.push((c, lo, hi));
        self.lower[c] = new_lo;
        self.upper[c] = new_hi;
        if self.row_of[c].is_none() && new_lo <= new_hi {
            let x = self.value[c];
            if x < new_lo {
                self.update(c, new_lo);
            } else if x > new_hi {
                self.update(c, new_hi);
            }
        }
    }

    pub fn pop(&mut self, mark: ContextMark) -> Result<(), LpError> {
        match self.frames.get(mark.depth) {
            Some(f) if f.id == mark.id => {}
            _ => return Err(LpError::StaleMark),
        }
        self.frames.truncate(mark.depth + 1);
        let frame = self.frames.pop().expect("frame present");
        while self.trail.len() > frame.trail_len {
            let (c, lo, hi) = self.trail.pop().expect("trail entry");
            self.lower[c] = lo;
            self.upper[c] = hi;
        }
        self.conflict = frame.conflict;
        // variables first seen inside the popped context are forgotten
        for v in self.var_order.drain(frame.vars..) {
            self.var_cols.remove(&v);
        }
        let saved = frame.values.len();
        self.value[..saved].copy_from_slice(&frame.values);
        for c in saved..self.num_cols() {
            if self.definition[c].is_none() {
                self.value[c] = 0.0;
            }
        }
        // slack values follow from their definitions, which every row respects
        for c in 0..self.num_cols() {
            if let Some(i) = self.definition[c] {
                self.value[c] = self.forms[i].terms.iter().map(|&(k, a)| a * self.value[k]).sum();
            }
        }
        for c in 0..self.num_cols() {
            if self.row_of[c].is_none() && self.lower[c] <= self.upper[c] {
                let x = self.value[c];
                if x < self.lower[c] {
                    self.update(c, self.lower[c]);
                } else if x > self.upper[c] {
                    self.update(c, self.upper[c]);
                }
            }
        }
        Ok(())
    }

    /// Moves a non-basic column to `v` when allowed by its bounds.
    pub fn hint(&mut self, c: Col, v: f64) {
        if self.row_of[c].is_none() && v >= self.lower[c] && v <= self.upper[c] {
            self.update(c, v);
        }
    }

    /// True when the current bounds already imply the atom.
    pub fn entails(&self, a: &Prepared) -> bool {
        match *a {
            Prepared::Const(ok) => ok,
            Prepared::Bound { target, rel, value } => {
                let c = match target {
                    Target::Col(c) => c,
                    Target::Form(i) => match self.forms[i].col {
                        Some(c) => c,
                        None => return false,
                    },
                };
                let tol = 1e-9 * (1.0 + value.abs());
                let lo_ok = self.lower[c] >= value - tol;
                let hi_ok = self.upper[c] <= value + tol;
                match rel {
                    Rel::Ge => lo_ok,
                    Rel::Le => hi_ok,
                    Rel::Eq => lo_ok && hi_ok,
                }
            }
        }
    }

    fn update(&mut self, j: Col, v: f64) {
        let delta = v - self.value[j];
        if delta != 0.0 {
            for (r, row) in self.rows.iter().enumerate() {
                if let Some(&a) = row.get(j) {
                    if a != 0.0 {
                        self.value[self.basic[r]] += a * delta;
                    }
                }
            }
        }
        self.value[j] = v;
    }

    fn coef(&self, r: usize, j: Col) -> f64 {
        self.rows[r].get(j).copied().unwrap_or(0.0)
    }

    fn pivot_and_update(&mut self, r: usize, j: Col, target: f64) {
        let b = self.basic[r];
        let a = self.coef(r, j);
        let theta = (target - self.value[b]) / a;
        self.value[b] = target;
        self.value[j] += theta;
        for (r2, row) in self.rows.iter().enumerate() {
            if r2 != r {
                if let Some(&c) = row.get(j) {
                    if c != 0.0 {
                        self.value[self.basic[r2]] += c * theta;
                    }
                }
            }
        }
        self.pivot(r, j);
    }

    fn pivot(&mut self, r: usize, j: Col) {
        self.pivots += 1;
        let n = self.num_cols();
        let b = self.basic[r];
        let mut row = std::mem::take(&mut self.rows[r]);
        row.resize(n, 0.0);
        let inv = 1.0 / row[j];
        for x in row.iter_mut() {
            *x *= -inv;
        }
        row[j] = 0.0;
        row[b] = inv;
        clean(&mut row);
        let nz: Vec<usize> = (0..n).filter(|&k| row[k] != 0.0).collect();
        for (r2, other) in self.rows.iter_mut().enumerate() {
            if r2 == r {
                continue;
            }
            let c = other.get(j).copied().unwrap_or(0.0);
            if c == 0.0 {
                continue;
            }
            if other.len() < n {
                other.resize(n, 0.0);
            }
            other[j] = 0.0;
            for &k in &nz {
                let x = other[k] + c * row[k];
                other[k] = if x.abs() < ZERO_EPS { 0.0 } else { x };
            }
        }
        self.rows[r] = row;
        self.basic[r] = j;
        self.row_of[j] = Some(r);
        self.row_of[b] = None;
    }

    fn bump_pivots(&self) {
        if self.pivots > PIVOT_CAP {
            panic!("simplex exceeded {PIVOT_CAP} pivots; internal error");
        }
    }

    /// Restores bound feasibility; returns whether the context is satisfiable.
    pub fn feasible(&mut self) -> bool {
        if self.conflict {
            return false;
        }
        if (0..self.num_cols()).any(|c| self.lower[c] > self.upper[c] + FEAS_TOL) {
            return false;
        }
        let start = self.pivots;
        loop {
            if self.pivots - start > PIVOT_CAP {
                self.bump_pivots();
                panic!("simplex exceeded {PIVOT_CAP} pivots; internal error");
            }
            let mut violated: Option<(Col, usize)> = None;
            for (r, &b) in self.basic.iter().enumerate() {
                let x = self.value[b];
                if (x < self.lower[b] - FEAS_TOL || x > self.upper[b] + FEAS_TOL)
                    && violated.is_none_or(|(vb, _)| b < vb)
                {
                    violated = Some((b, r));
                }
            }
            let Some((b, r)) = violated else { return true };
            let increase = self.value[b] < self.lower[b];
            let row = &self.rows[r];
            let mut entering = None;
            for (j, &a) in row.iter().enumerate() {
                if a.abs() <= PIVOT_EPS {
                    continue;
                }
                let x = self.value[j];
                let can_up = x < self.upper[j] - PIVOT_EPS;
                let can_down = x > self.lower[j] + PIVOT_EPS;
                let ok = if increase { (a > 0.0 && can_up) || (a < 0.0 && can_down) } else { (a < 0.0 && can_up) || (a > 0.0 && can_down) };
                if ok {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return false };
            let target = if increase { self.lower[b] } else { self.upper[b] };
            self.pivot_and_update(r, j, target);
        }
    }

    pub fn check(&mut self) -> LpResult {
        if self.feasible() {
            LpResult { status: LpStatus::Feasible, assignment: self.assignment(), value: None }
        } else {
            LpResult { status: LpStatus::Infeasible, assignment: BTreeMap::new(), value: None }
        }
    }

    /// Current values of every layout variable seen so far.
    pub fn assignment(&self) -> BTreeMap<VarId, f64> {
        self.var_cols.iter().map(|(v, &c)| (v.clone(), self.value[c])).collect()
    }

    pub fn optimize(&mut self, objective: &LinExpr, dir: Direction) -> Result<LpResult, LpError> {
        let obj: Vec<(Col, f64)> = objective.terms().map(|(v, c)| (self.structural(v), c)).collect();
        let status = self.optimize_cols(&obj, dir)?;
        let value = (status == LpStatus::Optimal)
            .then(|| objective.constant_part() + obj.iter().map(|&(c, a)| a * self.value[c]).sum::<f64>());
        Ok(LpResult { status, assignment: self.assignment(), value })
    }

    /// Bounded primal simplex with Bland's rule from the current feasible point.
    pub fn optimize_cols(&mut self, objective: &[(Col, f64)], dir: Direction) -> Result<LpStatus, LpError> {
        if !self.feasible() {
            return Err(LpError::CalledOnInfeasibleContext);
        }
        let n = self.num_cols();
        let sign = if dir == Direction::Max { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; n];
        for &(c, a) in objective {
            cost[c] += sign * a;
        }
        let start = self.pivots;
        loop {
            if self.pivots - start > PIVOT_CAP {
                panic!("simplex exceeded {PIVOT_CAP} pivots; internal error");
            }
            let mut reduced = cost.clone();
            for (r, row) in self.rows.iter().enumerate() {
                let cb = cost[self.basic[r]];
                if cb != 0.0 {
                    for (k, &a) in row.iter().enumerate() {
                        if a != 0.0 {
                            reduced[k] += cb * a;
                        }
                    }
                }
            }
            let mut entering = None;
            for j in 0..n {
                if self.row_of[j].is_some() {
                    continue;
                }
                let d = reduced[j];
                if d < -PIVOT_EPS && self.value[j] < self.upper[j] - PIVOT_EPS {
                    entering = Some((j, 1.0));
                    break;
                }
                if d > PIVOT_EPS && self.value[j] > self.lower[j] + PIVOT_EPS {
                    entering = Some((j, -1.0));
                    break;
                }
            }
            let Some((j, step)) = entering else { return Ok(LpStatus::Optimal) };
            let own = if step > 0.0 { self.upper[j] - self.value[j] } else { self.value[j] - self.lower[j] };
            let mut best_theta = own;
            let mut leaving: Option<(usize, f64)> = None;
            let mut leaving_col = usize::MAX;
            for r in 0..self.rows.len() {
                let a = self.coef(r, j) * step;
                if a.abs() <= PIVOT_EPS {
                    continue;
                }
                let b = self.basic[r];
                let (limit, bound) = if a > 0.0 {
                    (self.upper[b], self.upper[b])
                } else {
                    (self.lower[b], self.lower[b])
                };
                if !limit.is_finite() {
                    continue;
                }
                let theta = ((bound - self.value[b]) / a).max(0.0);
                let better = theta < best_theta - 1e-12
                    || (leaving.is_some() && (theta - best_theta).abs() <= 1e-12 && b < leaving_col);
                if better {
                    best_theta = theta;
                    leaving = Some((r, bound));
                    leaving_col = b;
                }
            }
            if !best_theta.is_finite() {
                return Ok(LpStatus::Unbounded);
            }
            match leaving {
                None => {
                    let target = if step > 0.0 { self.upper[j] } else { self.lower[j] };
                    self.update(j, target);
                }
                Some((r, bound)) => self.pivot_and_update(r, j, bound),
            }
        }
    }
}

fn flip(rel: Rel) -> Rel {
    match rel {
        Rel::Le => Rel::Ge,
        Rel::Ge => Rel::Le,
        Rel::Eq => Rel::Eq,
    }
}

fn clean(row: &mut [f64]) {
    for x in row.iter_mut() {
        if x.abs() < ZERO_EPS {
            *x = 0.0;
        }
    }
}
