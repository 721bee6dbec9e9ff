//! Layout variables, linear expressions, Boolean formulas over linear atoms,
//! and the assembled [`LayoutProblem`] handed to the solver.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when evaluating atoms against a concrete assignment.
pub const EVAL_TOLERANCE: f64 = 1e-6;

/// Default margin used to turn negated non-strict atoms into strict ones.
pub const DEFAULT_EPSILON: f64 = 1.0;

/// Default weight of the per-widget preferred-size soft clauses.
pub const PREF_WEIGHT: f64 = 1.0;

const COEFF_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate clause label `{0}`")]
    DuplicateLabel(String),
    #[error("duplicate widget id `{0}`")]
    DuplicateWidgetId(String),
    #[error("widget `{0}` violates 0 <= min <= pref <= max")]
    BadSizeOrdering(String),
    #[error("clause `{label}` references unknown variable {var}")]
    UnknownVariable { label: String, var: VarId },
    #[error("variable {0} is not bound in the assignment")]
    UnboundVariable(VarId),
    #[error("soft clause `{0}` must have a positive finite weight")]
    NonPositiveWeight(String),
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attr {
    Left,
    Top,
    Width,
    Height,
}

impl Attr {
    pub const ALL: [Attr; 4] = [Attr::Left, Attr::Top, Attr::Width, Attr::Height];

    pub fn name(self) -> &'static str {
        match self {
            Attr::Left => "left",
            Attr::Top => "top",
            Attr::Width => "width",
            Attr::Height => "height",
        }
    }

    /// Swaps the horizontal and vertical axes.
    pub fn transposed(self) -> Attr {
        match self {
            Attr::Left => Attr::Top,
            Attr::Top => Attr::Left,
            Attr::Width => Attr::Height,
            Attr::Height => Attr::Width,
        }
    }
}

/// One stored layout variable: a widget attribute.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    pub widget: String,
    pub attr: Attr,
}

impl VarId {
    pub fn new(widget: impl Into<String>, attr: Attr) -> Self {
        VarId { widget: widget.into(), attr }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.widget, self.attr.name())
    }
}

/// `Σ coeff·var + constant`, in pixels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        LinExpr::term(v, 1.0)
    }

    pub fn term(v: VarId, coeff: f64) -> Self {
        let mut e = LinExpr::zero();
        e.add_term(v, coeff);
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VarId, f64)> + '_ {
        self.terms.iter().map(|(v, c)| (v, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, v: VarId, coeff: f64) {
        match self.terms.get_mut(&v) {
            Some(c) => {
                *c += coeff;
                if c.abs() < COEFF_EPS {
                    self.terms.remove(&v);
                }
            }
            None if coeff.abs() >= COEFF_EPS => {
                self.terms.insert(v, coeff);
            }
            None => {}
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn scaled(&self, k: f64) -> LinExpr {
        if k.abs() < COEFF_EPS {
            return LinExpr::constant(0.0);
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarId> + '_ {
        self.terms.keys()
    }

    pub fn eval(&self, assignment: &BTreeMap<VarId, f64>) -> Result<f64, ModelError> {
        let mut total = self.constant;
        for (v, c) in &self.terms {
            let x = assignment.get(v).ok_or_else(|| ModelError::UnboundVariable(v.clone()))?;
            total += c * x;
        }
        Ok(total)
    }

    /// Renames every variable through `f`.
    pub fn map_vars(&self, f: impl Fn(&VarId) -> VarId) -> LinExpr {
        let mut out = LinExpr::constant(self.constant);
        for (v, c) in &self.terms {
            out.add_term(f(v), *c);
        }
        out
    }

    pub fn equal_to(&self, rhs: impl Into<LinExpr>) -> Atom {
        Atom::new(self.clone() - rhs.into(), Rel::Eq)
    }

    pub fn at_most(&self, rhs: impl Into<LinExpr>) -> Atom {
        Atom::new(self.clone() - rhs.into(), Rel::Le)
    }

    pub fn at_least(&self, rhs: impl Into<LinExpr>) -> Atom {
        Atom::new(self.clone() - rhs.into(), Rel::Ge)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

impl From<&LinExpr> for LinExpr {
    fn from(e: &LinExpr) -> Self {
        e.clone()
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (v, c) in rhs.terms {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: f64) -> LinExpr {
        self.constant += rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + rhs.scaled(-1.0)
    }
}

impl Sub<f64> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: f64) -> LinExpr {
        self.constant -= rhs;
        self
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: f64) -> LinExpr {
        self.scaled(k)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if (mag - 1.0).abs() < COEFF_EPS {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0.0 {
            let (sign, mag) = if self.constant < 0.0 { ("-", -self.constant) } else { ("+", self.constant) };
            write!(f, " {sign} {mag}")
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        }
    }
}

/// `expr ⋈ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl Atom {
    pub fn new(expr: LinExpr, rel: Rel) -> Self {
        Atom { expr, rel }
    }

    pub fn holds_for(&self, value: f64, tol: f64) -> bool {
        match self.rel {
            Rel::Eq => value.abs() <= tol,
            Rel::Le => value <= tol,
            Rel::Ge => value >= -tol,
        }
    }

    pub fn eval(&self, assignment: &BTreeMap<VarId, f64>) -> Result<bool, ModelError> {
        Ok(self.holds_for(self.expr.eval(assignment)?, EVAL_TOLERANCE))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.expr, self.rel.symbol())
    }
}

/// Boolean combination of atoms.
///
/// `Weighted(w, f)` holds exactly when `f` holds; when the solver selects a
/// path through it (for example as the chosen disjunct of an `Or`), `w` is
/// credited to the objective. It is how individual parts of an OR-constraint
/// carry their own preference weight.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Weighted(f64, Box<Formula>),
}

impl Formula {
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::And(parts.into_iter().collect())
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Or(parts.into_iter().collect())
    }

    pub fn all(atoms: impl IntoIterator<Item = Atom>) -> Formula {
        Formula::And(atoms.into_iter().map(Formula::Atom).collect())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn weighted(w: f64, f: Formula) -> Formula {
        Formula::Weighted(w, Box::new(f))
    }

    /// Visits every atom in declaration order.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::And(ch) | Formula::Or(ch) => ch.iter().for_each(|c| c.for_each_atom(f)),
            Formula::Not(c) | Formula::Weighted(_, c) => c.for_each_atom(f),
        }
    }

    pub fn map_vars(&self, m: &impl Fn(&VarId) -> VarId) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom::new(a.expr.map_vars(m), a.rel)),
            Formula::And(ch) => Formula::And(ch.iter().map(|c| c.map_vars(m)).collect()),
            Formula::Or(ch) => Formula::Or(ch.iter().map(|c| c.map_vars(m)).collect()),
            Formula::Not(c) => Formula::not(c.map_vars(m)),
            Formula::Weighted(w, c) => Formula::weighted(*w, c.map_vars(m)),
        }
    }

    pub fn atom_count(&self) -> usize {
        let mut n = 0;
        self.for_each_atom(&mut |_| n += 1);
        n
    }
}

impl From<Atom> for Formula {
    fn from(a: Atom) -> Self {
        Formula::Atom(a)
    }
}

/// Negation of a non-strict atom, with strictness realized by an `epsilon` margin.
pub fn negate_atom(a: &Atom, epsilon: f64) -> Formula {
    debug_assert!(epsilon > 0.0);
    match a.rel {
        Rel::Le => Formula::Atom(Atom::new(a.expr.clone() - epsilon, Rel::Ge)),
        Rel::Ge => Formula::Atom(Atom::new(a.expr.clone() + epsilon, Rel::Le)),
        Rel::Eq => Formula::Or(vec![
            Formula::Atom(Atom::new(a.expr.clone() + epsilon, Rel::Le)),
            Formula::Atom(Atom::new(a.expr.clone() - epsilon, Rel::Ge)),
        ]),
    }
}

/// Negation normal form: pushes `Not` down to atoms and flattens nested
/// connectives of the same kind.
pub fn nnf(f: &Formula, epsilon: f64) -> Formula {
    to_nnf(f, false, epsilon)
}

fn to_nnf(f: &Formula, negated: bool, eps: f64) -> Formula {
    match (f, negated) {
        (Formula::Atom(a), false) => Formula::Atom(a.clone()),
        (Formula::Atom(a), true) => negate_atom(a, eps),
        (Formula::Not(inner), n) => to_nnf(inner, !n, eps),
        // a negated preference carries no reward
        (Formula::Weighted(_, inner), true) => to_nnf(inner, true, eps),
        (Formula::Weighted(w, inner), false) => Formula::weighted(*w, to_nnf(inner, false, eps)),
        (Formula::And(ch), false) | (Formula::Or(ch), true) => {
            flatten(ch.iter().map(|c| to_nnf(c, negated, eps)), true)
        }
        (Formula::Or(ch), false) | (Formula::And(ch), true) => {
            flatten(ch.iter().map(|c| to_nnf(c, negated, eps)), false)
        }
    }
}

fn flatten(children: impl Iterator<Item = Formula>, conj: bool) -> Formula {
    let mut out = Vec::new();
    for c in children {
        match c {
            Formula::And(inner) if conj => out.extend(inner),
            Formula::Or(inner) if !conj => out.extend(inner),
            other => out.push(other),
        }
    }
    if conj {
        Formula::And(out)
    } else {
        Formula::Or(out)
    }
}

pub fn eval_formula(f: &Formula, assignment: &BTreeMap<VarId, f64>) -> Result<bool, ModelError> {
    Ok(match f {
        Formula::Atom(a) => a.eval(assignment)?,
        Formula::And(ch) => {
            let mut all = true;
            for c in ch {
                all &= eval_formula(c, assignment)?;
            }
            all
        }
        Formula::Or(ch) => {
            let mut any = false;
            for c in ch {
                any |= eval_formula(c, assignment)?;
            }
            any
        }
        Formula::Not(c) => !eval_formula(c, assignment)?,
        Formula::Weighted(_, c) => eval_formula(c, assignment)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strength {
    Hard,
    Soft(f64),
}

impl Strength {
    pub fn is_hard(self) -> bool {
        matches!(self, Strength::Hard)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub formula: Formula,
    pub strength: Strength,
    pub label: String,
}

impl Clause {
    pub fn hard(label: impl Into<String>, formula: impl Into<Formula>) -> Self {
        Clause { formula: formula.into(), strength: Strength::Hard, label: label.into() }
    }

    pub fn soft(label: impl Into<String>, weight: f64, formula: impl Into<Formula>) -> Self {
        Clause { formula: formula.into(), strength: Strength::Soft(weight), label: label.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub w: f64,
    pub h: f64,
}

impl Size {
    pub const ZERO: Size = Size { w: 0.0, h: 0.0 };

    pub fn new(w: f64, h: f64) -> Self {
        Size { w, h }
    }

    pub fn unbounded() -> Self {
        Size { w: f64::INFINITY, h: f64::INFINITY }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    High,
    #[default]
    Medium,
    Low,
}

impl Priority {
    pub fn name(self) -> &'static str {
        match self {
            Priority::High => "high",
            Priority::Medium => "medium",
            Priority::Low => "low",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Widget {
    pub id: String,
    pub min: Size,
    pub pref: Size,
    pub max: Size,
    pub kind: String,
    pub priority: Priority,
    /// May shrink to zero size regardless of `min` (optional and alternative widgets).
    pub collapsible: bool,
}

impl Widget {
    pub fn new(id: impl Into<String>, min: Size, pref: Size, max: Size) -> Self {
        Widget {
            id: id.into(),
            min,
            pref,
            max,
            kind: "widget".to_string(),
            priority: Priority::default(),
            collapsible: false,
        }
    }

    /// A widget whose size is pinned to `w × h`.
    pub fn fixed(id: impl Into<String>, w: f64, h: f64) -> Self {
        let s = Size::new(w, h);
        Widget::new(id, s, s, s)
    }

    /// A widget that prefers `w × h` but may take any size from zero upwards.
    pub fn flexible(id: impl Into<String>, w: f64, h: f64) -> Self {
        Widget::new(id, Size::ZERO, Size::new(w, h), Size::unbounded())
    }

    pub fn with_kind(mut self, kind: impl Into<String>) -> Self {
        self.kind = kind.into();
        self
    }

    pub fn with_priority(mut self, p: Priority) -> Self {
        self.priority = p;
        self
    }

    pub fn var(&self, attr: Attr) -> VarId {
        VarId::new(self.id.clone(), attr)
    }

    pub fn rect(&self) -> RectExpr {
        RectExpr::of_widget(&self.id)
    }

    fn sizes_ordered(&self) -> bool {
        let ok = |lo: f64, mid: f64, hi: f64| lo >= 0.0 && lo <= mid && mid <= hi && lo.is_finite() && mid.is_finite();
        ok(self.min.w, self.pref.w, self.max.w) && ok(self.min.h, self.pref.h, self.max.h)
    }
}

/// A rectangle whose edges are linear expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct RectExpr {
    pub left: LinExpr,
    pub top: LinExpr,
    pub width: LinExpr,
    pub height: LinExpr,
}

impl RectExpr {
    pub fn of_widget(id: &str) -> Self {
        RectExpr {
            left: LinExpr::var(VarId::new(id, Attr::Left)),
            top: LinExpr::var(VarId::new(id, Attr::Top)),
            width: LinExpr::var(VarId::new(id, Attr::Width)),
            height: LinExpr::var(VarId::new(id, Attr::Height)),
        }
    }

    pub fn constant(left: f64, top: f64, width: f64, height: f64) -> Self {
        RectExpr {
            left: left.into(),
            top: top.into(),
            width: width.into(),
            height: height.into(),
        }
    }

    pub fn right(&self) -> LinExpr {
        self.left.clone() + self.width.clone()
    }

    pub fn bottom(&self) -> LinExpr {
        self.top.clone() + self.height.clone()
    }

    pub fn transposed(&self) -> RectExpr {
        RectExpr {
            left: self.top.clone(),
            top: self.left.clone(),
            width: self.height.clone(),
            height: self.width.clone(),
        }
    }

    /// `(left, top, width, height)` when every edge is a constant.
    pub fn as_constant(&self) -> Option<(f64, f64, f64, f64)> {
        let c = |e: &LinExpr| e.is_constant().then(|| e.constant_part());
        Some((c(&self.left)?, c(&self.top)?, c(&self.width)?, c(&self.height)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
}

impl Viewport {
    pub fn new(width: f64, height: f64) -> Self {
        Viewport { width, height }
    }

    pub fn rect(&self) -> RectExpr {
        RectExpr::constant(0.0, 0.0, self.width, self.height)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutProblem {
    pub widgets: Vec<Widget>,
    pub viewport: Viewport,
    pub clauses: Vec<Clause>,
    pub epsilon: f64,
}

pub fn box_label(widget: &str) -> String {
    format!("{widget}.box")
}

pub fn pref_labels(widget: &str) -> [String; 2] {
    [format!("{widget}.pref.width"), format!("{widget}.pref.height")]
}

/// Hard box constraint of a widget: `0 ≤ position`, inside the viewport,
/// `min ≤ size ≤ max` (or zero size when collapsible).
pub fn box_clause(w: &Widget, viewport: Viewport) -> Clause {
    let r = w.rect();
    let mut parts = vec![
        Formula::Atom(r.left.at_least(0.0)),
        Formula::Atom(r.top.at_least(0.0)),
        Formula::Atom(r.right().at_most(viewport.width)),
        Formula::Atom(r.bottom().at_most(viewport.height)),
    ];
    let lower = Formula::all([r.width.at_least(w.min.w), r.height.at_least(w.min.h)]);
    let lower = if w.collapsible && (w.min.w > 0.0 || w.min.h > 0.0) {
        Formula::or([lower, Formula::all([r.width.equal_to(0.0), r.height.equal_to(0.0)])])
    } else {
        lower
    };
    match lower {
        Formula::And(atoms) => parts.extend(atoms),
        other => parts.push(other),
    }
    if w.max.w.is_finite() {
        parts.push(Formula::Atom(r.width.at_most(w.max.w)));
    }
    if w.max.h.is_finite() {
        parts.push(Formula::Atom(r.height.at_most(w.max.h)));
    }
    Clause::hard(box_label(&w.id), Formula::And(parts))
}

pub fn pref_clauses(w: &Widget) -> [Clause; 2] {
    let [lw, lh] = pref_labels(&w.id);
    [
        Clause::soft(lw, PREF_WEIGHT, w.rect().width.equal_to(w.pref.w)),
        Clause::soft(lh, PREF_WEIGHT, w.rect().height.equal_to(w.pref.h)),
    ]
}

/// Widgets whose automatic preferred-size clauses are replaced by a pattern.
#[derive(Clone, Debug, Default)]
pub struct AssemblyOptions {
    pub suppress_pref: BTreeSet<String>,
    pub epsilon: Option<f64>,
}

impl LayoutProblem {
    /// Builds a problem, prepending each widget's box clause and preferred-size soft clauses.
    pub fn assemble(widgets: Vec<Widget>, viewport: Viewport, clauses: Vec<Clause>) -> Result<Self, ModelError> {
        Self::assemble_with(widgets, viewport, clauses, &AssemblyOptions::default())
    }

    pub fn assemble_with(
        widgets: Vec<Widget>,
        viewport: Viewport,
        clauses: Vec<Clause>,
        opts: &AssemblyOptions,
    ) -> Result<Self, ModelError> {
        let mut all = Vec::with_capacity(clauses.len() + 3 * widgets.len());
        for w in &widgets {
            all.push(box_clause(w, viewport));
            if !opts.suppress_pref.contains(&w.id) {
                all.extend(pref_clauses(w));
            }
        }
        all.extend(clauses);
        Self::raw(widgets, viewport, all, opts.epsilon.unwrap_or(DEFAULT_EPSILON))
    }

    /// Builds a problem from exactly the given clauses, without automatic ones.
    pub fn raw(widgets: Vec<Widget>, viewport: Viewport, clauses: Vec<Clause>, epsilon: f64) -> Result<Self, ModelError> {
        let p = LayoutProblem { widgets, viewport, clauses, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ModelError::BadEpsilon(self.epsilon));
        }
        let mut ids = HashSet::new();
        for w in &self.widgets {
            if !ids.insert(w.id.as_str()) {
                return Err(ModelError::DuplicateWidgetId(w.id.clone()));
            }
            if !w.sizes_ordered() {
                return Err(ModelError::BadSizeOrdering(w.id.clone()));
            }
        }
        let mut labels = HashSet::new();
        for c in &self.clauses {
            if !labels.insert(c.label.as_str()) {
                return Err(ModelError::DuplicateLabel(c.label.clone()));
            }
            if let Strength::Soft(w) = c.strength {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(ModelError::NonPositiveWeight(c.label.clone()));
                }
            }
            let mut missing = None;
            c.formula.for_each_atom(&mut |a| {
                if missing.is_none() {
                    missing = a.expr.vars().find(|v| !ids.contains(v.widget.as_str())).cloned();
                }
            });
            if let Some(var) = missing {
                return Err(ModelError::UnknownVariable { label: c.label.clone(), var });
            }
        }
        Ok(())
    }

    /// All stored variables, four per widget, in declaration order.
    pub fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        self.widgets.iter().flat_map(|w| Attr::ALL.into_iter().map(move |a| w.var(a)))
    }

    pub fn widget(&self, id: &str) -> Option<&Widget> {
        self.widgets.iter().find(|w| w.id == id)
    }

    pub fn clause(&self, label: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.label == label)
    }

    pub fn total_soft_weight(&self) -> f64 {
        self.clauses
            .iter()
            .map(|c| match c.strength {
                Strength::Soft(w) => w + max_reward(&c.formula),
                Strength::Hard => max_reward(&c.formula),
            })
            .sum()
    }

    /// Number of atoms across all clauses.
    pub fn atom_count(&self) -> usize {
        self.clauses.iter().map(|c| c.formula.atom_count()).sum()
    }
}

/// Largest weight the solver can collect from `Weighted` nodes inside `f`.
pub fn max_reward(f: &Formula) -> f64 {
    match f {
        Formula::Atom(_) | Formula::Not(_) => 0.0,
        Formula::And(ch) => ch.iter().map(max_reward).sum(),
        Formula::Or(ch) => ch.iter().map(max_reward).fold(0.0, f64::max),
        Formula::Weighted(w, c) => w + max_reward(c),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn is_visible(&self) -> bool {
        self.width > EVAL_TOLERANCE && self.height > EVAL_TOLERANCE
    }

    /// True when the open interiors intersect.
    pub fn overlaps(&self, other: &Rect) -> bool {
        let tol = EVAL_TOLERANCE;
        self.left < other.right() - tol
            && other.left < self.right() - tol
            && self.top < other.bottom() - tol
            && other.top < self.bottom() - tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub assignment: BTreeMap<VarId, f64>,
    pub satisfied_weight: f64,
    pub total_soft_weight: f64,
    /// Clause label → index of the selected top-level disjunct.
    pub branch_choices: BTreeMap<String, usize>,
    pub optimal: bool,
    pub solve_time: Duration,
}

impl Solution {
    pub fn rect(&self, widget: &str) -> Option<Rect> {
        let get = |a| self.assignment.get(&VarId::new(widget, a)).copied();
        Some(Rect {
            left: get(Attr::Left)?,
            top: get(Attr::Top)?,
            width: get(Attr::Width)?,
            height: get(Attr::Height)?,
        })
    }

    pub fn value(&self, widget: &str, attr: Attr) -> Option<f64> {
        self.assignment.get(&VarId::new(widget, attr)).copied()
    }

    pub fn empty(total_soft_weight: f64) -> Self {
        Solution {
            assignment: BTreeMap::new(),
            satisfied_weight: 0.0,
            total_soft_weight,
            branch_choices: BTreeMap::new(),
            optimal: true,
            solve_time: Duration::ZERO,
        }
    }
}
