//! Layout pattern templates compiled to clauses over widget variables.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{
    negate_atom, AssemblyOptions, Atom, Clause, Formula, LayoutProblem, LinExpr, ModelError, Priority, RectExpr,
    Viewport, Widget,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("{0}: empty widget list")]
    EmptyWidgetList(String),
    #[error("{0}: empty child list")]
    EmptyChildList(String),
    #[error("{0}: needs at least two widgets")]
    FewerThanTwoWidgets(String),
    #[error("{0}: widget width must be positive")]
    ZeroWidgetWidth(String),
    #[error("{0}: needs at least two slots")]
    FewerThanTwoSlots(String),
    #[error("{0}: primary and fallback are the same widget")]
    SameWidget(String),
    #[error("{0}: fixed area is not strictly inside its container")]
    FixedOutsideContainer(String),
    #[error("unknown target widget `{0}`")]
    UnknownTargetWidget(String),
    #[error("label collision: {0}")]
    LabelCollision(String),
    #[error(transparent)]
    Model(ModelError),
}

/// Weight scale shared by the templates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub preferred_disjunct: f64,
    pub fallback_disjunct: f64,
    pub optional_medium_keep: f64,
    pub optional_medium_drop: f64,
    pub optional_low_keep: f64,
    pub optional_low_drop: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            preferred_disjunct: 2.0,
            fallback_disjunct: 1.0,
            optional_medium_keep: 8.0,
            optional_medium_drop: 1.0,
            optional_low_keep: 4.0,
            optional_low_drop: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Container {
    /// The viewport.
    Root,
    Widget(String),
    Rect(FixedRect),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedRect {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl FixedRect {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        FixedRect { left, top, width, height }
    }

    fn expr(&self) -> RectExpr {
        RectExpr::constant(self.left, self.top, self.width, self.height)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    FlowH { items: Vec<String>, container: Container },
    FlowV { items: Vec<String>, container: Container },
    FlowEither { items: Vec<String>, container: Container },
    RotationGroup { group: String, children: Vec<String> },
    Equalize { groups: Vec<Vec<String>> },
    Connected { items: Vec<String>, top: Container, left: Container, widget_width: f64 },
    Balanced { items: Vec<String>, container: Container },
    AltPositions { target: String, slots: Vec<FixedRect> },
    AltWidgets { primary: String, fallback: String },
    /// Without an explicit priority the widget's own priority applies.
    Optional { widget: String, priority: Option<Priority> },
    FlowAround { items: Vec<String>, fixed: FixedRect, container: Container },
}

impl Pattern {
    pub fn kind(&self) -> &'static str {
        match self {
            Pattern::FlowH { .. } => "flow_h",
            Pattern::FlowV { .. } => "flow_v",
            Pattern::FlowEither { .. } => "flow_either",
            Pattern::RotationGroup { .. } => "rotation_group",
            Pattern::Equalize { .. } => "cross_cut_equalize",
            Pattern::Connected { .. } => "connected_flow",
            Pattern::Balanced { .. } => "balanced_flow",
            Pattern::AltPositions { .. } => "alt_positions",
            Pattern::AltWidgets { .. } => "alt_widgets",
            Pattern::Optional { .. } => "optional_widget",
            Pattern::FlowAround { .. } => "flow_around_fixed",
        }
    }

    /// Widget ids the pattern refers to, in parameter order.
    pub fn targets(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        match self {
            Pattern::FlowH { items, container: c }
            | Pattern::FlowV { items, container: c }
            | Pattern::FlowEither { items, container: c }
            | Pattern::Balanced { items, container: c }
            | Pattern::FlowAround { items, container: c, .. } => {
                out.extend(items.iter().map(String::as_str));
                if let Container::Widget(w) = c {
                    out.push(w);
                }
            }
            Pattern::RotationGroup { group, children } => {
                out.push(group);
                out.extend(children.iter().map(String::as_str));
            }
            Pattern::Equalize { groups } => out.extend(groups.iter().flatten().map(String::as_str)),
            Pattern::Connected { items, top, left, .. } => {
                out.extend(items.iter().map(String::as_str));
                for c in [top, left] {
                    if let Container::Widget(w) = c {
                        out.push(w);
                    }
                }
            }
            Pattern::AltPositions { target, .. } => out.push(target),
            Pattern::AltWidgets { primary, fallback } => {
                out.push(primary);
                out.push(fallback);
            }
            Pattern::Optional { widget, .. } => out.push(widget),
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternInstance {
    pub pattern: Pattern,
    pub label_prefix: String,
}

impl PatternInstance {
    pub fn new(label_prefix: impl Into<String>, pattern: Pattern) -> Self {
        PatternInstance { pattern, label_prefix: label_prefix.into() }
    }
}

/// Clauses plus the widget adjustments a pattern needs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Emitted {
    pub clauses: Vec<Clause>,
    /// Widgets whose automatic preferred-size clauses are dropped.
    pub suppress_pref: Vec<String>,
    /// Widgets allowed to collapse to zero size.
    pub collapsible: Vec<String>,
}

impl Emitted {
    fn of(clauses: Vec<Clause>) -> Self {
        Emitted { clauses, ..Default::default() }
    }
}

fn rect(id: &str) -> RectExpr {
    RectExpr::of_widget(id)
}

fn eq(a: &LinExpr, b: impl Into<LinExpr>) -> Formula {
    Formula::Atom(a.equal_to(b))
}

fn le(a: &LinExpr, b: impl Into<LinExpr>) -> Formula {
    Formula::Atom(a.at_most(b))
}

fn ge(a: &LinExpr, b: impl Into<LinExpr>) -> Formula {
    Formula::Atom(a.at_least(b))
}

/// Drops the `Or` wrapper around a single alternative.
fn any(mut parts: Vec<Formula>) -> Formula {
    if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        Formula::Or(parts)
    }
}

fn contained(r: &RectExpr, c: &RectExpr) -> Vec<Formula> {
    vec![ge(&r.left, &c.left), ge(&r.top, &c.top), le(&r.right(), c.right()), le(&r.bottom(), c.bottom())]
}

fn containment(label: String, rects: &[RectExpr], c: &RectExpr) -> Clause {
    Clause::hard(label, Formula::and(rects.iter().flat_map(|r| contained(r, c))))
}

fn c_right(cur: &RectExpr, prev: &RectExpr) -> Formula {
    Formula::and([eq(&cur.left, prev.right()), eq(&cur.top, &prev.top)])
}

/// Start of a new row: at the container's left edge, below every earlier
/// widget and flush with the bottom of one of them (latest first).
fn c_next_row(cur: &RectExpr, earlier: &[RectExpr], c: &RectExpr) -> Formula {
    let mut parts = vec![eq(&cur.left, &c.left)];
    parts.extend(earlier.iter().map(|e| ge(&cur.top, e.bottom())));
    parts.push(any(earlier.iter().rev().map(|e| eq(&cur.top, e.bottom())).collect()));
    Formula::And(parts)
}

/// The per-widget alternatives of a flow, for widgets 2..n.
fn flow_links(rects: &[RectExpr], c: &RectExpr, w: &Weights) -> Vec<Formula> {
    (1..rects.len())
        .map(|i| {
            Formula::Or(vec![
                Formula::weighted(w.preferred_disjunct, c_right(&rects[i], &rects[i - 1])),
                Formula::weighted(w.fallback_disjunct, c_next_row(&rects[i], &rects[..i], c)),
            ])
        })
        .collect()
}

fn pin_first(r: &RectExpr, c: &RectExpr) -> Formula {
    Formula::and([eq(&r.left, &c.left), eq(&r.top, &c.top)])
}

fn flow_clauses(prefix: &str, items: &[String], rects: &[RectExpr], c: &RectExpr, w: &Weights) -> Vec<Clause> {
    let mut out = vec![Clause::hard(format!("{prefix}.first"), pin_first(&rects[0], c))];
    for (id, link) in items[1..].iter().zip(flow_links(rects, c, w)) {
        out.push(Clause::hard(format!("{prefix}.flow.{id}"), link));
    }
    out.push(containment(format!("{prefix}.contain"), rects, c));
    out
}

/// Horizontal flow: each widget goes to the right of its predecessor or
/// starts the next row.
pub fn flow_horizontal(prefix: &str, items: &[String], container: &RectExpr, w: &Weights) -> Result<Vec<Clause>, PatternError> {
    if items.is_empty() {
        return Err(PatternError::EmptyWidgetList(prefix.into()));
    }
    let rects: Vec<RectExpr> = items.iter().map(|i| rect(i)).collect();
    Ok(flow_clauses(prefix, items, &rects, container, w))
}

/// Vertical flow: the horizontal flow with both axes swapped.
pub fn flow_vertical(prefix: &str, items: &[String], container: &RectExpr, w: &Weights) -> Result<Vec<Clause>, PatternError> {
    if items.is_empty() {
        return Err(PatternError::EmptyWidgetList(prefix.into()));
    }
    let rects: Vec<RectExpr> = items.iter().map(|i| rect(i).transposed()).collect();
    Ok(flow_clauses(prefix, items, &rects, &container.transposed(), w))
}

/// Lets the solver pick the flow direction. Both orientations sit in one
/// disjunction so every link follows the same choice.
pub fn flow_either(prefix: &str, items: &[String], container: &RectExpr, w: &Weights) -> Result<Vec<Clause>, PatternError> {
    if items.is_empty() {
        return Err(PatternError::EmptyWidgetList(prefix.into()));
    }
    let h: Vec<RectExpr> = items.iter().map(|i| rect(i)).collect();
    let v: Vec<RectExpr> = h.iter().map(RectExpr::transposed).collect();
    let mut out = vec![Clause::hard(format!("{prefix}.first"), pin_first(&h[0], container))];
    if items.len() > 1 {
        let horizontal = Formula::And(flow_links(&h, container, w));
        let vertical = Formula::And(flow_links(&v, &container.transposed(), w));
        out.push(Clause::hard(format!("{prefix}.orient"), Formula::Or(vec![horizontal, vertical])));
    }
    out.push(containment(format!("{prefix}.contain"), &h, container));
    Ok(out)
}

/// Children in a row or a stack inside `group`; the group is sized as the
/// sum along the main axis and the max across it.
pub fn rotation_group(prefix: &str, group: &str, children: &[String]) -> Result<Emitted, PatternError> {
    if children.is_empty() {
        return Err(PatternError::EmptyChildList(prefix.into()));
    }
    let g = rect(group);
    let kids: Vec<RectExpr> = children.iter().map(|c| rect(c)).collect();
    let arrange = |g: &RectExpr, kids: &[RectExpr]| {
        let sum = kids.iter().fold(LinExpr::zero(), |acc, k| acc + k.width.clone());
        let mut parts = vec![eq(&g.width, sum), any(kids.iter().map(|k| eq(&g.height, &k.height)).collect())];
        for (i, k) in kids.iter().enumerate() {
            let left = if i == 0 { g.left.clone() } else { kids[i - 1].right() };
            parts.push(eq(&k.left, left));
            parts.push(eq(&k.top, &g.top));
        }
        Formula::And(parts)
    };
    let row = arrange(&g, &kids);
    let tg = g.transposed();
    let tk: Vec<RectExpr> = kids.iter().map(RectExpr::transposed).collect();
    let stack = arrange(&tg, &tk);
    let mut bounds = Vec::new();
    for k in &kids {
        bounds.push(ge(&g.width, &k.width));
        bounds.push(ge(&g.height, &k.height));
    }
    Ok(Emitted {
        clauses: vec![
            Clause::hard(format!("{prefix}.rotate"), Formula::Or(vec![row, stack])),
            Clause::hard(format!("{prefix}.max"), Formula::And(bounds)),
        ],
        suppress_pref: vec![group.to_string()],
        collapsible: Vec::new(),
    })
}

/// Soft equal size of every widget with the first one.
pub fn cross_cutting_equalize(prefix: &str, groups: &[Vec<String>], w: &Weights) -> Result<Vec<Clause>, PatternError> {
    let all: Vec<&String> = groups.iter().flatten().collect();
    if all.len() < 2 {
        return Err(PatternError::FewerThanTwoWidgets(prefix.into()));
    }
    let first = rect(all[0]);
    let mut out = Vec::new();
    for id in &all[1..] {
        let r = rect(id);
        out.push(Clause::soft(format!("{prefix}.{id}.width"), w.preferred_disjunct, r.width.equal_to(&first.width)));
        out.push(Clause::soft(format!("{prefix}.{id}.height"), w.preferred_disjunct, r.height.equal_to(&first.height)));
    }
    Ok(out)
}

/// Number of widgets that fit the top toolbar, clamped to `0..=n`.
pub fn t_best(window_width: f64, widget_width: f64, n: usize) -> usize {
    ((window_width / widget_width).floor().max(0.0) as usize).min(n)
}

/// The first `t_best` widgets flow along the top area, the rest down the left area.
pub fn connected_flow(
    prefix: &str,
    top: &RectExpr,
    left: &RectExpr,
    items: &[String],
    widget_width: f64,
    window_width: f64,
    w: &Weights,
) -> Result<Vec<Clause>, PatternError> {
    if items.is_empty() {
        return Err(PatternError::EmptyWidgetList(prefix.into()));
    }
    if widget_width <= 0.0 || !widget_width.is_finite() {
        return Err(PatternError::ZeroWidgetWidth(prefix.into()));
    }
    let t = t_best(window_width, widget_width, items.len());
    let mut out = Vec::new();
    if t > 0 {
        out.extend(flow_horizontal(&format!("{prefix}.top"), &items[..t], top, w)?);
    }
    if t < items.len() {
        out.extend(flow_vertical(&format!("{prefix}.left"), &items[t..], left, w)?);
    }
    Ok(out)
}

pub fn factors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Factors of `n` by distance to the preferred row length, ties toward the larger.
pub fn factor_preference(n: usize, container_width: f64, widget_width: f64) -> Vec<usize> {
    let p = if widget_width > 0.0 { (container_width / widget_width).floor() as i64 } else { n as i64 };
    let p = p.clamp(1, n.max(1) as i64);
    let mut f = factors(n);
    f.sort_by_key(|&c| ((c as i64 - p).abs(), std::cmp::Reverse(c)));
    f
}

fn grid(rects: &[RectExpr], per_row: usize, c: &RectExpr) -> Formula {
    let mut parts = Vec::new();
    for (k, r) in rects.iter().enumerate() {
        if k % per_row == 0 {
            parts.push(eq(&r.left, &c.left));
            let top = if k == 0 { c.top.clone() } else { rects[k - per_row].bottom() };
            parts.push(eq(&r.top, top));
        } else {
            parts.push(eq(&r.left, rects[k - 1].right()));
            parts.push(eq(&r.top, &rects[k - 1].top));
        }
    }
    Formula::And(parts)
}

/// Rows whose length is a factor of the widget count; the factor closest to
/// what fits is preferred and the others remain as fallbacks.
pub fn balanced_flow(
    prefix: &str,
    items: &[String],
    container: &RectExpr,
    container_width: f64,
    widget_width: f64,
    w: &Weights,
) -> Result<Vec<Clause>, PatternError> {
    if items.is_empty() {
        return Err(PatternError::EmptyWidgetList(prefix.into()));
    }
    let rects: Vec<RectExpr> = items.iter().map(|i| rect(i)).collect();
    let order = factor_preference(items.len(), container_width, widget_width);
    let alts = order
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let weight = if i == 0 { w.preferred_disjunct } else { w.fallback_disjunct };
            Formula::weighted(weight, grid(&rects, c, container))
        })
        .collect();
    Ok(vec![
        Clause::hard(format!("{prefix}.rows"), any(alts)),
        containment(format!("{prefix}.contain"), &rects, container),
    ])
}

/// The target takes exactly one of the slots, earlier slots first.
pub fn alternative_positions(prefix: &str, target: &str, slots: &[FixedRect]) -> Result<Vec<Clause>, PatternError> {
    if slots.len() < 2 {
        return Err(PatternError::FewerThanTwoSlots(prefix.into()));
    }
    let r = rect(target);
    let alts = slots
        .iter()
        .map(|s| {
            Formula::and([eq(&r.left, s.left), eq(&r.top, s.top), eq(&r.width, s.width), eq(&r.height, s.height)])
        })
        .collect();
    Ok(vec![Clause::hard(format!("{prefix}.slot"), Formula::Or(alts))])
}

fn at_pref(r: &RectExpr, w: &Widget) -> Formula {
    Formula::and([eq(&r.width, w.pref.w), eq(&r.height, w.pref.h)])
}

fn at_zero(r: &RectExpr) -> Formula {
    Formula::and([eq(&r.width, 0.0), eq(&r.height, 0.0)])
}

/// Either the primary at its preferred size with the fallback collapsed, or
/// the reverse; the primary is preferred.
pub fn alternative_widgets(prefix: &str, primary: &Widget, fallback: &Widget, w: &Weights) -> Result<Emitted, PatternError> {
    if primary.id == fallback.id {
        return Err(PatternError::SameWidget(prefix.into()));
    }
    let (p, f) = (rect(&primary.id), rect(&fallback.id));
    let first = Formula::and([at_pref(&p, primary), at_zero(&f)]);
    let second = Formula::and([at_zero(&p), at_pref(&f, fallback)]);
    Ok(Emitted {
        clauses: vec![
            Clause::hard(
                format!("{prefix}.choice"),
                Formula::Or(vec![
                    Formula::weighted(w.preferred_disjunct, first),
                    Formula::weighted(w.fallback_disjunct, second),
                ]),
            ),
            Clause::hard(format!("{prefix}.colocate"), Formula::and([eq(&f.left, &p.left), eq(&f.top, &p.top)])),
        ],
        suppress_pref: vec![primary.id.clone(), fallback.id.clone()],
        collapsible: vec![primary.id.clone(), fallback.id.clone()],
    })
}

/// A widget shown at its preferred size or hidden at size zero, with
/// weights by priority.
pub fn optional_widget(prefix: &str, widget: &Widget, priority: Priority, w: &Weights) -> Emitted {
    let r = rect(&widget.id);
    let keep = at_pref(&r, widget);
    let drop = at_zero(&r);
    let mut clauses = vec![Clause::hard(format!("{prefix}.either"), Formula::Or(vec![keep.clone(), drop.clone()]))];
    match priority {
        Priority::High => clauses.push(Clause::hard(format!("{prefix}.keep"), keep)),
        Priority::Medium => {
            clauses.push(Clause::soft(format!("{prefix}.keep"), w.optional_medium_keep, keep));
            clauses.push(Clause::soft(format!("{prefix}.drop"), w.optional_medium_drop, drop));
        }
        Priority::Low => {
            clauses.push(Clause::soft(format!("{prefix}.keep"), w.optional_low_keep, keep));
            clauses.push(Clause::soft(format!("{prefix}.drop"), w.optional_low_drop, drop));
        }
    }
    Emitted { clauses, suppress_pref: vec![widget.id.clone()], collapsible: vec![widget.id.clone()] }
}

fn not(a: Atom, eps: f64) -> Formula {
    negate_atom(&a, eps)
}

/// Horizontal flow around a fixed rectangle. Widgets in rows that overlap
/// the rectangle's rows are split to its left and right.
pub fn flow_around_fixed(
    prefix: &str,
    items: &[String],
    fixed: FixedRect,
    container: &RectExpr,
    epsilon: f64,
    w: &Weights,
) -> Result<Vec<Clause>, PatternError> {
    if items.is_empty() {
        return Err(PatternError::EmptyWidgetList(prefix.into()));
    }
    if let Some((cl, ct, cw, ch)) = container.as_constant() {
        let inside = fixed.left >= cl
            && fixed.top >= ct
            && fixed.left + fixed.width <= cl + cw
            && fixed.top + fixed.height <= ct + ch
            && fixed.width > 0.0
            && fixed.height > 0.0
            && (fixed.width < cw || fixed.height < ch);
        if !inside {
            return Err(PatternError::FixedOutsideContainer(prefix.into()));
        }
    }
    let f = fixed.expr();
    let c = container;
    let rects: Vec<RectExpr> = items.iter().map(|i| rect(i)).collect();
    // rows of r intersect the rows of the fixed area
    let shares = |r: &RectExpr| {
        Formula::and([not(r.top.at_least(f.bottom()), epsilon), not(r.bottom().at_most(f.top.clone()), epsilon)])
    };
    // pairwise exclusive ways of staying clear of the fixed area
    let clear = |r: &RectExpr| {
        Formula::Or(vec![
            le(&r.bottom(), f.top.clone()),
            ge(&r.top, f.bottom()),
            Formula::and([shares(r), le(&r.right(), f.left.clone())]),
            Formula::and([shares(r), ge(&r.left, f.right())]),
        ])
    };

    let first = &rects[0];
    let mut out = vec![Clause::hard(
        format!("{prefix}.first"),
        Formula::Or(vec![
            Formula::and([eq(&first.left, &c.left), eq(&first.top, &c.top)]),
            Formula::and([eq(&first.left, f.right()), eq(&first.top, &c.top)]),
        ]),
    )];
    out.push(Clause::hard(format!("{prefix}.clear.{}", items[0]), clear(first)));
    for i in 1..rects.len() {
        let (cur, prev) = (&rects[i], &rects[i - 1]);
        let id = &items[i];
        let jump = Formula::and([
            eq(&cur.top, &prev.top),
            shares(cur),
            le(&prev.right(), f.left.clone()),
            eq(&cur.left, f.right()),
        ]);
        let mut after = vec![shares(cur), eq(&cur.left, f.right())];
        after.extend(rects[..i].iter().map(|e| ge(&cur.top, e.bottom())));
        after.push(any(rects[..i].iter().rev().map(|e| eq(&cur.top, e.bottom())).collect()));
        out.push(Clause::hard(
            format!("{prefix}.flow.{id}"),
            Formula::Or(vec![
                Formula::weighted(w.preferred_disjunct, c_right(cur, prev)),
                Formula::weighted(w.preferred_disjunct, jump),
                Formula::weighted(w.fallback_disjunct, c_next_row(cur, &rects[..i], c)),
                Formula::weighted(w.fallback_disjunct, Formula::And(after)),
            ]),
        ));
        out.push(Clause::hard(format!("{prefix}.clear.{id}"), clear(cur)));
    }
    out.push(containment(format!("{prefix}.contain"), &rects, c));
    Ok(out)
}

fn container_rect(c: &Container, viewport: Viewport) -> RectExpr {
    match c {
        Container::Root => viewport.rect(),
        Container::Widget(id) => rect(id),
        Container::Rect(r) => r.expr(),
    }
}

fn container_width(c: &Container, viewport: Viewport) -> f64 {
    match c {
        Container::Rect(r) => r.width,
        _ => viewport.width,
    }
}

fn lookup<'a>(widgets: &'a [Widget], id: &str) -> Result<&'a Widget, PatternError> {
    widgets.iter().find(|w| w.id == id).ok_or_else(|| PatternError::UnknownTargetWidget(id.to_string()))
}

/// Clauses for one instance.
pub fn emit(inst: &PatternInstance, widgets: &[Widget], viewport: Viewport, epsilon: f64, w: &Weights) -> Result<Emitted, PatternError> {
    for t in inst.pattern.targets() {
        lookup(widgets, t)?;
    }
    let p = inst.label_prefix.as_str();
    let vp = |c: &Container| container_rect(c, viewport);
    Ok(match &inst.pattern {
        Pattern::FlowH { items, container } => Emitted::of(flow_horizontal(p, items, &vp(container), w)?),
        Pattern::FlowV { items, container } => Emitted::of(flow_vertical(p, items, &vp(container), w)?),
        Pattern::FlowEither { items, container } => Emitted::of(flow_either(p, items, &vp(container), w)?),
        Pattern::RotationGroup { group, children } => rotation_group(p, group, children)?,
        Pattern::Equalize { groups } => Emitted::of(cross_cutting_equalize(p, groups, w)?),
        Pattern::Connected { items, top, left, widget_width } => {
            Emitted::of(connected_flow(p, &vp(top), &vp(left), items, *widget_width, viewport.width, w)?)
        }
        Pattern::Balanced { items, container } => {
            let first = items.first().ok_or_else(|| PatternError::EmptyWidgetList(p.into()))?;
            let ww = lookup(widgets, first)?.pref.w;
            Emitted::of(balanced_flow(p, items, &vp(container), container_width(container, viewport), ww, w)?)
        }
        Pattern::AltPositions { target, slots } => Emitted::of(alternative_positions(p, target, slots)?),
        Pattern::AltWidgets { primary, fallback } => {
            alternative_widgets(p, lookup(widgets, primary)?, lookup(widgets, fallback)?, w)?
        }
        Pattern::Optional { widget, priority } => {
            let wd = lookup(widgets, widget)?;
            optional_widget(p, wd, priority.unwrap_or(wd.priority), w)
        }
        Pattern::FlowAround { items, fixed, container } => {
            Emitted::of(flow_around_fixed(p, items, *fixed, &vp(container), epsilon, w)?)
        }
    })
}

/// Assembles a problem from widgets, pattern instances (in order) and extra clauses.
pub fn compile_with(
    instances: &[PatternInstance],
    widgets: Vec<Widget>,
    viewport: Viewport,
    extra: Vec<Clause>,
    epsilon: f64,
    w: &Weights,
) -> Result<LayoutProblem, PatternError> {
    let mut clauses = Vec::new();
    let mut suppress = BTreeSet::new();
    let mut collapsible = BTreeSet::new();
    for inst in instances {
        let e = emit(inst, &widgets, viewport, epsilon, w)?;
        clauses.extend(e.clauses);
        suppress.extend(e.suppress_pref);
        collapsible.extend(e.collapsible);
    }
    clauses.extend(extra);
    let widgets = widgets
        .into_iter()
        .map(|mut wd| {
            wd.collapsible |= collapsible.contains(&wd.id);
            wd
        })
        .collect();
    let opts = AssemblyOptions { suppress_pref: suppress, epsilon: Some(epsilon) };
    LayoutProblem::assemble_with(widgets, viewport, clauses, &opts).map_err(|e| match e {
        ModelError::DuplicateLabel(l) => PatternError::LabelCollision(l),
        other => PatternError::Model(other),
    })
}

pub fn compile(instances: &[PatternInstance], widgets: Vec<Widget>, viewport: Viewport) -> Result<LayoutProblem, PatternError> {
    compile_with(instances, widgets, viewport, Vec::new(), crate::model::DEFAULT_EPSILON, &Weights::default())
}
