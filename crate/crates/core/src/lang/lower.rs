use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::ast::*;
use super::Diagnostic;
use crate::model::{Clause, Formula, LayoutProblem, LinExpr, ModelError, Rel, Size, VarId, Viewport, Widget, DEFAULT_EPSILON};
use crate::patterns::{compile_with, Container, FixedRect, Pattern, PatternError, PatternInstance, Weights};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LowerError {
    #[error("unknown target widget `{name}`")]
    UnknownTargetWidget { name: String, span: Span },
    #[error("label collision: {label}")]
    LabelCollision { label: String, span: Span },
    #[error("{message}")]
    Invalid { message: String, span: Span },
}

impl LowerError {
    pub fn span(&self) -> Span {
        match self {
            LowerError::UnknownTargetWidget { span, .. }
            | LowerError::LabelCollision { span, .. }
            | LowerError::Invalid { span, .. } => *span,
        }
    }

    pub fn diagnostic(&self) -> Diagnostic {
        Diagnostic::new(self.to_string(), self.span())
    }
}

fn invalid<T>(message: impl Into<String>, span: Span) -> Result<T, LowerError> {
    Err(LowerError::Invalid { message: message.into(), span })
}

/// A lowered document plus the source span behind each clause prefix.
#[derive(Clone, Debug)]
pub struct Lowered {
    pub problem: LayoutProblem,
    pub instances: Vec<PatternInstance>,
    pub spans: BTreeMap<String, Span>,
}

impl Lowered {
    /// Span of the declaration that produced `label`.
    pub fn span_of(&self, label: &str) -> Option<Span> {
        if let Some(s) = self.spans.get(label) {
            return Some(*s);
        }
        self.spans
            .iter()
            .filter(|(k, _)| label.starts_with(k.as_str()) && label[k.len()..].starts_with('.'))
            .max_by_key(|(k, _)| k.len())
            .map(|(_, s)| *s)
    }
}

pub fn pattern_label(ordinal: usize, kind: PatKind) -> String {
    format!("pattern{ordinal}.{}", kind.keyword())
}

pub fn constraint_label(ordinal: usize) -> String {
    format!("c{ordinal}")
}

/// Lowers at the document's own window unless `viewport` overrides it.
pub fn lower(doc: &Document, viewport: Option<Viewport>) -> Result<Lowered, LowerError> {
    let start = Span { line: 1, column: 1, len: 0 };
    let mut window = None;
    let mut widgets: Vec<Widget> = Vec::new();
    let mut declared: HashMap<&str, Span> = HashMap::new();
    for item in &doc.items {
        match item {
            Item::Window(w) => {
                if window.is_some() {
                    return invalid("duplicate window", w.span);
                }
                if !(w.width >= 0.0 && w.height >= 0.0) {
                    return invalid("window size must be non-negative", w.span);
                }
                window = Some(Viewport::new(w.width, w.height));
            }
            Item::Widget(w) => {
                if declared.insert(&w.name.name, w.name.span).is_some() {
                    return invalid(format!("duplicate widget `{}`", w.name.name), w.name.span);
                }
                widgets.push(widget(w)?);
            }
            _ => {}
        }
    }
    let Some(viewport) = viewport.or(window) else {
        return invalid("no window given and no viewport supplied", start);
    };

    let mut spans = BTreeMap::new();
    let mut instances = Vec::new();
    let mut clauses = Vec::new();
    for item in &doc.items {
        match item {
            Item::Pattern(p) => {
                let label = pattern_label(instances.len() + 1, p.kind);
                let pattern = pattern(p, &declared)?;
                spans.insert(label.clone(), p.span);
                instances.push(PatternInstance::new(label, pattern));
            }
            Item::Constraint(c) => {
                let label = constraint_label(clauses.len() + 1);
                let f = formula(&c.formula, &declared)?;
                spans.insert(label.clone(), c.span);
                clauses.push(match c.strength {
                    StrengthDecl::Hard => Clause::hard(label, f),
                    StrengthDecl::Soft(w) => {
                        if !(w > 0.0 && w.is_finite()) {
                            return invalid("weight must be positive", c.span);
                        }
                        Clause::soft(label, w, f)
                    }
                });
            }
            _ => {}
        }
    }

    let pattern_span = |label: &str| {
        spans
            .iter()
            .find(|(k, _)| label == k.as_str() || label.starts_with(&format!("{k}.")))
            .map(|(_, s)| *s)
            .unwrap_or(start)
    };
    let problem = compile_with(&instances, widgets, viewport, clauses, DEFAULT_EPSILON, &Weights::default()).map_err(|e| match e {
        PatternError::LabelCollision(label) => {
            let span = pattern_span(&label);
            LowerError::LabelCollision { label, span }
        }
        PatternError::UnknownTargetWidget(name) => LowerError::UnknownTargetWidget { name, span: start },
        PatternError::Model(ModelError::DuplicateLabel(label)) => {
            let span = pattern_span(&label);
            LowerError::LabelCollision { label, span }
        }
        PatternError::Model(m) => LowerError::Invalid { message: m.to_string(), span: start },
        other => {
            let msg = other.to_string();
            let prefix = msg.split(':').next().unwrap_or_default().to_string();
            LowerError::Invalid { message: msg, span: pattern_span(&prefix) }
        }
    })?;
    Ok(Lowered { problem, instances, spans })
}

fn widget(w: &WidgetDecl) -> Result<Widget, LowerError> {
    let size = |s: (f64, f64)| Size::new(s.0, s.1);
    let (min, pref, max) = match w.pref {
        Some(p) => (w.min.map_or(size(p), size), size(p), w.max.map_or(size(p), size)),
        None => (w.min.map_or(Size::ZERO, size), Size::ZERO, w.max.map_or(Size::unbounded(), size)),
    };
    // without a pref the widget wants its min size
    let pref = if w.pref.is_none() { min } else { pref };
    let ok = |a: f64, b: f64, c: f64| 0.0 <= a && a <= b && b <= c;
    if !ok(min.w, pref.w, max.w) || !ok(min.h, pref.h, max.h) {
        return invalid(format!("widget `{}` needs 0 <= min <= pref <= max", w.name.name), w.name.span);
    }
    let mut out = Widget::new(w.name.name.clone(), min, pref, max);
    if let Some(p) = w.priority {
        out = out.with_priority(p);
    }
    Ok(out)
}

struct Args<'a> {
    decl: &'a PatternDecl,
    used: Vec<bool>,
}

impl<'a> Args<'a> {
    fn new(decl: &'a PatternDecl) -> Result<Self, LowerError> {
        for (i, a) in decl.args.iter().enumerate() {
            if decl.args[..i].iter().any(|b| b.name.name == a.name.name) {
                return invalid(format!("duplicate argument `{}`", a.name.name), a.name.span);
            }
        }
        Ok(Args { decl, used: vec![false; decl.args.len()] })
    }

    fn get(&mut self, name: &str) -> Option<&'a Arg> {
        let i = self.decl.args.iter().position(|a| a.name.name == name)?;
        self.used[i] = true;
        Some(&self.decl.args[i])
    }

    fn require(&mut self, name: &str) -> Result<&'a Arg, LowerError> {
        match self.get(name) {
            Some(a) => Ok(a),
            None => invalid(format!("{} needs argument `{name}`", self.decl.kind.keyword()), self.decl.span),
        }
    }

    fn finish(self) -> Result<(), LowerError> {
        match self.used.iter().position(|u| !u) {
            Some(i) => {
                let a = &self.decl.args[i];
                invalid(format!("unknown argument `{}` for {}", a.name.name, self.decl.kind.keyword()), a.name.span)
            }
            None => Ok(()),
        }
    }
}

fn wrong_type<T>(a: &Arg, want: &str) -> Result<T, LowerError> {
    invalid(format!("argument `{}` must be {want}", a.name.name), a.name.span)
}

fn known(i: &Ident, declared: &HashMap<&str, Span>) -> Result<String, LowerError> {
    if declared.contains_key(i.name.as_str()) {
        Ok(i.name.clone())
    } else {
        Err(LowerError::UnknownTargetWidget { name: i.name.clone(), span: i.span })
    }
}

fn widget_arg(a: &Arg, declared: &HashMap<&str, Span>) -> Result<String, LowerError> {
    match &a.value {
        Value::Ident(i) => known(i, declared),
        _ => wrong_type(a, "a widget name"),
    }
}

fn list_arg(a: &Arg, declared: &HashMap<&str, Span>) -> Result<Vec<String>, LowerError> {
    match &a.value {
        Value::List(l) => l.iter().map(|i| known(i, declared)).collect(),
        _ => wrong_type(a, "a widget list"),
    }
}

fn rect_of(r: [f64; 4]) -> FixedRect {
    FixedRect::new(r[0], r[1], r[2], r[3])
}

fn container_arg(a: Option<&Arg>, declared: &HashMap<&str, Span>) -> Result<Container, LowerError> {
    match a.map(|a| (a, &a.value)) {
        None => Ok(Container::Root),
        Some((_, Value::Ident(i))) if i.name == "root" => Ok(Container::Root),
        Some((_, Value::Ident(i))) => Ok(Container::Widget(known(i, declared)?)),
        Some((_, Value::Rect(r))) => Ok(Container::Rect(rect_of(*r))),
        Some((a, _)) => wrong_type(a, "`root`, a widget name or a rectangle"),
    }
}

fn pattern(p: &PatternDecl, declared: &HashMap<&str, Span>) -> Result<Pattern, LowerError> {
    let mut args = Args::new(p)?;
    let pat = match p.kind {
        PatKind::HFlow | PatKind::VFlow | PatKind::EitherFlow | PatKind::Balanced => {
            let items = list_arg(args.require("items")?, declared)?;
            let container = container_arg(args.get("container"), declared)?;
            match p.kind {
                PatKind::HFlow => Pattern::FlowH { items, container },
                PatKind::VFlow => Pattern::FlowV { items, container },
                PatKind::EitherFlow => Pattern::FlowEither { items, container },
                _ => Pattern::Balanced { items, container },
            }
        }
        PatKind::FlowAround => {
            let items = list_arg(args.require("items")?, declared)?;
            let fixed = match args.require("fixed")? {
                Arg { value: Value::Rect(r), .. } => rect_of(*r),
                a => return wrong_type(a, "a rectangle"),
            };
            let container = container_arg(args.get("container"), declared)?;
            Pattern::FlowAround { items, fixed, container }
        }
        PatKind::RotateGroup => Pattern::RotationGroup {
            group: widget_arg(args.require("group")?, declared)?,
            children: list_arg(args.require("children")?, declared)?,
        },
        PatKind::Equalize => {
            let mut groups = Vec::new();
            for a in &p.args {
                args.get(&a.name.name);
                groups.push(list_arg(a, declared)?);
            }
            Pattern::Equalize { groups }
        }
        PatKind::Connected => {
            let items = list_arg(args.require("items")?, declared)?;
            let top = container_arg(Some(args.require("top")?), declared)?;
            let left = container_arg(Some(args.require("left")?), declared)?;
            let widget_width = match args.require("widget_width")? {
                Arg { value: Value::Num(n), .. } => *n,
                a => return wrong_type(a, "a number"),
            };
            Pattern::Connected { items, top, left, widget_width }
        }
        PatKind::AltPositions => {
            let target = widget_arg(args.require("target")?, declared)?;
            let mut slots = Vec::new();
            for a in &p.args {
                if a.name.name == "target" {
                    continue;
                }
                args.get(&a.name.name);
                match a.value {
                    Value::Rect(r) => slots.push(rect_of(r)),
                    _ => return wrong_type(a, "a rectangle"),
                }
            }
            Pattern::AltPositions { target, slots }
        }
        PatKind::AltWidgets => Pattern::AltWidgets {
            primary: widget_arg(args.require("primary")?, declared)?,
            fallback: widget_arg(args.require("fallback")?, declared)?,
        },
        PatKind::Optional => {
            let widget = widget_arg(args.require("widget")?, declared)?;
            let priority = match args.get("priority") {
                None => None,
                Some(a) => match &a.value {
                    Value::Ident(i) => Some(match i.name.as_str() {
                        "high" => crate::model::Priority::High,
                        "medium" => crate::model::Priority::Medium,
                        "low" => crate::model::Priority::Low,
                        _ => return wrong_type(a, "`high`, `medium` or `low`"),
                    }),
                    _ => return wrong_type(a, "`high`, `medium` or `low`"),
                },
            };
            Pattern::Optional { widget, priority }
        }
    };
    args.finish()?;
    Ok(pat)
}

fn formula(f: &FormulaAst, declared: &HashMap<&str, Span>) -> Result<Formula, LowerError> {
    Ok(match f {
        FormulaAst::Or(ch) => Formula::Or(ch.iter().map(|c| formula(c, declared)).collect::<Result<_, _>>()?),
        FormulaAst::And(ch) => Formula::And(ch.iter().map(|c| formula(c, declared)).collect::<Result<_, _>>()?),
        FormulaAst::Not(c) => Formula::not(formula(c, declared)?),
        FormulaAst::Atom(l, rel, r) => {
            let e = linexpr(l, declared)? - linexpr(r, declared)?;
            match rel {
                RelOp::Eq => Formula::Atom(crate::model::Atom::new(e, Rel::Eq)),
                RelOp::Le => Formula::Atom(crate::model::Atom::new(e, Rel::Le)),
                RelOp::Ge => Formula::Atom(crate::model::Atom::new(e, Rel::Ge)),
                RelOp::Lt => Formula::not(Formula::Atom(crate::model::Atom::new(e, Rel::Ge))),
                RelOp::Gt => Formula::not(Formula::Atom(crate::model::Atom::new(e, Rel::Le))),
            }
        }
    })
}

fn linexpr(e: &LinExprAst, declared: &HashMap<&str, Span>) -> Result<LinExpr, LowerError> {
    let mut out = term(&e.first, declared)?;
    for (op, t) in &e.rest {
        let t = term(t, declared)?;
        out = match op {
            AddOp::Plus => out + t,
            AddOp::Minus => out - t,
        };
    }
    Ok(out)
}

fn term(t: &Term, declared: &HashMap<&str, Span>) -> Result<LinExpr, LowerError> {
    Ok(match t {
        Term::Num(n) => LinExpr::constant(*n),
        Term::Scaled(k, r) => reference(r, declared)? * *k,
        Term::Ref(r) => reference(r, declared)?,
    })
}

fn reference(r: &Ref, declared: &HashMap<&str, Span>) -> Result<LinExpr, LowerError> {
    let id = known(&r.widget, declared)?;
    let v = |a| LinExpr::var(VarId::new(id.clone(), a));
    use crate::model::Attr;
    Ok(match r.attr {
        RefAttr::Var(a) => v(a),
        RefAttr::Right => v(Attr::Left) + v(Attr::Width),
        RefAttr::Bottom => v(Attr::Top) + v(Attr::Height),
    })
}
