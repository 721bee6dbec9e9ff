//! Edits on the document tree. Each edit yields a new document; the
//! session decides whether to keep it.
use orc_core::lang::{
    self, Arg, ConstraintDecl, FormulaAst, Ident, Item, LinExprAst, PatKind, RelOp, Span,
    StrengthDecl, Term, Value, WidgetDecl, WindowDecl,
};
use orc_core::{Attr, Priority};
use serde::{Deserialize, Serialize};

/// Weight of the soft position clause a drag leaves behind.
pub const MOVE_WEIGHT: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Edit {
    InsertWidget {
        id: String,
        #[serde(default)]
        min: Option<[f64; 2]>,
        #[serde(default)]
        pref: Option<[f64; 2]>,
        #[serde(default)]
        max: Option<[f64; 2]>,
        #[serde(default)]
        priority: Option<String>,
        /// Label of a pattern whose `items` list the widget joins.
        #[serde(default)]
        pattern: Option<String>,
    },
    DeleteWidget {
        id: String,
    },
    MoveWidget {
        id: String,
        left: f64,
        top: f64,
    },
    ResizeWidget {
        id: String,
        width: f64,
        height: f64,
    },
    SetViewport {
        width: f64,
        height: f64,
    },
    AddPattern {
        pattern: String,
    },
    RemovePattern {
        label: String,
    },
    AddConstraint {
        constraint: String,
    },
    RemoveConstraint {
        label: String,
    },
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    c.next()
        .is_some_and(|f| f.is_ascii_alphabetic() || f == '_')
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_')
}

fn finite(vals: &[f64]) -> Result<(), String> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err("numbers must be finite".into())
    }
}

fn widget_index(doc: &lang::Document, id: &str) -> Result<usize, String> {
    doc.items
        .iter()
        .position(|i| matches!(i, Item::Widget(w) if w.name.name == id))
        .ok_or_else(|| format!("unknown widget `{id}`"))
}

/// Index of the item with ordinal `k` (1-based) among items selected by `pick`.
fn nth(doc: &lang::Document, k: usize, pick: impl Fn(&Item) -> bool) -> Option<usize> {
    doc.items
        .iter()
        .enumerate()
        .filter(|(_, i)| pick(i))
        .nth(k.checked_sub(1)?)
        .map(|(i, _)| i)
}

fn pattern_index(doc: &lang::Document, label: &str) -> Result<usize, String> {
    let unknown = || format!("unknown pattern `{label}`");
    let rest = label.strip_prefix("pattern").ok_or_else(unknown)?;
    let (num, kind) = match rest.split_once('.') {
        Some((n, k)) => (n, Some(k)),
        None => (rest, None),
    };
    let k: usize = num.parse().map_err(|_| unknown())?;
    let i = nth(doc, k, |i| matches!(i, Item::Pattern(_))).ok_or_else(unknown)?;
    match (&doc.items[i], kind) {
        (Item::Pattern(p), Some(kind)) if p.kind.keyword() != kind => Err(unknown()),
        _ => Ok(i),
    }
}

fn constraint_index(doc: &lang::Document, label: &str) -> Result<usize, String> {
    let unknown = || format!("unknown constraint `{label}`");
    let k: usize = label
        .strip_prefix('c')
        .and_then(|n| n.parse().ok())
        .ok_or_else(unknown)?;
    nth(doc, k, |i| matches!(i, Item::Constraint(_))).ok_or_else(unknown)
}

/// Parses one item of the given keyword, accepting text with or without it.
fn parse_item(text: &str, keyword: &str) -> Result<Item, String> {
    let body = text.trim();
    let body = if body.starts_with(keyword) {
        body.to_string()
    } else {
        format!("{keyword} {body}")
    };
    let body = if body.ends_with(';') {
        body
    } else {
        format!("{body};")
    };
    let doc = lang::parse(&format!("layout \"\" {{\n{body}\n}}")).map_err(|d| {
        let d = &d[0];
        format!("{} (column {})", d.message, d.span.column)
    })?;
    match <[Item; 1]>::try_from(doc.items) {
        Ok([item]) => Ok(item),
        Err(_) => Err(format!("expected exactly one {keyword}")),
    }
}

fn refs_widget(f: &FormulaAst, id: &str) -> bool {
    let lin = |e: &LinExprAst| {
        std::iter::once(&e.first)
            .chain(e.rest.iter().map(|(_, t)| t))
            .any(|t| match t {
                Term::Scaled(_, r) | Term::Ref(r) => r.widget.name == id,
                Term::Num(_) => false,
            })
    };
    match f {
        FormulaAst::Or(ch) | FormulaAst::And(ch) => ch.iter().any(|c| refs_widget(c, id)),
        FormulaAst::Not(c) => refs_widget(c, id),
        FormulaAst::Atom(l, _, r) => lin(l) || lin(r),
    }
}

fn position_atom(id: &str, attr: Attr, v: f64) -> FormulaAst {
    let r = lang::Ref {
        widget: Ident::new(id),
        attr: lang::RefAttr::Var(attr),
    };
    FormulaAst::Atom(
        LinExprAst {
            first: Term::Ref(r),
            rest: vec![],
        },
        RelOp::Eq,
        LinExprAst {
            first: Term::Num(v),
            rest: vec![],
        },
    )
}

/// Whether `c` is the position clause a previous move of `id` left.
fn is_move_of(c: &ConstraintDecl, id: &str) -> bool {
    let FormulaAst::And(parts) = &c.formula else {
        return false;
    };
    let shape = |f: &FormulaAst, attr: Attr| match f {
        FormulaAst::Atom(
            LinExprAst {
                first: Term::Ref(r),
                rest: l,
            },
            RelOp::Eq,
            LinExprAst {
                first: Term::Num(_),
                rest: rr,
            },
        ) => {
            l.is_empty()
                && rr.is_empty()
                && r.widget.name == id
                && r.attr == lang::RefAttr::Var(attr)
        }
        _ => false,
    };
    c.strength == StrengthDecl::Soft(MOVE_WEIGHT)
        && parts.len() == 2
        && shape(&parts[0], Attr::Left)
        && shape(&parts[1], Attr::Top)
}

impl Edit {
    /// The edited document, or why the edit is invalid.
    pub fn apply(&self, doc: &lang::Document) -> Result<lang::Document, String> {
        let mut doc = doc.clone();
        match self {
            Edit::InsertWidget {
                id,
                min,
                pref,
                max,
                priority,
                pattern,
            } => {
                if !is_ident(id) {
                    return Err(format!("`{id}` is not a valid widget id"));
                }
                if widget_index(&doc, id).is_ok() {
                    return Err(format!("widget `{id}` already exists"));
                }
                for s in [min, pref, max].into_iter().flatten() {
                    finite(s)?;
                }
                let priority = match priority.as_deref() {
                    None => None,
                    Some("high") => Some(Priority::High),
                    Some("medium") => Some(Priority::Medium),
                    Some("low") => Some(Priority::Low),
                    Some(other) => return Err(format!("unknown priority `{other}`")),
                };
                let pair = |s: &Option<[f64; 2]>| s.map(|[a, b]| (a, b));
                let decl = WidgetDecl {
                    name: Ident::new(id.clone()),
                    min: pair(min),
                    pref: pair(pref),
                    max: pair(max),
                    priority,
                };
                if let Some(label) = pattern {
                    let i = pattern_index(&doc, label)?;
                    let Item::Pattern(p) = &mut doc.items[i] else {
                        unreachable!()
                    };
                    match p.args.iter_mut().find(|a| a.name.name == "items") {
                        Some(Arg {
                            value: Value::List(l),
                            ..
                        }) => l.push(Ident::new(id.clone())),
                        _ => return Err(format!("pattern `{label}` has no items list")),
                    }
                }
                let at = doc
                    .items
                    .iter()
                    .rposition(|i| matches!(i, Item::Widget(_) | Item::Window(_)))
                    .map_or(0, |i| i + 1);
                doc.items.insert(at, Item::Widget(decl));
            }
            Edit::DeleteWidget { id } => {
                let i = widget_index(&doc, id)?;
                doc.items.remove(i);
                doc.items.retain_mut(|item| match item {
                    Item::Pattern(p) => {
                        for a in &mut p.args {
                            if let Value::List(l) = &mut a.value {
                                l.retain(|x| &x.name != id);
                            }
                        }
                        let listed: usize = p
                            .args
                            .iter()
                            .map(|a| {
                                if let Value::List(l) = &a.value {
                                    l.len()
                                } else {
                                    0
                                }
                            })
                            .sum();
                        let starved = p.kind == PatKind::Equalize && listed < 2;
                        !starved
                            && !p.args.iter().any(|a| match &a.value {
                                Value::Ident(x) => &x.name == id,
                                Value::List(l) => l.is_empty(),
                                _ => false,
                            })
                    }
                    Item::Constraint(c) => !refs_widget(&c.formula, id),
                    _ => true,
                });
            }
            Edit::MoveWidget { id, left, top } => {
                finite(&[*left, *top])?;
                widget_index(&doc, id)?;
                let clause = ConstraintDecl {
                    strength: StrengthDecl::Soft(MOVE_WEIGHT),
                    formula: FormulaAst::And(vec![
                        position_atom(id, Attr::Left, *left),
                        position_atom(id, Attr::Top, *top),
                    ]),
                    span: Span::default(),
                };
                match doc
                    .items
                    .iter()
                    .position(|i| matches!(i, Item::Constraint(c) if is_move_of(c, id)))
                {
                    Some(i) => doc.items[i] = Item::Constraint(clause),
                    None => doc.items.push(Item::Constraint(clause)),
                }
            }
            Edit::ResizeWidget { id, width, height } => {
                finite(&[*width, *height])?;
                let i = widget_index(&doc, id)?;
                let Item::Widget(w) = &mut doc.items[i] else {
                    unreachable!()
                };
                w.pref = Some((*width, *height));
            }
            Edit::SetViewport { width, height } => {
                finite(&[*width, *height])?;
                if *width < 0.0 || *height < 0.0 {
                    return Err("viewport must be non-negative".into());
                }
                let win = Item::Window(WindowDecl {
                    width: *width,
                    height: *height,
                    span: Span::default(),
                });
                match doc.items.iter().position(|i| matches!(i, Item::Window(_))) {
                    Some(i) => doc.items[i] = win,
                    None => doc.items.insert(0, win),
                }
            }
            Edit::AddPattern { pattern } => match parse_item(pattern, "pattern")? {
                item @ Item::Pattern(_) => doc.items.push(item),
                _ => return Err("expected a pattern".into()),
            },
            Edit::RemovePattern { label } => {
                let i = pattern_index(&doc, label)?;
                doc.items.remove(i);
            }
            Edit::AddConstraint { constraint } => match parse_item(constraint, "constraint")? {
                item @ Item::Constraint(_) => doc.items.push(item),
                _ => return Err("expected a constraint".into()),
            },
            Edit::RemoveConstraint { label } => {
                let i = constraint_index(&doc, label)?;
                doc.items.remove(i);
            }
        }
        Ok(doc.without_spans())
    }
}
