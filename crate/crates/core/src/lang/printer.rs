use std::fmt::Write;

use super::ast::*;
use crate::model::Priority;

/// Canonical text for a document; parsing it gives the document back.
pub fn print(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "layout {} {{", quote(&doc.name));
    for item in &doc.items {
        out.push_str("  ");
        match item {
            Item::Window(w) => {
                let _ = write!(out, "window {{ width: {}; height: {}; }}", w.width, w.height);
            }
            Item::Widget(w) => print_widget(&mut out, w),
            Item::Pattern(p) => {
                let args: Vec<String> = p.args.iter().map(|a| format!("{}: {}", a.name.name, value(&a.value))).collect();
                let _ = write!(out, "pattern {}({});", p.kind.keyword(), args.join(", "));
            }
            Item::Constraint(c) => {
                let strength = match c.strength {
                    StrengthDecl::Hard => "hard".to_string(),
                    StrengthDecl::Soft(w) => format!("soft({w})"),
                };
                let _ = write!(out, "constraint {strength}: {};", formula(&c.formula));
            }
        }
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn print_widget(out: &mut String, w: &WidgetDecl) {
    let _ = write!(out, "widget {} {{ ", w.name.name);
    for (key, size) in [("min", w.min), ("pref", w.pref), ("max", w.max)] {
        if let Some((a, b)) = size {
            let _ = write!(out, "{key}: {a}x{b}; ");
        }
    }
    if let Some(p) = w.priority {
        let name = match p {
            Priority::High => "high",
            Priority::Medium => "medium",
            Priority::Low => "low",
        };
        let _ = write!(out, "priority: {name}; ");
    }
    out.push('}');
}

fn value(v: &Value) -> String {
    match v {
        Value::Ident(i) => i.name.clone(),
        Value::Num(n) => n.to_string(),
        Value::Rect([a, b, c, d]) => format!("({a}, {b}, {c}, {d})"),
        Value::List(l) => format!("[{}]", l.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")),
    }
}

pub fn formula(f: &FormulaAst) -> String {
    match f {
        FormulaAst::Or(ch) => ch
            .iter()
            .map(|c| if matches!(c, FormulaAst::Or(_)) { format!("({})", formula(c)) } else { formula(c) })
            .collect::<Vec<_>>()
            .join(" || "),
        FormulaAst::And(ch) => ch
            .iter()
            .map(|c| match c {
                FormulaAst::Or(_) | FormulaAst::And(_) => format!("({})", formula(c)),
                _ => formula(c),
            })
            .collect::<Vec<_>>()
            .join(" && "),
        FormulaAst::Not(c) => match **c {
            FormulaAst::Or(_) | FormulaAst::And(_) => format!("!({})", formula(c)),
            _ => format!("!{}", formula(c)),
        },
        FormulaAst::Atom(l, r, rhs) => format!("{} {} {}", linexpr(l), r.symbol(), linexpr(rhs)),
    }
}

fn linexpr(e: &LinExprAst) -> String {
    let mut s = term(&e.first);
    for (op, t) in &e.rest {
        s.push_str(if *op == AddOp::Plus { " + " } else { " - " });
        s.push_str(&term(t));
    }
    s
}

fn term(t: &Term) -> String {
    let r = |r: &Ref| format!("{}.{}", r.widget.name, r.attr.name());
    match t {
        Term::Num(n) => n.to_string(),
        Term::Scaled(n, x) => format!("{n} * {}", r(x)),
        Term::Ref(x) => r(x),
    }
}
