//! Random syntax trees for print/parse round trips.
use orc_core::lang::*;
use orc_core::{Attr, Priority};
use rand::seq::SliceRandom;
use rand::Rng;

fn ident<R: Rng>(rng: &mut R) -> Ident {
    const FIRST: &[u8] = b"abcdefghijklmnopqrstuvwxyz_ABCXYZ";
    const REST: &[u8] = b"abcdefghijklmnopqrstuvwxyz_0123456789";
    let mut s = String::new();
    s.push(*FIRST.choose(rng).unwrap() as char);
    for _ in 0..rng.gen_range(0..6) {
        s.push(*REST.choose(rng).unwrap() as char);
    }
    Ident::new(s)
}

fn num<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(0..500) as f64,
        1 => rng.gen_range(-500..500) as f64 / 4.0,
        2 => {
            let v: f64 = rng.gen::<f64>() * 10f64.powi(rng.gen_range(-8..12));
            if rng.gen() { v } else { -v }
        }
        _ => 0.0,
    }
}

fn positive<R: Rng>(rng: &mut R) -> f64 {
    let v = num(rng).abs();
    if v > 0.0 { v } else { 1.5 }
}

fn size<R: Rng>(rng: &mut R) -> Option<(f64, f64)> {
    rng.gen_bool(0.5).then(|| (num(rng), num(rng)))
}

fn value<R: Rng>(rng: &mut R) -> Value {
    match rng.gen_range(0..4) {
        0 => Value::Ident(ident(rng)),
        1 => Value::Num(num(rng)),
        2 => Value::Rect([num(rng), num(rng), num(rng), num(rng)]),
        _ => Value::List((0..rng.gen_range(0..4)).map(|_| ident(rng)).collect()),
    }
}

fn reference<R: Rng>(rng: &mut R) -> Ref {
    let attrs = [
        RefAttr::Var(Attr::Left),
        RefAttr::Var(Attr::Top),
        RefAttr::Var(Attr::Width),
        RefAttr::Var(Attr::Height),
        RefAttr::Right,
        RefAttr::Bottom,
    ];
    Ref { widget: ident(rng), attr: *attrs.choose(rng).unwrap() }
}

fn term<R: Rng>(rng: &mut R) -> Term {
    match rng.gen_range(0..3) {
        0 => Term::Num(num(rng)),
        1 => Term::Scaled(num(rng), reference(rng)),
        _ => Term::Ref(reference(rng)),
    }
}

fn linexpr<R: Rng>(rng: &mut R) -> LinExprAst {
    LinExprAst {
        first: term(rng),
        rest: (0..rng.gen_range(0..3))
            .map(|_| (if rng.gen() { AddOp::Plus } else { AddOp::Minus }, term(rng)))
            .collect(),
    }
}

fn formula<R: Rng>(rng: &mut R, depth: u32) -> FormulaAst {
    let pick = if depth == 0 { 3 } else { rng.gen_range(0..4) };
    match pick {
        0 => FormulaAst::Or((0..rng.gen_range(2..4)).map(|_| formula(rng, depth - 1)).collect()),
        1 => FormulaAst::And((0..rng.gen_range(2..4)).map(|_| formula(rng, depth - 1)).collect()),
        2 => FormulaAst::Not(Box::new(formula(rng, depth - 1))),
        _ => {
            let rels = [RelOp::Eq, RelOp::Le, RelOp::Ge, RelOp::Lt, RelOp::Gt];
            FormulaAst::Atom(linexpr(rng), *rels.choose(rng).unwrap(), linexpr(rng))
        }
    }
}

pub fn random_document<R: Rng>(rng: &mut R) -> Document {
    let name: String = (0..rng.gen_range(0..12))
        .map(|_| *['a', 'Z', ' ', '"', '\\', '\n', 'é', '0', '{'].choose(rng).unwrap())
        .collect();
    let items = (0..rng.gen_range(0..10))
        .map(|_| match rng.gen_range(0..4) {
            0 => Item::Window(WindowDecl { width: num(rng), height: num(rng), span: Span::default() }),
            1 => Item::Widget(WidgetDecl {
                name: ident(rng),
                min: size(rng),
                pref: size(rng),
                max: size(rng),
                priority: [None, Some(Priority::High), Some(Priority::Medium), Some(Priority::Low)]
                    .choose(rng)
                    .copied()
                    .flatten(),
            }),
            2 => Item::Pattern(PatternDecl {
                kind: *PatKind::ALL.choose(rng).unwrap(),
                args: (0..rng.gen_range(1..4)).map(|_| Arg { name: ident(rng), value: value(rng) }).collect(),
                span: Span::default(),
            }),
            _ => Item::Constraint(ConstraintDecl {
                strength: if rng.gen() { StrengthDecl::Hard } else { StrengthDecl::Soft(positive(rng)) },
                formula: formula(rng, 3),
                span: Span::default(),
            }),
        })
        .collect();
    Document { name, items }
}
