#![allow(dead_code)]

use orc_core::{Attr, Atom, Clause, Formula, LayoutProblem, LinExpr, Rel, VarId, Viewport, Widget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WIDGETS: [&str; 3] = ["a", "b", "c"];

fn var(rng: &mut ChaCha8Rng) -> VarId {
    VarId::new(WIDGETS[rng.gen_range(0..3)], Attr::ALL[rng.gen_range(0..4)])
}

fn atom(rng: &mut ChaCha8Rng) -> Atom {
    let mut e = LinExpr::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let c = [-1.0, 1.0, 2.0][rng.gen_range(0..3)];
        e.add_term(var(rng), c);
    }
    e.add_constant(-(rng.gen_range(0..=20) as f64) * 5.0);
    let rel = [Rel::Le, Rel::Ge, Rel::Eq][rng.gen_range(0..3)];
    Atom::new(e, rel)
}

fn conj(rng: &mut ChaCha8Rng) -> Formula {
    match rng.gen_range(0..2) {
        0 => Formula::Atom(atom(rng)),
        _ => Formula::all([atom(rng), atom(rng)]),
    }
}

/// A random problem over 12 variables: up to 8 hard disjunctions of up to 3
/// disjuncts (some carrying preference weights) and up to 10 soft clauses.
pub fn random_problem(seed: u64) -> LayoutProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widgets: Vec<Widget> = WIDGETS.iter().map(|id| Widget::flexible(*id, 10.0, 10.0)).collect();
    let mut clauses = Vec::new();
    let mut bounds = Vec::new();
    for w in WIDGETS {
        for a in Attr::ALL {
            let v = LinExpr::var(VarId::new(w, a));
            bounds.push(v.at_least(0.0));
            bounds.push(v.at_most(100.0));
        }
    }
    clauses.push(Clause::hard("bounds", Formula::all(bounds)));
    for i in 0..rng.gen_range(0..=8) {
        let disjuncts = (0..rng.gen_range(2..=3))
            .map(|_| {
                let f = conj(&mut rng);
                if rng.gen_bool(0.3) {
                    Formula::weighted(rng.gen_range(1..=3) as f64, f)
                } else {
                    f
                }
            })
            .collect();
        clauses.push(Clause::hard(format!("or{i}"), Formula::Or(disjuncts)));
    }
    for i in 0..rng.gen_range(0..=10) {
        let w = [0.5, 1.0, 2.0, 3.0][rng.gen_range(0..4)];
        clauses.push(Clause::soft(format!("s{i}"), w, conj(&mut rng)));
    }
    LayoutProblem::raw(widgets, Viewport::new(100.0, 100.0), clauses, 1.0).expect("valid random problem")
}
