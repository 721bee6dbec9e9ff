use crate::model::{Attr, Priority};

/// Source location: 1-based line and column (in chars), length in chars.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub len: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Ident {
        Ident { name: name.into(), span: Span::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub name: String,
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Window(WindowDecl),
    Widget(WidgetDecl),
    Pattern(PatternDecl),
    Constraint(ConstraintDecl),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowDecl {
    pub width: f64,
    pub height: f64,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WidgetDecl {
    pub name: Ident,
    pub min: Option<(f64, f64)>,
    pub pref: Option<(f64, f64)>,
    pub max: Option<(f64, f64)>,
    pub priority: Option<Priority>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatKind {
    HFlow,
    VFlow,
    EitherFlow,
    RotateGroup,
    Equalize,
    Connected,
    Balanced,
    AltPositions,
    AltWidgets,
    Optional,
    FlowAround,
}

impl PatKind {
    pub const ALL: [PatKind; 11] = [
        PatKind::HFlow,
        PatKind::VFlow,
        PatKind::EitherFlow,
        PatKind::RotateGroup,
        PatKind::Equalize,
        PatKind::Connected,
        PatKind::Balanced,
        PatKind::AltPositions,
        PatKind::AltWidgets,
        PatKind::Optional,
        PatKind::FlowAround,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            PatKind::HFlow => "hflow",
            PatKind::VFlow => "vflow",
            PatKind::EitherFlow => "eitherflow",
            PatKind::RotateGroup => "rotate_group",
            PatKind::Equalize => "equalize",
            PatKind::Connected => "connected",
            PatKind::Balanced => "balanced",
            PatKind::AltPositions => "alt_positions",
            PatKind::AltWidgets => "alt_widgets",
            PatKind::Optional => "optional",
            PatKind::FlowAround => "flow_around",
        }
    }

    pub fn from_keyword(s: &str) -> Option<PatKind> {
        PatKind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternDecl {
    pub kind: PatKind,
    pub args: Vec<Arg>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Ident,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Ident(Ident),
    Num(f64),
    Rect([f64; 4]),
    List(Vec<Ident>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrengthDecl {
    Hard,
    Soft(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintDecl {
    pub strength: StrengthDecl,
    pub formula: FormulaAst,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FormulaAst {
    Or(Vec<FormulaAst>),
    And(Vec<FormulaAst>),
    Not(Box<FormulaAst>),
    Atom(LinExprAst, RelOp, LinExprAst),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "==",
            RelOp::Le => "<=",
            RelOp::Ge => ">=",
            RelOp::Lt => "<",
            RelOp::Gt => ">",
        }
    }
}

/// `first (op term)*`; only the first term's number may be negative.
#[derive(Clone, Debug, PartialEq)]
pub struct LinExprAst {
    pub first: Term,
    pub rest: Vec<(AddOp, Term)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddOp {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Num(f64),
    Scaled(f64, Ref),
    Ref(Ref),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefAttr {
    Var(Attr),
    Right,
    Bottom,
}

impl RefAttr {
    pub fn name(self) -> &'static str {
        match self {
            RefAttr::Var(a) => a.name(),
            RefAttr::Right => "right",
            RefAttr::Bottom => "bottom",
        }
    }

    pub fn from_name(s: &str) -> Option<RefAttr> {
        Some(match s {
            "left" => RefAttr::Var(Attr::Left),
            "top" => RefAttr::Var(Attr::Top),
            "width" => RefAttr::Var(Attr::Width),
            "height" => RefAttr::Var(Attr::Height),
            "right" => RefAttr::Right,
            "bottom" => RefAttr::Bottom,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ref {
    pub widget: Ident,
    pub attr: RefAttr,
}

impl Document {
    /// Resets every span so documents compare by content alone.
    pub fn without_spans(mut self) -> Document {
        fn id(i: &mut Ident) {
            i.span = Span::default();
        }
        fn lin(e: &mut LinExprAst) {
            for t in std::iter::once(&mut e.first).chain(e.rest.iter_mut().map(|(_, t)| t)) {
                if let Term::Scaled(_, r) | Term::Ref(r) = t {
                    id(&mut r.widget);
                }
            }
        }
        fn formula(f: &mut FormulaAst) {
            match f {
                FormulaAst::Or(ch) | FormulaAst::And(ch) => ch.iter_mut().for_each(formula),
                FormulaAst::Not(c) => formula(c),
                FormulaAst::Atom(l, _, r) => {
                    lin(l);
                    lin(r);
                }
            }
        }
        for item in &mut self.items {
            match item {
                Item::Window(w) => w.span = Span::default(),
                Item::Widget(w) => id(&mut w.name),
                Item::Pattern(p) => {
                    p.span = Span::default();
                    for a in &mut p.args {
                        id(&mut a.name);
                        match &mut a.value {
                            Value::Ident(i) => id(i),
                            Value::List(l) => l.iter_mut().for_each(id),
                            Value::Num(_) | Value::Rect(_) => {}
                        }
                    }
                }
                Item::Constraint(c) => {
                    c.span = Span::default();
                    formula(&mut c.formula);
                }
            }
        }
        self
    }
}
