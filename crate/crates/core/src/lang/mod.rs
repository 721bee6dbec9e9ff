//! The layout description language: lexer, parser, canonical printer and
//! lowering to a [`LayoutProblem`](crate::LayoutProblem).

pub mod ast;
mod lexer;
mod lower;
mod parser;
mod printer;

pub use ast::*;
pub use lower::{constraint_label, lower, pattern_label, LowerError, Lowered};
pub use parser::{parse, MAX_DEPTH};
pub use printer::{formula as print_formula, print};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Diagnostic {
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(message: impl Into<String>, span: Span) -> Self {
        Diagnostic { message: message.into(), span }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)
    }
}

/// Parses and canonically reprints `src`.
pub fn format(src: &str) -> Result<String, Vec<Diagnostic>> {
    parse(src).map(|d| print(&d))
}
