use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;
use crate::model::Priority;

/// Formula nesting beyond this is rejected rather than recursed into.
pub const MAX_DEPTH: usize = 200;

pub fn parse(src: &str) -> Result<Document, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(src);
    let mut p = Parser { toks, pos: 0, diags: Vec::new(), depth: 0 };
    let doc = p.document();
    diags.append(&mut p.diags);
    if diags.is_empty() {
        Ok(doc)
    } else {
        diags.sort_by_key(|d| (d.span.line, d.span.column));
        Err(diags)
    }
}

type PResult<T> = Result<T, ()>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&mut self, msg: impl Into<String>, span: Span) -> PResult<T> {
        self.diags.push(Diagnostic::new(msg, span));
        Err(())
    }

    fn unexpected<T>(&mut self, what: &str) -> PResult<T> {
        let found = self.peek().describe();
        self.error(format!("expected {what}, found {found}"), self.span())
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn word(&mut self, w: &str) -> PResult<Span> {
        if self.is_word(w) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{w}`"))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => Ok(Ident { name, span: self.bump().span }),
            _ => self.unexpected("identifier"),
        }
    }

    /// NUM with an optional leading minus; returns the covering span.
    fn number(&mut self) -> PResult<(f64, Span)> {
        let start = self.span();
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match *self.peek() {
            Tok::Num(v) => {
                let end = self.bump().span;
                let span = if neg { Span { len: end.column + end.len - start.column, ..start } } else { end };
                Ok((if neg { -v } else { v }, span))
            }
            _ => self.unexpected("number"),
        }
    }

    /// Skips to just past the next `;` or `}` that ends the item begun at
    /// token `start`; a `}` that closes the document is left in place.
    fn recover(&mut self, start: usize) {
        let mut depth: i64 = self.toks[start..self.pos]
            .iter()
            .map(|t| match t.tok {
                Tok::LBrace => 1,
                Tok::RBrace => -1,
                _ => 0,
            })
            .sum::<i64>()
            .max(0);
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth > 0 => {
                    depth -= 1;
                    if depth == 0 {
                        self.bump();
                        return;
                    }
                }
                Tok::RBrace => {
                    if *self.peek_at(1) != Tok::Eof {
                        self.bump();
                    }
                    return;
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn document(&mut self) -> Document {
        let mut name = String::new();
        let header = (|| -> PResult<()> {
            self.word("layout")?;
            match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    name = s;
                }
                _ => return self.unexpected("layout name string"),
            }
            self.expect(Tok::LBrace)?;
            Ok(())
        })();
        if header.is_err() {
            while !matches!(self.peek(), Tok::LBrace | Tok::Eof) {
                self.bump();
            }
            self.bump();
        }
        let mut items = Vec::new();
        loop {
            let before = self.pos;
            let item = match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    let _ = self.unexpected::<()>("`}`");
                    break;
                }
                Tok::Ident(w) => match w.as_str() {
                    "window" => self.window().map(Item::Window),
                    "widget" => self.widget().map(Item::Widget),
                    "pattern" => self.pattern().map(Item::Pattern),
                    "constraint" => self.constraint().map(Item::Constraint),
                    _ => self.unexpected("`window`, `widget`, `pattern` or `constraint`"),
                },
                _ => self.unexpected("`window`, `widget`, `pattern` or `constraint`"),
            };
            match item {
                Ok(i) => items.push(i),
                Err(()) => {
                    self.recover(before);
                    if self.pos == before {
                        self.bump();
                    }
                }
            }
        }
        if *self.peek() != Tok::Eof {
            let _ = self.unexpected::<()>("end of input");
        }
        Document { name, items }
    }

    fn window(&mut self) -> PResult<WindowDecl> {
        let span = self.word("window")?;
        self.expect(Tok::LBrace)?;
        self.word("width")?;
        self.expect(Tok::Colon)?;
        let (width, _) = self.number()?;
        self.expect(Tok::Semi)?;
        self.word("height")?;
        self.expect(Tok::Colon)?;
        let (height, _) = self.number()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        Ok(WindowDecl { width, height, span })
    }

    fn widget(&mut self) -> PResult<WidgetDecl> {
        self.word("widget")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut w = WidgetDecl { name, min: None, pref: None, max: None, priority: None };
        while *self.peek() != Tok::RBrace {
            let field = self.ident()?;
            self.expect(Tok::Colon)?;
            let dup = match field.name.as_str() {
                "min" | "pref" | "max" => {
                    let (a, _) = self.number()?;
                    match self.peek() {
                        Tok::Cross => {
                            self.bump();
                        }
                        Tok::Ident(s) if s == "x" => {
                            self.bump();
                        }
                        _ => return self.unexpected("`x`"),
                    }
                    let (b, _) = self.number()?;
                    let slot = match field.name.as_str() {
                        "min" => &mut w.min,
                        "pref" => &mut w.pref,
                        _ => &mut w.max,
                    };
                    slot.replace((a, b)).is_some()
                }
                "priority" => {
                    let p = self.ident()?;
                    let prio = match p.name.as_str() {
                        "high" => Priority::High,
                        "medium" => Priority::Medium,
                        "low" => Priority::Low,
                        _ => return self.error("expected `high`, `medium` or `low`", p.span),
                    };
                    w.priority.replace(prio).is_some()
                }
                other => return self.error(format!("unknown widget field `{other}`"), field.span),
            };
            if dup {
                return self.error(format!("duplicate field `{}`", field.name), field.span);
            }
            self.expect(Tok::Semi)?;
        }
        self.bump();
        Ok(w)
    }

    fn pattern(&mut self) -> PResult<PatternDecl> {
        self.word("pattern")?;
        let k = self.ident()?;
        let Some(kind) = PatKind::from_keyword(&k.name) else {
            return self.error(format!("unknown pattern kind `{}`", k.name), k.span);
        };
        self.expect(Tok::LParen)?;
        let mut args = vec![self.arg()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.arg()?);
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        Ok(PatternDecl { kind, args, span: k.span })
    }

    fn arg(&mut self) -> PResult<Arg> {
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let value = match self.peek() {
            Tok::Ident(_) => Value::Ident(self.ident()?),
            Tok::Num(_) | Tok::Minus => Value::Num(self.number()?.0),
            Tok::LParen => {
                self.bump();
                let mut r = [0.0; 4];
                for (i, slot) in r.iter_mut().enumerate() {
                    if i > 0 {
                        self.expect(Tok::Comma)?;
                    }
                    *slot = self.number()?.0;
                }
                self.expect(Tok::RParen)?;
                Value::Rect(r)
            }
            Tok::LBracket => {
                self.bump();
                let mut l = Vec::new();
                if *self.peek() != Tok::RBracket {
                    l.push(self.ident()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        l.push(self.ident()?);
                    }
                }
                self.expect(Tok::RBracket)?;
                Value::List(l)
            }
            _ => return self.unexpected("argument value"),
        };
        Ok(Arg { name, value })
    }

    fn constraint(&mut self) -> PResult<ConstraintDecl> {
        let span = self.word("constraint")?;
        let strength = if self.is_word("hard") {
            self.bump();
            StrengthDecl::Hard
        } else if self.is_word("soft") {
            self.bump();
            self.expect(Tok::LParen)?;
            let (w, at) = self.number()?;
            if w <= 0.0 {
                self.diags.push(Diagnostic::new("weight must be positive", at));
            }
            self.expect(Tok::RParen)?;
            StrengthDecl::Soft(w)
        } else {
            return self.unexpected("`hard` or `soft`");
        };
        self.expect(Tok::Colon)?;
        self.depth = 0;
        let formula = self.disj()?;
        self.expect(Tok::Semi)?;
        Ok(ConstraintDecl { strength, formula, span })
    }

    fn disj(&mut self) -> PResult<FormulaAst> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::OrOr {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { FormulaAst::Or(parts) })
    }

    fn conj(&mut self) -> PResult<FormulaAst> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { FormulaAst::And(parts) })
    }

    fn unary(&mut self) -> PResult<FormulaAst> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("formula nested too deeply", self.span());
        }
        let f = match self.peek() {
            Tok::Bang => {
                self.bump();
                FormulaAst::Not(Box::new(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.disj()?;
                self.expect(Tok::RParen)?;
                f
            }
            _ => {
                let lhs = self.linexpr()?;
                let rel = match self.peek() {
                    Tok::EqEq => RelOp::Eq,
                    Tok::Le => RelOp::Le,
                    Tok::Ge => RelOp::Ge,
                    Tok::Lt => RelOp::Lt,
                    Tok::Gt => RelOp::Gt,
                    _ => return self.unexpected("comparison"),
                };
                self.bump();
                FormulaAst::Atom(lhs, rel, self.linexpr()?)
            }
        };
        self.depth -= 1;
        Ok(f)
    }

    fn linexpr(&mut self) -> PResult<LinExprAst> {
        let first = self.term()?;
        let mut rest = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::Plus => AddOp::Plus,
                Tok::Minus => AddOp::Minus,
                _ => break,
            };
            self.bump();
            rest.push((op, self.term()?));
        }
        Ok(LinExprAst { first, rest })
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek() {
            Tok::Num(_) | Tok::Minus => {
                let (v, _) = self.number()?;
                if *self.peek() == Tok::Star {
                    self.bump();
                    Ok(Term::Scaled(v, self.reference()?))
                } else {
                    Ok(Term::Num(v))
                }
            }
            Tok::Ident(_) => Ok(Term::Ref(self.reference()?)),
            _ => self.unexpected("number or widget reference"),
        }
    }

    fn reference(&mut self) -> PResult<Ref> {
        let widget = self.ident()?;
        self.expect(Tok::Dot)?;
        let a = self.ident()?;
        match RefAttr::from_name(&a.name) {
            Some(attr) => Ok(Ref { widget, attr }),
            None => self.error(format!("unknown attribute `{}`", a.name), a.span),
        }
    }
}
