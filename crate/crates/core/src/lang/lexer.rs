use super::ast::Span;
use super::Diagnostic;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    /// The `x` between the two halves of a size.
    Cross,
    OrOr,
    AndAnd,
    Bang,
    EqEq,
    Le,
    Ge,
    Lt,
    Gt,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Str(_) => "string".into(),
            Tok::Eof => "end of input".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Cross => "`x`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::Bang => "`!`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor { chars: src.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    let mut diags = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let span = |len: u32| Span { line, column, len };
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                s.push(c);
                cur.bump();
            }
            let len = s.chars().count() as u32;
            out.push(Token { tok: Tok::Ident(s), span: span(len) });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                s.push(c);
                cur.bump();
            }
            if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
                s.push('.');
                cur.bump();
                while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                    s.push(c);
                    cur.bump();
                }
            }
            let len = s.len() as u32;
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(Token { tok: Tok::Num(v), span: span(len) }),
                _ => {
                    diags.push(Diagnostic::new("number out of range", span(len)));
                    out.push(Token { tok: Tok::Num(0.0), span: span(len) });
                }
            }
            // `50x20`: split the size separator from what follows
            if cur.peek() == Some('x') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
                let at = Span { line: cur.line, column: cur.column, len: 1 };
                cur.bump();
                out.push(Token { tok: Tok::Cross, span: at });
            }
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut s = String::new();
            let mut len = 1;
            let mut closed = false;
            while let Some(c) = cur.bump() {
                len += 1;
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match cur.bump() {
                        Some(e @ ('"' | '\\')) => {
                            len += 1;
                            s.push(e);
                        }
                        Some('n') => {
                            len += 1;
                            s.push('\n');
                        }
                        Some(other) => {
                            len += 1;
                            diags.push(Diagnostic::new(format!("unknown escape `\\{other}`"), span(len)));
                        }
                        None => break,
                    },
                    '\n' => break,
                    c => s.push(c),
                }
            }
            if !closed {
                diags.push(Diagnostic::new("unterminated string", span(len)));
            }
            out.push(Token { tok: Tok::Str(s), span: span(len) });
            continue;
        }
        cur.bump();
        let two = |cur: &mut Cursor, next: char, yes: Tok, no: Option<Tok>| -> Option<(Tok, u32)> {
            if cur.peek() == Some(next) {
                cur.bump();
                Some((yes, 2))
            } else {
                no.map(|t| (t, 1))
            }
        };
        let tok = match c {
            '{' => Some((Tok::LBrace, 1)),
            '}' => Some((Tok::RBrace, 1)),
            '(' => Some((Tok::LParen, 1)),
            ')' => Some((Tok::RParen, 1)),
            '[' => Some((Tok::LBracket, 1)),
            ']' => Some((Tok::RBracket, 1)),
            ':' => Some((Tok::Colon, 1)),
            ';' => Some((Tok::Semi, 1)),
            ',' => Some((Tok::Comma, 1)),
            '.' => Some((Tok::Dot, 1)),
            '+' => Some((Tok::Plus, 1)),
            '-' => Some((Tok::Minus, 1)),
            '*' => Some((Tok::Star, 1)),
            '!' => Some((Tok::Bang, 1)),
            '|' => two(&mut cur, '|', Tok::OrOr, None),
            '&' => two(&mut cur, '&', Tok::AndAnd, None),
            '=' => two(&mut cur, '=', Tok::EqEq, None),
            '<' => two(&mut cur, '=', Tok::Le, Some(Tok::Lt)),
            '>' => two(&mut cur, '=', Tok::Ge, Some(Tok::Gt)),
            _ => None,
        };
        match tok {
            Some((tok, len)) => out.push(Token { tok, span: span(len) }),
            None => diags.push(Diagnostic::new(format!("unexpected character {c:?}"), span(1))),
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line: cur.line, column: cur.column, len: 0 } });
    (out, diags)
}
