//! Event and query surface syntax.
//!
//! ```text
//! event := or
//! or    := and ( "|" and )*
//! and   := prec ( "&" prec )*
//! prec  := unary ( "~>" unary )*          left-associative
//! unary := "!" unary | atom
//! atom  := IDENT "=" VALUE | "(" event ")"
//! VALUE := integer | "quoted string"
//!
//! query := "P(" event [ "|" step ( ";" step )* ] ")"
//! step  := "do(" event ")" | "cf(" event ")" | "see(" event ")" | event
//! ```
//!
//! The keywords `not`, `and`, `or`, `prec` are accepted in place of the
//! symbols. Inside a query the first top-level `|` is the conditioning bar,
//! so a disjunctive target must be parenthesized or written with `or`.

use crate::error::ParseError;
use crate::event::EventExpr;
use crate::transforms::PipelineStep;
use crate::tree::{Statement, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryAst {
    pub target: EventExpr,
    pub steps: Vec<PipelineStep>,
}

impl std::fmt::Display for QueryAst {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let target = match self.target {
            EventExpr::Or(..) => format!("({})", format_event(&self.target)),
            _ => format_event(&self.target),
        };
        write!(f, "P({target}")?;
        for (i, step) in self.steps.iter().enumerate() {
            f.write_str(if i == 0 { " | " } else { "; " })?;
            write!(f, "{step}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Eq,
    Bang,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    Semi,
    KwNot,
    KwAnd,
    KwOr,
    KwPrec,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Int(v) => format!("integer {v}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eq => "'='".into(),
            Tok::Bang => "'!'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Arrow => "'~>'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Semi => "';'".into(),
            Tok::KwNot => "'not'".into(),
            Tok::KwAnd => "'and'".into(),
            Tok::KwOr => "'or'".into(),
            Tok::KwPrec => "'prec'".into(),
        }
    }
}

fn err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'=' => out.push((start, Tok::Eq)),
            b'!' => out.push((start, Tok::Bang)),
            b'&' => out.push((start, Tok::Amp)),
            b'|' => out.push((start, Tok::Pipe)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b';' => out.push((start, Tok::Semi)),
            b'~' => {
                if bytes.get(i + 1) != Some(&b'>') {
                    return Err(err(start, "expected '~>'"));
                }
                i += 1;
                out.push((start, Tok::Arrow));
            }
            b'"' => {
                let mut value = String::new();
                let mut chars = input[i + 1..].char_indices();
                loop {
                    match chars.next() {
                        None => return Err(err(start, "unterminated string")),
                        Some((off, '"')) => {
                            i += off + 1;
                            break;
                        }
                        Some((off, '\\')) => match chars.next() {
                            Some((_, c @ ('"' | '\\'))) => value.push(c),
                            _ => return Err(err(i + 1 + off, "invalid escape")),
                        },
                        Some((_, c)) => value.push(c),
                    }
                }
                out.push((start, Tok::Str(value)));
            }
            b'-' | b'0'..=b'9' => {
                let mut end = i + 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                let text = &input[i..end];
                if text == "-" {
                    return Err(err(start, "expected digits after '-'"));
                }
                let value = text
                    .parse::<i64>()
                    .map_err(|_| err(start, format!("integer {text} out of range")))?;
                out.push((start, Tok::Int(value)));
                i = end;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = i + 1;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                while end < bytes.len() && bytes[end] == b'*' {
                    end += 1;
                }
                let word = &input[i..end];
                let tok = match word {
                    "not" | "NOT" => Tok::KwNot,
                    "and" | "AND" => Tok::KwAnd,
                    "or" | "OR" => Tok::KwOr,
                    "prec" | "PREC" => Tok::KwPrec,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
                i = end;
                continue;
            }
            _ => {
                let ch = input[i..].chars().next().expect("in bounds");
                return Err(err(start, format!("unexpected character {ch:?}")));
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn new(input: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(input)?,
            at: 0,
            end: input.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        tok
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(tok) => err(self.pos(), format!("expected {wanted}, found {}", tok.describe())),
            None => err(self.end, format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    /// `bar_separates`: a bare `|` ends the expression instead of forming a
    /// disjunction (query targets).
    fn event(&mut self, bar_separates: bool) -> Result<EventExpr, ParseError> {
        let mut lhs = self.and()?;
        loop {
            match self.peek() {
                Some(Tok::KwOr) => {}
                Some(Tok::Pipe) if !bar_separates => {}
                _ => return Ok(lhs),
            }
            self.at += 1;
            lhs = EventExpr::or(lhs, self.and()?);
        }
    }

    fn and(&mut self) -> Result<EventExpr, ParseError> {
        let mut lhs = self.prec()?;
        while matches!(self.peek(), Some(Tok::Amp | Tok::KwAnd)) {
            self.at += 1;
            lhs = EventExpr::and(lhs, self.prec()?);
        }
        Ok(lhs)
    }

    fn prec(&mut self) -> Result<EventExpr, ParseError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek(), Some(Tok::Arrow | Tok::KwPrec)) {
            self.at += 1;
            lhs = EventExpr::prec(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<EventExpr, ParseError> {
        if matches!(self.peek(), Some(Tok::Bang | Tok::KwNot)) {
            self.at += 1;
            return Ok(EventExpr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<EventExpr, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.event(false)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(_)) => {
                let Some(Tok::Ident(variable)) = self.bump() else {
                    unreachable!()
                };
                self.expect(Tok::Eq, "'='")?;
                let value = match self.peek() {
                    Some(Tok::Int(_)) | Some(Tok::Str(_)) => match self.bump() {
                        Some(Tok::Int(v)) => Value::Int(v),
                        Some(Tok::Str(s)) => Value::Str(s),
                        _ => unreachable!(),
                    },
                    _ => return Err(self.unexpected("an integer or quoted string")),
                };
                Ok(EventExpr::Atom(Statement { variable, value }))
            }
            _ => Err(self.unexpected("a statement or '('")),
        }
    }

    fn step(&mut self) -> Result<PipelineStep, ParseError> {
        if let (Some(Tok::Ident(word)), Some(Tok::LParen)) = (self.peek(), self.peek2()) {
            let make: fn(EventExpr) -> PipelineStep = match word.as_str() {
                "do" => PipelineStep::Do,
                "cf" => PipelineStep::Cf,
                "see" => PipelineStep::See,
                other => {
                    return Err(err(
                        self.pos(),
                        format!("unknown step {other:?}; expected do, cf or see"),
                    ))
                }
            };
            self.at += 2;
            let inner = self.event(false)?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(make(inner));
        }
        Ok(PipelineStep::See(self.event(false)?))
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of input")),
        }
    }
}

pub fn parse_event(text: &str) -> Result<EventExpr, ParseError> {
    let mut p = Parser::new(text)?;
    if p.peek().is_none() {
        return Err(err(0, "empty input"));
    }
    let e = p.event(false)?;
    p.finish()?;
    Ok(e)
}

/// Parses a single pipeline step, e.g. `do(Y=1)` or a bare event.
pub fn parse_step(text: &str) -> Result<PipelineStep, ParseError> {
    let mut p = Parser::new(text)?;
    if p.peek().is_none() {
        return Err(err(0, "empty input"));
    }
    let step = p.step()?;
    p.finish()?;
    Ok(step)
}

pub fn parse_query(text: &str) -> Result<QueryAst, ParseError> {
    let mut p = Parser::new(text)?;
    if p.peek().is_none() {
        return Err(err(0, "empty input"));
    }
    match (p.peek(), p.peek2()) {
        (Some(Tok::Ident(w)), Some(Tok::LParen)) if w == "P" => p.at += 2,
        _ => return Err(p.unexpected("'P('")),
    }
    let target = p.event(true)?;
    let mut steps = Vec::new();
    if p.peek() == Some(&Tok::Pipe) {
        p.at += 1;
        steps.push(p.step()?);
        while p.peek() == Some(&Tok::Semi) {
            p.at += 1;
            steps.push(p.step()?);
        }
    }
    p.expect(Tok::RParen, "')'")?;
    p.finish()?;
    Ok(QueryAst { target, steps })
}

fn level(e: &EventExpr) -> u8 {
    match e {
        EventExpr::Or(..) => 1,
        EventExpr::And(..) => 2,
        EventExpr::Prec { .. } => 3,
        EventExpr::Not(_) => 4,
        EventExpr::Atom(_) => 5,
    }
}

fn write_event(e: &EventExpr, out: &mut String) {
    let operand = |child: &EventExpr, min: u8, out: &mut String| {
        if level(child) < min {
            out.push('(');
            write_event(child, out);
            out.push(')');
        } else {
            write_event(child, out);
        }
    };
    let binary = |a: &EventExpr, op: &str, b: &EventExpr, own: u8, out: &mut String| {
        operand(a, own, out);
        out.push_str(op);
        // Left-associative: an equal-level right operand needs parentheses.
        operand(b, own + 1, out);
    };
    match e {
        EventExpr::Atom(s) => out.push_str(&s.to_string()),
        EventExpr::Not(inner) => {
            out.push('!');
            operand(inner, 4, out);
        }
        EventExpr::And(a, b) => binary(a, " & ", b, 2, out),
        EventExpr::Or(a, b) => binary(a, " | ", b, 1, out),
        EventExpr::Prec { cause, effect } => binary(cause, " ~> ", effect, 3, out),
    }
}

/// Prints with the fewest parentheses that still parse back to `e`.
pub fn format_event(e: &EventExpr) -> String {
    let mut out = String::new();
    write_event(e, &mut out);
    out
}
