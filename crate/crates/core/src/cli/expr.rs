//! Observable expressions over the phase variables `x` and `xi`.
//!
//! Grammar (`-` is also accepted as a prefix sign on any factor):
//!
//! ```text
//! expression ::= term (('+' | '-') term)*
//! term       ::= factor ('*' factor)*
//! factor     ::= '-' factor | atom ('^' integer)?
//! atom       ::= 'x' | 'xi' | number | 'exp' '(' expression ')' | '(' expression ')'
//! ```

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Xi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

/// How an observable can be quantized most cheaply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    PositionOnly,
    MomentumOnly,
    Split,
    General,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the token and its starting offset without consuming it.
    fn peek(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start, start));
        };
        if c.is_ascii_digit() || c == '.' {
            let bytes = rest.as_bytes();
            let mut i = 0;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                let digits = j;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j > digits {
                    i = j;
                }
            }
            let text = &rest[..i];
            return match text.parse::<f64>() {
                Ok(v) => Ok((Tok::Num(v), start, start + i)),
                Err(_) => Err(ParseError { offset: start, expected: vec!["number"], found: format!("'{text}'") }),
            };
        }
        if c.is_ascii_alphabetic() {
            let len = rest.find(|ch: char| !ch.is_ascii_alphanumeric() && ch != '_').unwrap_or(rest.len());
            return Ok((Tok::Ident(rest[..len].to_string()), start, start + len));
        }
        Ok((Tok::Sym(c), start, start + c.len_utf8()))
    }

    fn bump(&mut self, end: usize) {
        self.pos = end;
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::End => "end of input".to_string(),
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
}

impl Parser<'_> {
    fn error<T>(&self, tok: &Tok, offset: usize, expected: Vec<&'static str>) -> Result<T, ParseError> {
        Err(ParseError { offset, expected, found: describe(tok) })
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let (tok, _, end) = self.lex.peek()?;
            match tok {
                Tok::Sym('+') => {
                    self.lex.bump(end);
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.lex.bump(end);
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let (tok, _, end) = self.lex.peek()?;
            if tok == Tok::Sym('*') {
                self.lex.bump(end);
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let (tok, _, end) = self.lex.peek()?;
        if tok == Tok::Sym('-') {
            self.lex.bump(end);
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        let (tok, _, end) = self.lex.peek()?;
        if tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.lex.bump(end);
        let (tok, off, end) = self.lex.peek()?;
        match tok {
            Tok::Num(v) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 && !self.lex.src[off..end].contains(['.', 'e', 'E']) => {
                self.lex.bump(end);
                Ok(Expr::Pow(Box::new(base), v as u32))
            }
            other => self.error(&other, off, vec!["integer"]),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, off, end) = self.lex.peek()?;
        match tok {
            Tok::Num(v) => {
                self.lex.bump(end);
                Ok(Expr::Num(v))
            }
            Tok::Ident(ref s) if s == "x" => {
                self.lex.bump(end);
                Ok(Expr::X)
            }
            Tok::Ident(ref s) if s == "xi" => {
                self.lex.bump(end);
                Ok(Expr::Xi)
            }
            Tok::Ident(ref s) if s == "exp" => {
                self.lex.bump(end);
                self.expect('(')?;
                let inner = self.expression()?;
                self.expect(')')?;
                Ok(Expr::Exp(Box::new(inner)))
            }
            Tok::Sym('(') => {
                self.lex.bump(end);
                let inner = self.expression()?;
                self.expect(')')?;
                Ok(inner)
            }
            other => self.error(&other, off, vec!["'x'", "'xi'", "number", "'exp'", "'('"]),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        let (tok, off, end) = self.lex.peek()?;
        if tok == Tok::Sym(c) {
            self.lex.bump(end);
            Ok(())
        } else {
            let expected = if c == '(' { "'('" } else { "')'" };
            self.error(&tok, off, vec![expected])
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { lex: Lexer { src: text, pos: 0 } };
    let e = p.expression()?;
    let (tok, off, _) = p.lex.peek()?;
    if tok != Tok::End {
        return p.error(&tok, off, vec!["operator", "end of input"]);
    }
    Ok(e)
}

impl Expr {
    /// Reference tree-walking evaluator.
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Xi => xi,
            Expr::Neg(a) => -a.eval(x, xi),
            Expr::Add(a, b) => a.eval(x, xi) + b.eval(x, xi),
            Expr::Sub(a, b) => a.eval(x, xi) - b.eval(x, xi),
            Expr::Mul(a, b) => a.eval(x, xi) * b.eval(x, xi),
            Expr::Pow(a, n) => a.eval(x, xi).powi(*n as i32),
            Expr::Exp(a) => a.eval(x, xi).exp(),
        }
    }

    pub fn uses_x(&self) -> bool {
        self.any(&|e| matches!(e, Expr::X))
    }

    pub fn uses_xi(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Xi))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self)
            || match self {
                Expr::Num(_) | Expr::X | Expr::Xi => false,
                Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) => a.any(pred),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.any(pred) || b.any(pred),
            }
    }

    /// Top-level additive terms with their signs.
    fn summands(&self, sign: f64, out: &mut Vec<(f64, Expr)>) {
        match self {
            Expr::Add(a, b) => {
                a.summands(sign, out);
                b.summands(sign, out);
            }
            Expr::Sub(a, b) => {
                a.summands(sign, out);
                b.summands(-sign, out);
            }
            Expr::Neg(a) => a.summands(-sign, out),
            e => out.push((sign, e.clone())),
        }
    }

    /// Write the expression as `f(x) + g(xi)` when every summand depends on
    /// at most one variable; constants go into `f`.
    pub fn split_parts(&self) -> Option<(Expr, Expr)> {
        let mut terms = Vec::new();
        self.summands(1.0, &mut terms);
        let mut f = Expr::Num(0.0);
        let mut g = Expr::Num(0.0);
        for (s, t) in terms {
            let target = match (t.uses_x(), t.uses_xi()) {
                (true, true) => return None,
                (_, true) => &mut g,
                _ => &mut f,
            };
            let prev = std::mem::replace(target, Expr::Num(0.0));
            *target = if s > 0.0 { Expr::Add(Box::new(prev), Box::new(t)) } else { Expr::Sub(Box::new(prev), Box::new(t)) };
        }
        Some((f, g))
    }

    pub fn routing(&self) -> Routing {
        match (self.uses_x(), self.uses_xi()) {
            (_, false) => Routing::PositionOnly,
            (false, true) => Routing::MomentumOnly,
            (true, true) if self.split_parts().is_some() => Routing::Split,
            _ => Routing::General,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool| {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => write!(f, "({v:?})"),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => write!(f, "x"),
            Expr::Xi => write!(f, "xi"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, a.precedence() < 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                wrap(f, a, a.precedence() < 1)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { '+' } else { '-' })?;
                wrap(f, b, b.precedence() <= 1)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, a.precedence() < 2)?;
                write!(f, "*")?;
                wrap(f, b, b.precedence() <= 2)
            }
            Expr::Pow(a, n) => {
                wrap(f, a, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Num(f64),
    X,
    Xi,
    Neg,
    Add,
    Sub,
    Mul,
    Pow(u32),
    Exp,
}

const STACK: usize = 32;

/// Flat postfix program for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    ops: Vec<Op>,
    fallback: Option<Expr>,
}

impl Compiled {
    pub fn new(expr: &Expr) -> Self {
        let mut ops = Vec::new();
        let depth = emit(expr, &mut ops);
        Self { ops, fallback: (depth > STACK).then(|| expr.clone()) }
    }

    #[inline]
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        if let Some(e) = &self.fallback {
            return e.eval(x, xi);
        }
        let mut stack = [0.0f64; STACK];
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Num(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Op::X => {
                    stack[sp] = x;
                    sp += 1;
                }
                Op::Xi => {
                    stack[sp] = xi;
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Exp => stack[sp - 1] = stack[sp - 1].exp(),
                Op::Pow(n) => stack[sp - 1] = stack[sp - 1].powi(n as i32),
                Op::Add | Op::Sub | Op::Mul => {
                    sp -= 1;
                    let b = stack[sp];
                    let a = &mut stack[sp - 1];
                    match op {
                        Op::Add => *a += b,
                        Op::Sub => *a -= b,
                        _ => *a *= b,
                    }
                }
            }
        }
        stack[0]
    }
}

/// Emit postfix code; returns the stack depth needed.
fn emit(e: &Expr, ops: &mut Vec<Op>) -> usize {
    match e {
        Expr::Num(v) => {
            ops.push(Op::Num(*v));
            1
        }
        Expr::X => {
            ops.push(Op::X);
            1
        }
        Expr::Xi => {
            ops.push(Op::Xi);
            1
        }
        Expr::Neg(a) | Expr::Exp(a) | Expr::Pow(a, _) => {
            let d = emit(a, ops);
            ops.push(match e {
                Expr::Neg(_) => Op::Neg,
                Expr::Exp(_) => Op::Exp,
                Expr::Pow(_, n) => Op::Pow(*n),
                _ => unreachable!(),
            });
            d
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            let da = emit(a, ops);
            let db = emit(b, ops);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                _ => Op::Mul,
            });
            da.max(db + 1)
        }
    }
}
