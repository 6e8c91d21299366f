//! Arithmetic expressions over point coordinates or trailing word symbols.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! or      := and ( "||" and )*
//! and     := cmp ( "&&" cmp )*
//! cmp     := sum ( ("<" | "<=" | ">" | ">=" | "==" | "!=") sum )?
//! sum     := product ( ("+" | "-") product )*
//! product := unary ( ("*" | "/") unary )*
//! unary   := ("-" | "!") unary | power
//! power   := atom ( "^" unary )?
//! atom    := number | ident | ident "(" args ")" | "(" or ")"
//! ```
//!
//! Identifiers: `x0, x1, ...` (coordinates), `s0, s1, ...` (word symbols,
//! `s0` the most recent), constants `pi` and `euler`. Functions: `sin cos exp
//! log sqrt abs min max` and the lazy conditional `if(cond, then, else)`.
//! Comparisons and logic return 1 or 0; any non-zero value is true.
//!
//! Singular evaluations (log of a non-positive number, division by zero,
//! non-finite results) are reported as [`Error::Domain`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Coord(usize),
    Symbol(usize),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

/// Variable bindings for one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Bindings<'a, T> {
    pub coords: &'a [T],
    /// Word symbols, oldest first; `s0` is the last entry.
    pub symbols: &'a [u32],
}

impl<'a, T> Bindings<'a, T> {
    pub fn coords(coords: &'a [T]) -> Self {
        Bindings { coords, symbols: &[] }
    }

    pub fn symbols(symbols: &'a [u32]) -> Self {
        Bindings { coords: &[], symbols }
    }
}

fn truth<T: Scalar>(v: T) -> bool {
    v != T::zero()
}

fn flag<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

fn finite<T: Scalar>(v: T, what: impl FnOnce() -> String) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(what()))
    }
}

impl Expr {
    pub fn eval<T: Scalar>(&self, vars: &Bindings<'_, T>) -> Result<T> {
        match self {
            Expr::Num(v) => Ok(T::lit(*v)),
            Expr::Const(Constant::Pi) => Ok(T::PI()),
            Expr::Const(Constant::Euler) => Ok(T::E()),
            Expr::Coord(i) => vars
                .coords
                .get(*i)
                .copied()
                .ok_or_else(|| Error::Domain(format!("x{i} is not defined for this point"))),
            Expr::Symbol(k) => {
                let n = vars.symbols.len();
                if *k < n {
                    Ok(T::from_u32(vars.symbols[n - 1 - k]).expect("symbol fits scalar"))
                } else {
                    Err(Error::Domain(format!("s{k} is beyond a word of length {n}")))
                }
            }
            Expr::Neg(a) => Ok(-a.eval(vars)?),
            Expr::Not(a) => Ok(flag(!truth(a.eval(vars)?))),
            Expr::If(c, a, b) => {
                if truth(c.eval(vars)?) {
                    a.eval(vars)
                } else {
                    b.eval(vars)
                }
            }
            Expr::Binary(op, a, b) => {
                let l = a.eval(vars)?;
                // short-circuit so that guarded singular branches never run
                match op {
                    BinOp::And if !truth(l) => return Ok(T::zero()),
                    BinOp::Or if truth(l) => return Ok(T::one()),
                    _ => {}
                }
                let r = b.eval(vars)?;
                match op {
                    BinOp::Add => finite(l + r, || format!("{l} + {r} overflows")),
                    BinOp::Sub => finite(l - r, || format!("{l} - {r} overflows")),
                    BinOp::Mul => finite(l * r, || format!("{l} * {r} overflows")),
                    BinOp::Div => {
                        if r == T::zero() {
                            Err(Error::Domain(format!("division of {l} by zero")))
                        } else {
                            finite(l / r, || format!("{l} / {r} overflows"))
                        }
                    }
                    BinOp::Pow => finite(l.powf(r), || format!("{l} ^ {r} is undefined")),
                    BinOp::Lt => Ok(flag(l < r)),
                    BinOp::Le => Ok(flag(l <= r)),
                    BinOp::Gt => Ok(flag(l > r)),
                    BinOp::Ge => Ok(flag(l >= r)),
                    BinOp::Eq => Ok(flag(l == r)),
                    BinOp::Ne => Ok(flag(l != r)),
                    BinOp::And | BinOp::Or => Ok(flag(truth(r))),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(vars)?;
                match f {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Exp => finite(a.exp(), || format!("exp({a}) overflows")),
                    Func::Log => {
                        if a > T::zero() {
                            Ok(a.ln())
                        } else {
                            Err(Error::Domain(format!("log({a})")))
                        }
                    }
                    Func::Sqrt => {
                        if a >= T::zero() {
                            Ok(a.sqrt())
                        } else {
                            Err(Error::Domain(format!("sqrt({a})")))
                        }
                    }
                    Func::Abs => Ok(a.abs()),
                    Func::Min => Ok(a.min(args[1].eval(vars)?)),
                    Func::Max => Ok(a.max(args[1].eval(vars)?)),
                }
            }
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        self.fold_max(&|e| match e {
            Expr::Coord(i) => Some(*i),
            _ => None,
        })
    }

    /// Largest symbol lag referenced, if any.
    pub fn max_symbol(&self) -> Option<usize> {
        self.fold_max(&|e| match e {
            Expr::Symbol(k) => Some(*k),
            _ => None,
        })
    }

    fn fold_max(&self, leaf: &dyn Fn(&Expr) -> Option<usize>) -> Option<usize> {
        let children: Vec<&Expr> = match self {
            Expr::Neg(a) | Expr::Not(a) => vec![a],
            Expr::Binary(_, a, b) => vec![a, b],
            Expr::Call(_, args) => args.iter().collect(),
            Expr::If(c, a, b) => vec![c, a, b],
            _ => return leaf(self),
        };
        children.into_iter().filter_map(|c| c.fold_max(leaf)).max()
    }

    /// Rewrites an expression over the word `σ·e` into one over `σ`:
    /// `s0` becomes the literal `e` and `s{k}` becomes `s{k-1}`.
    pub fn shift_symbols(&self, appended: u32) -> Expr {
        let rec = |e: &Expr| Box::new(e.shift_symbols(appended));
        match self {
            Expr::Symbol(0) => Expr::Num(f64::from(appended)),
            Expr::Symbol(k) => Expr::Symbol(k - 1),
            Expr::Num(_) | Expr::Const(_) | Expr::Coord(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(rec(a)),
            Expr::Not(a) => Expr::Not(rec(a)),
            Expr::Binary(op, a, b) => Expr::Binary(*op, rec(a), rec(b)),
            Expr::Call(f, args) => {
                Expr::Call(*f, args.iter().map(|a| a.shift_symbols(appended)).collect())
            }
            Expr::If(c, a, b) => Expr::If(rec(c), rec(a), rec(b)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::Euler) => f.write_str("euler"),
            Expr::Coord(i) => write!(f, "x{i}"),
            Expr::Symbol(k) => write!(f, "s{k}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Not(a) => write!(f, "(!{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::If(c, a, b) => write!(f, "if({c}, {a}, {b})"),
        }
    }
}

/// A parsed expression that remembers its source text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Expression {
    source: String,
    ast: Expr,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        Ok(Expression {
            source: source.trim().to_string(),
            ast: Parser::new(source).parse_all()?,
        })
    }

    pub fn from_ast(ast: Expr) -> Self {
        Expression {
            source: ast.to_string(),
            ast,
        }
    }

    pub fn constant(v: f64) -> Self {
        Expression {
            source: format!("{v}"),
            ast: Expr::Num(v),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn eval<T: Scalar>(&self, vars: &Bindings<'_, T>) -> Result<T> {
        self.ast.eval(vars)
    }

    /// Evaluates as a predicate (non-zero is true).
    pub fn holds<T: Scalar>(&self, vars: &Bindings<'_, T>) -> Result<bool> {
        self.ast.eval(vars).map(truth)
    }
}

impl TryFrom<String> for Expression {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Expression::parse(&s)
    }
}

impl From<Expression> for String {
    fn from(e: Expression) -> String {
        e.source
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
    lex_error: Option<Error>,
}

const OPERATORS: [&str; 17] = [
    "||", "&&", "<=", ">=", "==", "!=", "<", ">", "+", "-", "*", "/", "^", "!", "(", ")", ",",
];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("bad number `{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
            continue;
        }
        let rest = &src[i..];
        let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        };
        let tok = match *op {
            "(" => Tok::LParen,
            ")" => Tok::RParen,
            "," => Tok::Comma,
            other => Tok::Op(other),
        };
        out.push((i, tok));
        i += op.len();
    }
    Ok(out)
}

impl Parser {
    fn new(src: &str) -> Self {
        match lex(src) {
            Ok(toks) => Parser {
                toks,
                pos: 0,
                len: src.len(),
                lex_error: None,
            },
            Err(e) => Parser {
                toks: Vec::new(),
                pos: 0,
                len: src.len(),
                lex_error: Some(e),
            },
        }
    }

    fn err<X>(&self, msg: impl Into<String>) -> Result<X> {
        let pos = self.toks.get(self.pos).map_or(self.len, |t| t.0);
        Err(Error::Parse {
            pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &[&'static str]) -> Option<&'static str> {
        if let Some(Tok::Op(op)) = self.peek() {
            if let Some(hit) = ops.iter().find(|o| **o == *op) {
                self.pos += 1;
                return Some(hit);
            }
        }
        None
    }

    fn parse_all(mut self) -> Result<Expr> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        if self.toks.is_empty() {
            return self.err("empty expression");
        }
        let e = self.or()?;
        if self.pos < self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok(e)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while self.eat_op(&["||"]).is_some() {
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.cmp()?;
        while self.eat_op(&["&&"]).is_some() {
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(self.cmp()?));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr> {
        let lhs = self.sum()?;
        let op = match self.eat_op(&["<=", ">=", "==", "!=", "<", ">"]) {
            Some("<") => BinOp::Lt,
            Some("<=") => BinOp::Le,
            Some(">") => BinOp::Gt,
            Some(">=") => BinOp::Ge,
            Some("==") => BinOp::Eq,
            Some("!=") => BinOp::Ne,
            _ => return Ok(lhs),
        };
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(self.sum()?)))
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while let Some(op) = self.eat_op(&["+", "-"]) {
            let op = if op == "+" { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&["*", "/"]) {
            let op = if op == "*" { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.eat_op(&["-", "!"]) {
            Some("-") => Ok(Expr::Neg(Box::new(self.unary()?))),
            Some(_) => Ok(Expr::Not(Box::new(self.unary()?))),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op(&["^"]).is_some() {
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.or()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => {
                        self.pos -= 1;
                        self.err("expected `)`")
                    }
                }
            }
            Some(Tok::Ident(name)) => self.ident(name),
            _ => {
                self.pos -= 1;
                self.err("expected a number, identifier or `(`")
            }
        }
    }

    fn ident(&mut self, name: String) -> Result<Expr> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.or()?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            if self.next() != Some(Tok::RParen) {
                self.pos -= 1;
                return self.err("expected `)` after arguments");
            }
            if name == "if" {
                if args.len() != 3 {
                    return self.err("if() takes 3 arguments");
                }
                let mut it = args.into_iter().map(Box::new);
                let (c, a, b) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                return Ok(Expr::If(c, a, b));
            }
            let Some(func) = Func::from_name(&name) else {
                return self.err(format!("unknown function `{name}`"));
            };
            if args.len() != func.arity() {
                return self.err(format!("{name}() takes {} argument(s)", func.arity()));
            }
            return Ok(Expr::Call(func, args));
        }
        match name.as_str() {
            "pi" => return Ok(Expr::Const(Constant::Pi)),
            "euler" => return Ok(Expr::Const(Constant::Euler)),
            _ => {}
        }
        let indexed = |prefix: char| {
            name.strip_prefix(prefix)
                .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|rest| rest.parse::<usize>().ok())
        };
        if let Some(i) = indexed('x') {
            return Ok(Expr::Coord(i));
        }
        if let Some(k) = indexed('s') {
            return Ok(Expr::Symbol(k));
        }
        self.pos -= 1;
        self.err(format!("unknown identifier `{name}`"))
    }
}
