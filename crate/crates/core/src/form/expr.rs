//! A small infix expression language over `P`, `Q`, `t` and `nu`.
//!
//! Expressions are parsed once into a tree and evaluated with any [`Real`]
//! type, so derivatives of user-supplied functions come for free.

use std::collections::BTreeSet;
use std::fmt;

use crate::ad::Real;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    P,
    Q,
    T,
    Nu,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::P => "P",
            Var::Q => "Q",
            Var::T => "t",
            Var::Nu => "nu",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sinh,
    Cosh,
    Tanh,
    Atan,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "atan" => Func::Atan,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Values bound to the variables of an expression.
#[derive(Clone, Copy, Debug)]
pub struct Bindings<T> {
    pub p: Option<T>,
    pub q: Option<T>,
    pub t: Option<T>,
    pub nu: Option<T>,
}

impl<T> Default for Bindings<T> {
    fn default() -> Self {
        Bindings {
            p: None,
            q: None,
            t: None,
            nu: None,
        }
    }
}

/// A parsed expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, len: src.len() };
        let root = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(Error::Syntax {
                pos: tok.pos,
                msg: format!("unexpected {}", tok.kind),
            });
        }
        Ok(Expr {
            source: src.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        fn walk(n: &Node, out: &mut BTreeSet<Var>) {
            match n {
                Node::Num(_) => {}
                Node::Var(v) => {
                    out.insert(*v);
                }
                Node::Neg(a) | Node::Call(_, a) => walk(a, out),
                Node::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.root, &mut out);
        out
    }

    /// Fails unless every variable of the expression is in `allowed`.
    pub fn require_only(&self, allowed: &[Var]) -> Result<()> {
        for v in self.variables() {
            if !allowed.contains(&v) {
                return Err(Error::Config(format!(
                    "`{}` may not use the variable {v}",
                    self.source
                )));
            }
        }
        Ok(())
    }

    pub fn eval<T: Real>(&self, b: &Bindings<T>) -> Result<T> {
        eval_node(&self.root, b)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn eval_node<T: Real>(n: &Node, b: &Bindings<T>) -> Result<T> {
    Ok(match n {
        Node::Num(c) => T::cst(*c),
        Node::Var(v) => {
            let val = match v {
                Var::P => b.p,
                Var::Q => b.q,
                Var::T => b.t,
                Var::Nu => b.nu,
            };
            val.ok_or_else(|| Error::precondition(format!("variable {v} is not bound")))?
        }
        Node::Neg(a) => -eval_node(a, b)?,
        Node::Bin(op, l, r) => {
            let x = eval_node(l, b)?;
            match op {
                BinOp::Pow => return pow(x, r, b),
                _ => {
                    let y = eval_node(r, b)?;
                    match op {
                        BinOp::Add => x + y,
                        BinOp::Sub => x - y,
                        BinOp::Mul => x * y,
                        BinOp::Div => {
                            if y.value() == 0.0 {
                                return Err(Error::domain("division by zero"));
                            }
                            x / y
                        }
                        BinOp::Pow => unreachable!(),
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, b)?;
            let v = x.value();
            match f {
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(Error::domain(format!("sqrt of negative argument {v}")));
                    }
                    x.sqrt()
                }
                Func::Ln => {
                    if v <= 0.0 {
                        return Err(Error::domain(format!("ln of non-positive argument {v}")));
                    }
                    x.ln()
                }
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Atan => x.atan(),
                Func::Abs => x.abs(),
            }
        }
    })
}

/// Constant exponents that are integers or half-integers are expanded into
/// `powi` and `sqrt`; anything else goes through `exp(y ln x)`.
fn pow<T: Real>(x: T, exponent: &Node, b: &Bindings<T>) -> Result<T> {
    if let Some(c) = constant_value(exponent) {
        let twice = 2.0 * c;
        if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
            if c < 0.0 && x.value() == 0.0 {
                return Err(Error::domain("zero raised to a negative power"));
            }
            return Ok(x.powi(c as i32));
        }
        if twice.fract() == 0.0 && twice.abs() <= i32::MAX as f64 {
            if x.value() < 0.0 {
                return Err(Error::domain("half-integer power of a negative number"));
            }
            if x.value() == 0.0 && c < 0.0 {
                return Err(Error::domain("zero raised to a negative power"));
            }
            return Ok(x.sqrt().powi(twice as i32));
        }
    }
    let y = eval_node(exponent, b)?;
    if x.value() <= 0.0 {
        return Err(Error::domain("non-integer power of a non-positive number"));
    }
    Ok((y * x.ln()).exp())
}

fn constant_value(n: &Node) -> Option<f64> {
    match n {
        Node::Num(c) => Some(*c),
        Node::Neg(a) => constant_value(a).map(|v| -v),
        Node::Bin(op, l, r) => {
            let (x, y) = (constant_value(l)?, constant_value(r)?);
            Some(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
            })
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Num(v) => write!(f, "number {v}"),
            TokKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokKind::Op(c) => write!(f, "`{c}`"),
            TokKind::LParen => f.write_str("`(`"),
            TokKind::RParen => f.write_str("`)`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokKind,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
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
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("malformed number `{text}`"),
            })?;
            TokKind::Num(v)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokKind::Ident(src[start..i].to_string())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => TokKind::Op(c),
                '(' => TokKind::LParen,
                ')' => TokKind::RParen,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or(c);
                    return Err(Error::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{ch}`"),
                    });
                }
            }
        };
        out.push(Token { kind, pos: start });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Op(c),
                ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn end_error(&self, what: &str) -> Error {
        Error::Syntax {
            pos: self.len,
            msg: format!("unexpected end of input, expected {what}"),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op(&['+']).is_some() {
            return self.unary();
        }
        self.power()
    }

    // `-x^2` is `-(x^2)` and `2^-1` is allowed; `^` binds right to left.
    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.next().ok_or_else(|| self.end_error("a number, variable or `(`"))?;
        match tok.kind {
            TokKind::Num(v) => Ok(Node::Num(v)),
            TokKind::LParen => {
                let inner = self.expr()?;
                self.close(tok.pos)?;
                Ok(inner)
            }
            TokKind::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    match self.next() {
                        Some(Token {
                            kind: TokKind::LParen,
                            pos,
                        }) => {
                            let arg = self.expr()?;
                            self.close(pos)?;
                            Ok(Node::Call(f, Box::new(arg)))
                        }
                        Some(t) => Err(Error::Syntax {
                            pos: t.pos,
                            msg: format!("expected `(` after `{name}`"),
                        }),
                        None => Err(self.end_error(&format!("`(` after `{name}`"))),
                    }
                } else {
                    match name.as_str() {
                        "P" => Ok(Node::Var(Var::P)),
                        "Q" => Ok(Node::Var(Var::Q)),
                        "t" => Ok(Node::Var(Var::T)),
                        "nu" => Ok(Node::Var(Var::Nu)),
                        "pi" => Ok(Node::Num(std::f64::consts::PI)),
                        _ => Err(Error::Syntax {
                            pos: tok.pos,
                            msg: format!("unknown identifier `{name}`"),
                        }),
                    }
                }
            }
            other => Err(Error::Syntax {
                pos: tok.pos,
                msg: format!("unexpected {other}"),
            }),
        }
    }

    fn close(&mut self, open: usize) -> Result<()> {
        match self.next() {
            Some(Token {
                kind: TokKind::RParen,
                ..
            }) => Ok(()),
            Some(t) => Err(Error::Syntax {
                pos: t.pos,
                msg: format!("expected `)` to close `(` at {open}, found {}", t.kind),
            }),
            None => Err(Error::Syntax {
                pos: self.len,
                msg: format!("unclosed `(` at {open}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::Dual;

    fn pq(p: f64, q: f64) -> Bindings<f64> {
        Bindings {
            p: Some(p),
            q: Some(q),
            ..Default::default()
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let b = pq(2.0, 3.0);
        let cases = [
            ("1+2*3", 7.0),
            ("(1+2)*3", 9.0),
            ("2^3^2", 512.0),
            ("-2^2", -4.0),
            ("2^-1", 0.5),
            ("P/Q/2", 1.0 / 3.0),
            ("P - Q - 1", -2.0),
            ("  sqrt( Q + 1 ) ", 2.0),
            ("1.5e1", 15.0),
        ];
        for (src, want) in cases {
            let got = Expr::parse(src).unwrap().eval(&b).unwrap();
            assert!((got - want).abs() < 1e-15, "{src}: {got}");
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let cases = [("1 + * 2", 4), ("sqrt(Q", 6), ("P $ Q", 2), ("foo(1)", 0), ("sqrt Q", 5), ("(1))", 3)];
        for (src, at) in cases {
            match Expr::parse(src) {
                Err(Error::Syntax { pos, .. }) => assert_eq!(pos, at, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn domain_errors_at_evaluation() {
        let e = Expr::parse("sqrt(1 - Q)").unwrap();
        assert!(matches!(e.eval(&pq(0.0, 2.0)), Err(Error::Domain(_))));
        assert!(e.eval(&pq(0.0, 0.5)).is_ok());
        let e = Expr::parse("P/Q").unwrap();
        assert!(matches!(e.eval(&pq(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn half_integer_powers() {
        let e = Expr::parse("Q^1.5").unwrap();
        assert!((e.eval(&pq(0.0, 4.0)).unwrap() - 8.0).abs() < 1e-14);
        let d = e
            .eval(&Bindings {
                q: Some(Dual::var(4.0)),
                p: Some(Dual::cst(0.0)),
                ..Default::default()
            })
            .unwrap();
        assert!((d.eps - 3.0).abs() < 1e-14);
    }

    #[test]
    fn variables_and_unbound() {
        let e = Expr::parse("nu*P + t").unwrap();
        let vars: Vec<Var> = e.variables().into_iter().collect();
        assert_eq!(vars, vec![Var::P, Var::T, Var::Nu]);
        assert!(e.require_only(&[Var::P, Var::Q]).is_err());
        assert!(matches!(e.eval(&pq(1.0, 1.0)), Err(Error::Precondition(_))));
    }
}
