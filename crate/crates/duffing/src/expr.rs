//! A small arithmetic expression grammar for configuration files.
//!
//! Grammar (recursive descent):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | primary
//! primary := number | 'pi' | 't' | 'x' | 'x<k>' | func '(' args ')' | '(' expr ')'
//! func    := sin | cos | exp | abs | min | max
//! ```
//!
//! `t` is time, `x1..xN` are the state coordinates (`x` aliases `x1` when the
//! dimension is 1).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::multimap::ScalarField;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Time => t,
            Expr::Coord(k) => x[*k],
            Expr::Neg(e) => -e.eval(t, x),
            Expr::Add(a, b) => a.eval(t, x) + b.eval(t, x),
            Expr::Sub(a, b) => a.eval(t, x) - b.eval(t, x),
            Expr::Mul(a, b) => a.eval(t, x) * b.eval(t, x),
            Expr::Div(a, b) => a.eval(t, x) / b.eval(t, x),
            Expr::Sin(e) => e.eval(t, x).sin(),
            Expr::Cos(e) => e.eval(t, x).cos(),
            Expr::Exp(e) => e.eval(t, x).exp(),
            Expr::Abs(e) => e.eval(t, x).abs(),
            Expr::Min(a, b) => a.eval(t, x).min(b.eval(t, x)),
            Expr::Max(a, b) => a.eval(t, x).max(b.eval(t, x)),
        }
    }

    /// Wrap into a scalar coefficient field.
    pub fn into_field(self) -> ScalarField {
        let expr = Arc::new(self);
        ScalarField::new(move |t, x| expr.eval(t, x))
    }
}

/// Parse an expression over `t` and `x1..x<dim>`.
pub fn parse(src: &str, dim: usize) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        dim,
        src,
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(expr)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::Comma => write!(f, ","),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| Error::Config(format!("bad number `{text}`")))?;
                out.push(Token::Num(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(bytes[start..i].iter().collect()));
            }
            other => {
                return Err(Error::Config(format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Config(format!("{msg} in expression `{}`", self.src))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token) -> Result<()> {
        match self.advance() {
            Some(t) if t == token => Ok(()),
            Some(t) => Err(self.error(&format!("expected `{token}`, found `{t}`"))),
            None => Err(self.error(&format!("expected `{token}`, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.advance() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => self.ident(&name),
            Some(t) => Err(self.error(&format!("unexpected token `{t}`"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn ident(&mut self, name: &str) -> Result<Expr> {
        match name {
            "t" => return Ok(Expr::Time),
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "x" if self.dim == 1 => return Ok(Expr::Coord(0)),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(k) = rest.parse::<usize>() {
                if k >= 1 && k <= self.dim {
                    return Ok(Expr::Coord(k - 1));
                }
                return Err(self.error(&format!(
                    "coordinate `{name}` out of range for dimension {}",
                    self.dim
                )));
            }
        }
        let unary = |p: &mut Self, build: fn(Box<Expr>) -> Expr| -> Result<Expr> {
            p.expect(Token::LParen)?;
            let arg = p.expr()?;
            p.expect(Token::RParen)?;
            Ok(build(Box::new(arg)))
        };
        let binary = |p: &mut Self, build: fn(Box<Expr>, Box<Expr>) -> Expr| -> Result<Expr> {
            p.expect(Token::LParen)?;
            let a = p.expr()?;
            p.expect(Token::Comma)?;
            let b = p.expr()?;
            p.expect(Token::RParen)?;
            Ok(build(Box::new(a), Box::new(b)))
        };
        match name {
            "sin" => unary(self, Expr::Sin),
            "cos" => unary(self, Expr::Cos),
            "exp" => unary(self, Expr::Exp),
            "abs" => unary(self, Expr::Abs),
            "min" => binary(self, Expr::Min),
            "max" => binary(self, Expr::Max),
            _ => Err(self.error(&format!("unknown identifier `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, t: f64, x: &[f64]) -> f64 {
        parse(src, x.len().max(1)).unwrap().eval(t, x)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval("1 + 2 * 3", 0.0, &[]), 7.0);
        assert_eq!(eval("(1 + 2) * 3", 0.0, &[]), 9.0);
        assert_eq!(eval("2 - 3 - 4", 0.0, &[]), -5.0);
        assert_eq!(eval("12 / 4 / 3", 0.0, &[]), 1.0);
        assert_eq!(eval("-2 * -3", 0.0, &[]), 6.0);
    }

    #[test]
    fn variables_and_constants() {
        assert_eq!(eval("t", 0.25, &[]), 0.25);
        assert_eq!(eval("x1 + 2 * x2", 0.0, &[1.0, 3.0]), 7.0);
        assert_eq!(eval("x", 0.0, &[4.0]), 4.0);
        assert!((eval("pi", 0.0, &[]) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn functions() {
        assert!((eval("sin(pi/2)", 0.0, &[]) - 1.0).abs() < 1e-15);
        assert!((eval("cos(0)", 0.0, &[]) - 1.0).abs() < 1e-15);
        assert!((eval("exp(1)", 0.0, &[]) - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(eval("abs(-3.5)", 0.0, &[]), 3.5);
        assert_eq!(eval("min(2, 1 + 0.5)", 0.0, &[]), 1.5);
        assert_eq!(eval("max(2, 1 + 0.5)", 0.0, &[]), 2.0);
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(eval("1e-3", 0.0, &[]), 1e-3);
        assert_eq!(eval("2.5E2", 0.0, &[]), 250.0);
        assert_eq!(eval("1e+2 - 1", 0.0, &[]), 99.0);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse("1 +", 1).is_err());
        assert!(parse("sin 2", 1).is_err());
        assert!(parse("min(1)", 1).is_err());
        assert!(parse("x3", 2).is_err());
        assert!(parse("x", 2).is_err());
        assert!(parse("boop(1)", 1).is_err());
        assert!(parse("1 2", 1).is_err());
        assert!(parse("(1", 1).is_err());
        assert!(parse("1 $ 2", 1).is_err());
    }

    #[test]
    fn field_wrapper_evaluates() {
        let f = parse("t * x1", 2).unwrap().into_field();
        assert_eq!(f.eval(2.0, &[3.0, 0.0]), 6.0);
    }
}
