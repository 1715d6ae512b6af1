//! Expression DSL for scalar fields on chart domains.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-')? atom
//! atom   := number | ident | func '(' args ')' | '(' expr ')'
//! ```
//!
//! Identifiers are the coordinates `x1..xn` and `normsq` (= x1^2 + .. + xn^2).
//! Functions: `pow(e, k)` with integer k, `exp`, `log`, `sqrt`, `sin`, `cos`.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Coordinate x{i+1}, zero-based index.
    Coord(usize),
    Const(f64),
    NormSq,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// Folding constructors keep symbolic derivatives from ballooning.
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => Expr::neg(b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (a, _) if a.is_zero() => Expr::Const(0.0),
            (_, b) if b.is_zero() => Expr::Const(0.0),
            (a, b) if a.is_one() => b,
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (a, b) if a.is_zero() && !b.is_zero() => Expr::Const(0.0),
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        match k {
            0 => Expr::Const(1.0),
            1 => a,
            _ => Expr::Pow(Box::new(a), k),
        }
    }

    /// Largest coordinate index referenced (1-based), 0 if none.
    pub fn max_coord(&self) -> usize {
        match self {
            Expr::Coord(i) => i + 1,
            Expr::Const(_) | Expr::NormSq => 0,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_coord().max(b.max_coord())
            }
            Expr::Neg(a)
            | Expr::Pow(a, _)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Sqrt(a)
            | Expr::Sin(a)
            | Expr::Cos(a) => a.max_coord(),
        }
    }

    /// Exact partial derivative with respect to coordinate `i` (zero-based).
    ///
    /// NormSq is left intact where possible: d/dxi normsq = 2*xi. No
    /// simplification beyond the constant folding in the constructors.
    pub fn diff(&self, i: usize) -> Expr {
        use Expr::*;
        match self {
            Coord(j) => Const(if *j == i { 1.0 } else { 0.0 }),
            Const(_) => Const(0.0),
            NormSq => Expr::mul(Const(2.0), Coord(i)),
            Add(a, b) => Expr::add(a.diff(i), b.diff(i)),
            Sub(a, b) => Expr::sub(a.diff(i), b.diff(i)),
            Mul(a, b) => Expr::add(
                Expr::mul(a.diff(i), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(i)),
            ),
            Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff(i), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(i)),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Neg(a) => Expr::neg(a.diff(i)),
            Pow(a, k) => Expr::mul(
                Expr::mul(Const(f64::from(*k)), Expr::pow((**a).clone(), k - 1)),
                a.diff(i),
            ),
            Exp(a) => Expr::mul(Exp(a.clone()), a.diff(i)),
            Log(a) => Expr::div(a.diff(i), (**a).clone()),
            Sqrt(a) => Expr::div(a.diff(i), Expr::mul(Const(2.0), Sqrt(a.clone()))),
            Sin(a) => Expr::mul(Cos(a.clone()), a.diff(i)),
            Cos(a) => Expr::neg(Expr::mul(Sin(a.clone()), a.diff(i))),
        }
    }
}

/// Renders in the grammar the parser accepts, so Display output round-trips.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({})", c)
                } else {
                    write!(f, "{}", c)
                }
            }
            Expr::NormSq => write!(f, "normsq"),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Div(a, b) => write!(f, "({} / {})", a, b),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Pow(a, k) => write!(f, "pow({}, {})", a, k),
            Expr::Exp(a) => write!(f, "exp({})", a),
            Expr::Log(a) => write!(f, "log({})", a),
            Expr::Sqrt(a) => write!(f, "sqrt({})", a),
            Expr::Sin(a) => write!(f, "sin({})", a),
            Expr::Cos(a) => write!(f, "cos({})", a),
        }
    }
}

/// Parse `source` as an expression over coordinates x1..xn.
pub fn parse_expression(source: &str, n: usize) -> Result<Expr> {
    if source.trim().is_empty() {
        return Err(Error::Parse {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        dim: n,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Parse {
            position: p.pos,
            message: format!("unexpected trailing input `{}`", &source[p.pos..]),
        });
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                position: self.pos,
                message: format!("expected `{}`", c as char),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    acc = Expr::Div(Box::new(acc), Box::new(self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            Ok(Expr::Neg(Box::new(self.atom()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(Error::Parse {
                position: self.pos,
                message: "expected number, identifier, or `(`".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || self.src[self.pos] == b'e'
                || self.src[self.pos] == b'E'
                // exponent sign
                || ((self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                    && self.pos > start
                    && matches!(self.src[self.pos - 1], b'e' | b'E')))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Parse {
                position: start,
                message: format!("invalid number `{}`", text),
            })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(idx) = rest.parse::<usize>() {
                if idx == 0 || idx > self.dim {
                    return Err(Error::CoordOutOfRange {
                        index: idx,
                        dim: self.dim,
                    });
                }
                return Ok(Expr::Coord(idx - 1));
            }
        }
        match name {
            "normsq" => Ok(Expr::NormSq),
            "pow" => {
                self.expect(b'(')?;
                let base = self.expr()?;
                self.expect(b',')?;
                let k = self.integer()?;
                self.expect(b')')?;
                Ok(Expr::Pow(Box::new(base), k))
            }
            "exp" | "log" | "sqrt" | "sin" | "cos" => {
                self.expect(b'(')?;
                let arg = Box::new(self.expr()?);
                self.expect(b')')?;
                Ok(match name {
                    "exp" => Expr::Exp(arg),
                    "log" => Expr::Log(arg),
                    "sqrt" => Expr::Sqrt(arg),
                    "sin" => Expr::Sin(arg),
                    _ => Expr::Cos(arg),
                })
            }
            _ => Err(Error::Parse {
                position: start,
                message: format!("unknown identifier `{}`", name),
            }),
        }
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<i32>().map_err(|_| Error::Parse {
            position: start,
            message: "pow exponent must be an integer".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_polynomial_and_exp() {
        let e = parse_expression("x1*x1 + exp(x2)", 2).unwrap();
        assert_eq!(e.max_coord(), 2);
    }

    #[test]
    fn parses_poincare_factor() {
        parse_expression("4/pow(1-normsq,2)", 4).unwrap();
    }

    #[test]
    fn coordinate_out_of_range() {
        match parse_expression("x5", 4) {
            Err(Error::CoordOutOfRange { index: 5, dim: 4 }) => {}
            other => panic!("expected out-of-range error, got {:?}", other),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_expression("x1 + ", 2) {
            Err(Error::Parse { position, .. }) => assert!(position >= 4),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn unknown_identifier_rejected() {
        assert!(parse_expression("foo(x1)", 2).is_err());
    }

    #[test]
    fn display_round_trips() {
        let src = "4/pow(1-normsq,2) + sin(x1)*cos(x2) - sqrt(1+normsq)";
        let e = parse_expression(src, 3).unwrap();
        let e2 = parse_expression(&e.to_string(), 3).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn diff_of_normsq() {
        let e = Expr::NormSq;
        let d = e.diff(1);
        let d2 = parse_expression("2*x2", 3).unwrap();
        assert_eq!(d.to_string(), format!("({} * {})", 2, "x2"));
        let _ = d2;
    }
}
