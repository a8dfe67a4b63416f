//! The element grammar accepted by `--a`.
//!
//! ```text
//! expr   := term ('*' term)*
//! term   := factor ('^' int)?
//! factor := int | symbol | '(' expr ')'
//! int    := '-'? digits
//! ```
//!
//! Symbols are `pi`, `u` and `zeta`. Whitespace is ignored.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Symbol(String),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// Interprets the leaves and operations of an [`Expr`].
pub trait ExprContext {
    type Value;
    fn int(&self, n: i64) -> Result<Self::Value>;
    fn symbol(&self, name: &str) -> Result<Self::Value>;
    fn mul(&self, x: &Self::Value, y: &Self::Value) -> Result<Self::Value>;
    fn pow(&self, x: &Self::Value, e: i64) -> Result<Self::Value>;
}

pub const SYMBOLS: [&str; 3] = ["pi", "u", "zeta"];

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn int(&mut self) -> Result<i64> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().map_err(|_| {
            self.pos = start;
            self.err("expected an integer")
        })
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c == b'-' || c.is_ascii_digit() => Ok(Expr::Int(self.int()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if !SYMBOLS.contains(&name) {
                    self.pos = start;
                    return Err(self.err(&format!("unknown symbol '{name}'")));
                }
                Ok(Expr::Symbol(name.to_string()))
            }
            _ => Err(self.err("expected an integer, symbol or '('")),
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let f = self.factor()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.int()?;
            return Ok(Expr::Pow(Box::new(f), e));
        }
        Ok(f)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            e = Expr::Mul(Box::new(e), Box::new(self.term()?));
        }
        Ok(e)
    }
}

/// Parses an element expression.
pub fn parse(text: &str) -> Result<Expr> {
    let cleaned: Vec<u8> = text.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
    if !cleaned.is_ascii() {
        return Err(Error::Parse("non-ASCII input".into()));
    }
    let mut parser = Parser { src: &cleaned, pos: 0 };
    let e = parser.expr()?;
    if parser.pos != cleaned.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(e)
}

impl Expr {
    pub fn eval<C: ExprContext>(&self, ctx: &C) -> Result<C::Value> {
        match self {
            Expr::Int(n) => ctx.int(*n),
            Expr::Symbol(s) => ctx.symbol(s),
            Expr::Mul(x, y) => ctx.mul(&x.eval(ctx)?, &y.eval(ctx)?),
            Expr::Pow(x, e) => ctx.pow(&x.eval(ctx)?, *e),
        }
    }
}

/// Evaluates over the integers; symbols and negative exponents are rejected.
pub struct IntegerContext;

impl ExprContext for IntegerContext {
    type Value = i64;

    fn int(&self, n: i64) -> Result<i64> {
        Ok(n)
    }

    fn symbol(&self, name: &str) -> Result<i64> {
        Err(Error::Parse(format!("symbol '{name}' needs a local field")))
    }

    fn mul(&self, x: &i64, y: &i64) -> Result<i64> {
        x.checked_mul(*y).ok_or_else(|| Error::Parse("integer overflow".into()))
    }

    fn pow(&self, x: &i64, e: i64) -> Result<i64> {
        let e = u32::try_from(e).map_err(|_| Error::Parse("negative exponent in an integer".into()))?;
        x.checked_pow(e).ok_or_else(|| Error::Parse("integer overflow".into()))
    }
}

impl ExprContext for crate::local::LocalBase {
    type Value = crate::local::LocalElement;

    fn int(&self, n: i64) -> Result<Self::Value> {
        if n == 0 {
            return Err(Error::Parse("a must be nonzero".into()));
        }
        Ok(self.field().from_int(n))
    }

    fn symbol(&self, name: &str) -> Result<Self::Value> {
        self.symbol(name)
            .ok_or_else(|| Error::Parse(format!("symbol '{name}' is not available here")))
    }

    fn mul(&self, x: &Self::Value, y: &Self::Value) -> Result<Self::Value> {
        Ok(self.field().mul(x, y))
    }

    fn pow(&self, x: &Self::Value, e: i64) -> Result<Self::Value> {
        self.field().pow(x, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(parse(" -3 ").unwrap(), Expr::Int(-3));
        assert_eq!(parse("2 * 3 ^ 2").unwrap().eval(&IntegerContext).unwrap(), 18);
        assert_eq!(parse("(2*3)^2").unwrap().eval(&IntegerContext).unwrap(), 36);
        assert_eq!(
            parse("pi^-1*u").unwrap(),
            Expr::Mul(
                Box::new(Expr::Pow(Box::new(Expr::Symbol("pi".into())), -1)),
                Box::new(Expr::Symbol("u".into()))
            )
        );
        for bad in ["", "2*", "x", "2^pi", "(2", "2)", "--2"] {
            assert!(matches!(parse(bad), Err(Error::Parse(_))), "{bad}");
        }
        assert!(parse("zeta").unwrap().eval(&IntegerContext).is_err());
        assert!(parse("2^-1").unwrap().eval(&IntegerContext).is_err());
    }

    #[test]
    fn local_symbols() {
        let base = crate::local::make_base(7, 3, 16).unwrap();
        let f = base.field();
        let v = parse("pi * zeta^2").unwrap().eval(&base).unwrap();
        let expect = f.mul(&f.uniformizer(), &f.mul(base.zeta(), base.zeta()));
        assert!(f.eq_at_precision(&v, &expect));
        assert!(parse("0").unwrap().eval(&base).is_err());
    }
}
