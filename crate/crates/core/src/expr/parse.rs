//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := base ('^' ['-'] integer)?
//! base   := number | ident | '(' expr ')' | ('sqrt' | 'cbrt') base
//! ```
//!
//! Unary minus sits at the factor level so that `-x^2` reads as `-(x^2)`.
//! Numbers are integers or decimals; `p/q` is an ordinary division that folds
//! to an exact rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Num;

use super::{Chart, Expr, ExprError, MAX_EXPONENT};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let lit = &text[start..i];
            out.push((start, number(lit, start)?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExprError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

fn number(lit: &str, pos: usize) -> Result<Tok, ExprError> {
    let bad = || ExprError::Syntax { pos, msg: format!("malformed number `{lit}`") };
    match lit.split_once('.') {
        None => Ok(Tok::Int(BigInt::from_str_radix(lit, 10).map_err(|_| bad())?)),
        Some((int, frac)) => {
            if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
                return Err(bad());
            }
            let digits = format!("{int}{frac}");
            let num = BigInt::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).map_err(|_| bad())?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            Ok(Tok::Num(BigRational::new(num, den)))
        }
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    chart: &'a Chart,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::sum(lhs, self.term()?);
            } else if self.eat_op('-') {
                lhs = Expr::difference(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::product(lhs, self.factor()?);
            } else if self.eat_op('/') {
                lhs = Expr::quotient(lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.eat_op('-') {
            return Ok(Expr::negate(self.factor()?));
        }
        let base = self.base()?;
        if self.eat_op('^') {
            let pos = self.offset();
            // `^k`, `^-k` or `^(-k)`
            let paren = self.eat_op('(');
            let negative = self.eat_op('-');
            let Some(Tok::Int(k)) = self.peek().cloned() else {
                return self.err("expected integer exponent");
            };
            self.pos += 1;
            if paren && !self.eat_op(')') {
                return self.err("expected `)` after exponent");
            }
            let k = if negative { -k } else { k };
            let exp: i64 = k.try_into().unwrap_or(i64::MAX);
            if exp.abs() > MAX_EXPONENT as i64 {
                return Err(ExprError::ExponentOutOfRange { exp, pos });
            }
            return Ok(Expr::powi(base, exp as i32));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let pos = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Expr::constant(BigRational::from_integer(v)))
            }
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::constant(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "sqrt" => Ok(Expr::sqrt(self.base()?)),
                    "cbrt" => Ok(Expr::cbrt(self.base()?)),
                    _ => match self.chart.index_of(&name) {
                        Some(i) => Ok(Expr::var(i)),
                        None => Err(ExprError::UnknownVariable { name, pos }),
                    },
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `text` against `chart`'s variable names.
pub fn parse_expr(text: &str, chart: &Chart) -> Result<Expr, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), chart };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}
