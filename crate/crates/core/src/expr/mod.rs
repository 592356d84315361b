//! Symbolic scalar expressions over a coordinate chart.
//!
//! An [`Expr`] is an immutable, reference-counted AST. Constants are exact
//! rationals; evaluation targets any [`Scalar`](crate::Scalar). The smart
//! constructors fold constants, drop neutral elements and pull signs out of
//! sums and products, nothing more: there is no canonical form, and equality
//! is structural.

mod diff;
mod display;
mod eval;
mod parse;
mod poly;
mod random;
mod sample;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use display::ExprDisplay;
pub use eval::{EvalError, Point, SINGULARITY_EPS};
pub use parse::parse_expr;
pub use poly::MultiPoly;
pub use random::random_polynomial;
pub use sample::{SampleDomain, SampleError, MAX_CONSECUTIVE_REJECTIONS};

/// Largest exponent magnitude accepted by the parser.
pub const MAX_EXPONENT: i32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("exponent {exp} out of range at {pos} (|e| <= {MAX_EXPONENT})")]
    ExponentOutOfRange { exp: i64, pos: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("variable index {index} out of range for chart of dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
}

/// A local coordinate chart: an ordered list of distinct variable names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    names: Arc<[String]>,
}

impl Chart {
    pub fn new<I, S>(names: I) -> Result<Self, ExprError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ExprError::InvalidChart("dimension must be at least 1".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(ExprError::InvalidChart(format!("`{n}` is not an identifier")));
            }
            if n == "sqrt" || n == "cbrt" {
                return Err(ExprError::InvalidChart(format!("`{n}` is reserved")));
            }
            if names[..i].contains(n) {
                return Err(ExprError::InvalidChart(format!("duplicate name `{n}`")));
            }
        }
        Ok(Self { names: names.into() })
    }

    /// Chart with names `{prefix}1 .. {prefix}n`.
    pub fn with_prefix(prefix: &str, dim: usize) -> Result<Self, ExprError> {
        Self::new((1..=dim).map(|i| format!("{prefix}{i}")))
    }

    /// The default chart `x1 .. xn`.
    pub fn standard(dim: usize) -> Self {
        Self::with_prefix("x", dim).expect("dimension must be at least 1")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn var(&self, index: usize) -> Expr {
        assert!(index < self.dim(), "variable index out of range");
        Expr::var(index)
    }

    /// Parses `text` in this chart.
    pub fn parse(&self, text: &str) -> Result<Expr, ExprError> {
        parse_expr(text, self)
    }

    /// Checks that every variable in `e` belongs to this chart.
    pub fn check(&self, e: &Expr) -> Result<(), ExprError> {
        match e.max_var() {
            Some(i) if i >= self.dim() => Err(ExprError::VariableOutOfRange { index: i, dim: self.dim() }),
            _ => Ok(()),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const(BigRational),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Neg(Expr),
    Sqrt(Expr),
    Cbrt(Expr),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn raw(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn constant(c: BigRational) -> Self {
        Self::raw(Node::Const(c))
    }

    pub fn int(v: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(BigRational::new(num.into(), den.into()))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn var(index: usize) -> Self {
        Self::raw(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    pub fn sum(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            (_, Some(y)) if y.is_negative() => Expr::raw(Node::Sub(a, Expr::constant(-y))),
            _ => match b.node() {
                Node::Neg(inner) => Expr::raw(Node::Sub(a, inner.clone())),
                _ => Expr::raw(Node::Add(a, b)),
            },
        }
    }

    pub fn difference(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::negate(b),
            _ => Expr::raw(Node::Sub(a, b)),
        }
    }

    pub fn product(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            _ if a.is_zero() || b.is_zero() => Expr::zero(),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            (Some(x), _) if (-x).is_one() => Expr::negate(b),
            (_, Some(y)) if (-y).is_one() => Expr::negate(a),
            (Some(x), _) if x.is_negative() => Expr::negate(Expr::product(Expr::constant(-x), b)),
            _ => Expr::raw(Node::Mul(a, b)),
        }
    }

    pub fn quotient(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if !y.is_zero() => Expr::constant(x / y),
            _ if b.is_one() => a,
            _ if a.is_zero() && !b.is_zero() => Expr::zero(),
            _ => Expr::raw(Node::Div(a, b)),
        }
    }

    /// Integer power. Exponents beyond [`MAX_EXPONENT`] are split into
    /// nested powers so the per-node bound holds.
    pub fn powi(base: Expr, exp: i32) -> Expr {
        if exp == 0 {
            return Expr::one();
        }
        if exp == 1 {
            return base;
        }
        if exp.abs() > MAX_EXPONENT {
            let half = exp / 2;
            let rest = exp - 2 * half;
            let h = Expr::powi(base.clone(), half);
            return Expr::product(Expr::product(h.clone(), h), Expr::powi(base, rest));
        }
        if let Some(c) = base.as_const() {
            if exp > 0 {
                return Expr::constant(num_traits::pow(c.clone(), exp as usize));
            }
            if !c.is_zero() {
                return Expr::constant(num_traits::pow(c.recip(), (-exp) as usize));
            }
        }
        Expr::raw(Node::Pow(base, exp))
    }

    pub fn negate(a: Expr) -> Expr {
        match a.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::raw(Node::Neg(a)),
        }
    }

    pub fn sqrt(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if let Some(r) = crate::Scalar::sqrt(c) {
                return Expr::constant(r);
            }
        }
        Expr::raw(Node::Sqrt(a))
    }

    pub fn cbrt(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if let Some(r) = crate::Scalar::cbrt(c) {
                return Expr::constant(r);
            }
        }
        Expr::raw(Node::Cbrt(a))
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Sqrt(a) | Node::Cbrt(a) => a.max_var(),
        }
    }

    /// True when the expression is a polynomial in the chart variables:
    /// no radicals, no negative powers, divisions only by nonzero constants.
    pub fn is_polynomial(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => a.is_polynomial() && b.is_polynomial(),
            Node::Div(a, b) => {
                a.is_polynomial() && b.as_const().is_some_and(|c| !c.is_zero())
            }
            Node::Pow(a, e) => *e >= 0 && a.is_polynomial(),
            Node::Neg(a) => a.is_polynomial(),
            Node::Sqrt(_) | Node::Cbrt(_) => false,
        }
    }

    /// Replaces variable `i` by `values[i]`.
    pub fn substitute(&self, values: &[Expr]) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => values[*i].clone(),
            Node::Add(a, b) => Expr::sum(a.substitute(values), b.substitute(values)),
            Node::Sub(a, b) => Expr::difference(a.substitute(values), b.substitute(values)),
            Node::Mul(a, b) => Expr::product(a.substitute(values), b.substitute(values)),
            Node::Div(a, b) => Expr::quotient(a.substitute(values), b.substitute(values)),
            Node::Pow(a, e) => Expr::powi(a.substitute(values), *e),
            Node::Neg(a) => Expr::negate(a.substitute(values)),
            Node::Sqrt(a) => Expr::sqrt(a.substitute(values)),
            Node::Cbrt(a) => Expr::cbrt(a.substitute(values)),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.size() + b.size(),
            Node::Pow(a, _) | Node::Neg(a) | Node::Sqrt(a) | Node::Cbrt(a) => 1 + a.size(),
        }
    }

    pub(crate) fn const_to_f64(c: &BigRational) -> f64 {
        c.to_f64().unwrap_or(f64::NAN)
    }

    pub(crate) fn const_is_nonneg_integer(c: &BigRational) -> bool {
        c.is_integer() && !c.is_negative()
    }
}

impl Zero for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
}

impl One for Expr {
    fn one() -> Self {
        Expr::one()
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $ctor:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(self, rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self.clone(), rhs.clone())
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self, rhs.clone())
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, sum);
binop!(Sub, sub, difference);
binop!(Mul, mul, product);
binop!(Div, div, quotient);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::negate(self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::negate(self.clone())
    }
}
