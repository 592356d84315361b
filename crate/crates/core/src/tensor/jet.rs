//! First-order jets of operator fields.
//!
//! Composite operators such as `f K1 + g K2` or `K^6` are evaluated by
//! propagating value and first derivatives through the product rule, so their
//! entries never have to be expanded symbolically.

use std::sync::Arc;

use super::{OperatorField, SquareMatrix};
use crate::expr::{Chart, EvalError, Expr};
use crate::Scalar;

/// Value of an operator at a point together with `d_l A` for each `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorJet<T> {
    pub value: SquareMatrix<T>,
    pub grads: Vec<SquareMatrix<T>>,
}

impl<T: Scalar> OperatorJet<T> {
    pub fn dim(&self) -> usize {
        self.value.dim()
    }

    pub fn identity(n: usize) -> Self {
        Self { value: SquareMatrix::identity(n), grads: vec![SquareMatrix::zeros(n); n] }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: &self.value + &other.value,
            grads: self.grads.iter().zip(&other.grads).map(|(a, b)| a + b).collect(),
        }
    }

    /// `f A` from the value and gradient of `f`.
    pub fn scale(&self, f: &T, df: &[T]) -> Self {
        Self {
            value: self.value.scale(f),
            grads: self
                .grads
                .iter()
                .zip(df)
                .map(|(g, d)| &g.scale(f) + &self.value.scale(d))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            value: &self.value * &other.value,
            grads: self
                .grads
                .iter()
                .zip(&other.grads)
                .map(|(ga, gb)| &(ga * &other.value) + &(&self.value * gb))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.dim());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Anything whose first-order jet can be evaluated at a point.
pub trait OperatorSource: Sync {
    fn dim(&self) -> usize;

    fn jet_at<T: Scalar>(&self, p: &[T]) -> Result<OperatorJet<T>, EvalError>;

    fn value_at<T: Scalar>(&self, p: &[T]) -> Result<SquareMatrix<T>, EvalError> {
        Ok(self.jet_at(p)?.value)
    }
}

impl OperatorSource for OperatorField {
    fn dim(&self) -> usize {
        OperatorField::dim(self)
    }

    fn jet_at<T: Scalar>(&self, p: &[T]) -> Result<OperatorJet<T>, EvalError> {
        OperatorField::jet_at(self, p)
    }

    fn value_at<T: Scalar>(&self, p: &[T]) -> Result<SquareMatrix<T>, EvalError> {
        self.eval_at(p)
    }
}

/// A scalar coefficient with its gradient precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    expr: Expr,
    grad: Vec<Expr>,
}

impl Coefficient {
    pub fn new(expr: Expr, dim: usize) -> Self {
        let grad = expr.gradient(dim);
        Self { expr, grad }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

/// Operator built from fields by scaling, sums, products and powers.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorExpr {
    Field(Arc<OperatorField>),
    Identity(usize),
    Scaled(Coefficient, Box<OperatorExpr>),
    Sum(Vec<OperatorExpr>),
    Product(Box<OperatorExpr>, Box<OperatorExpr>),
    Power(Box<OperatorExpr>, u32),
}

impl From<OperatorField> for OperatorExpr {
    fn from(a: OperatorField) -> Self {
        OperatorExpr::Field(Arc::new(a))
    }
}

impl From<Arc<OperatorField>> for OperatorExpr {
    fn from(a: Arc<OperatorField>) -> Self {
        OperatorExpr::Field(a)
    }
}

impl OperatorExpr {
    pub fn scaled(f: Expr, op: OperatorExpr) -> Self {
        let dim = op.dim();
        OperatorExpr::Scaled(Coefficient::new(f, dim), Box::new(op))
    }

    /// `f I + g A`.
    pub fn affine(f: Expr, g: Expr, a: OperatorExpr) -> Self {
        let n = a.dim();
        OperatorExpr::Sum(vec![Self::scaled(f, OperatorExpr::Identity(n)), Self::scaled(g, a)])
    }

    /// `f K1 + g K2`.
    pub fn combination(f: Expr, k1: OperatorExpr, g: Expr, k2: OperatorExpr) -> Self {
        OperatorExpr::Sum(vec![Self::scaled(f, k1), Self::scaled(g, k2)])
    }

    pub fn product(a: OperatorExpr, b: OperatorExpr) -> Self {
        OperatorExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn power(a: OperatorExpr, k: u32) -> Self {
        OperatorExpr::Power(Box::new(a), k)
    }

    /// `sum_k c_k A^k`, evaluated by Horner's rule.
    pub fn polynomial(coeffs: &[Expr], a: OperatorExpr) -> Self {
        let n = a.dim();
        let mut it = coeffs.iter().rev();
        let Some(lead) = it.next() else {
            return Self::scaled(Expr::zero(), OperatorExpr::Identity(n));
        };
        let mut acc = Self::scaled(lead.clone(), OperatorExpr::Identity(n));
        for c in it {
            acc = OperatorExpr::Sum(vec![
                Self::scaled(c.clone(), OperatorExpr::Identity(n)),
                Self::product(a.clone(), acc),
            ]);
        }
        acc
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorExpr::Field(a) => a.dim(),
            OperatorExpr::Identity(n) => *n,
            OperatorExpr::Scaled(_, a) | OperatorExpr::Power(a, _) | OperatorExpr::Product(a, _) => a.dim(),
            OperatorExpr::Sum(terms) => terms.first().map_or(0, OperatorExpr::dim),
        }
    }

    /// Chart of the first field leaf, if any.
    pub fn chart(&self) -> Option<&Chart> {
        match self {
            OperatorExpr::Field(a) => Some(a.chart()),
            OperatorExpr::Identity(_) => None,
            OperatorExpr::Scaled(_, a) | OperatorExpr::Power(a, _) => a.chart(),
            OperatorExpr::Product(a, b) => a.chart().or_else(|| b.chart()),
            OperatorExpr::Sum(terms) => terms.iter().find_map(OperatorExpr::chart),
        }
    }
}

impl OperatorSource for OperatorExpr {
    fn dim(&self) -> usize {
        OperatorExpr::dim(self)
    }

    fn jet_at<T: Scalar>(&self, p: &[T]) -> Result<OperatorJet<T>, EvalError> {
        Ok(match self {
            OperatorExpr::Field(a) => a.jet_at(p)?,
            OperatorExpr::Identity(n) => OperatorJet::identity(*n),
            OperatorExpr::Scaled(c, a) => {
                let f = c.expr.eval(p)?;
                let df = c.grad.iter().map(|g| g.eval(p)).collect::<Result<Vec<_>, _>>()?;
                a.jet_at(p)?.scale(&f, &df)
            }
            OperatorExpr::Sum(terms) => {
                let mut it = terms.iter();
                let first = it.next().expect("sum has at least one term").jet_at(p)?;
                it.try_fold(first, |acc, t| Ok::<_, EvalError>(acc.add(&t.jet_at(p)?)))?
            }
            OperatorExpr::Product(a, b) => a.jet_at(p)?.mul(&b.jet_at(p)?),
            OperatorExpr::Power(a, k) => a.jet_at(p)?.pow(*k),
        })
    }
}
