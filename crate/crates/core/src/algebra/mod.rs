//! Generalized Haantjes algebras: closure checks, cyclic bases, and the
//! `R_S` representation with Bezout quotients.

mod check;
mod rep;

use rand::Rng;
use thiserror::Error;

use crate::expr::{random_polynomial, Chart, EvalError, Expr, ExprError, SampleError};
use crate::spectral::SpectralError;
use crate::tensor::{OperatorExpr, OperatorField, TensorError};
use crate::Scalar;

pub use check::{
    bezout_identity_residual, check_algebra, check_polynomial_preservation, cyclic_basis, relative_difference,
    AlgebraCheckReport, AlgebraTolerances, PreservationReport,
};
pub use rep::{bezout_quotient, rep_apply, Coeff, TriPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("the family is empty")]
    EmptyFamily,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("level {level} torsion does not vanish (residual {residual:e})")]
    PreconditionFailed { level: usize, residual: f64 },
    #[error("powers of the operator are numerically ambiguous at rank {rank}")]
    RankAmbiguous { rank: usize },
    #[error("powers 0..{degree} are not independent")]
    DependentPowers { degree: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// `P(z) = sum_k c_k(x) z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySpec {
    coeffs: Vec<Expr>,
}

impl PolySpec {
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<Expr>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Self { coeffs }
    }

    /// Coefficients `c_0, c_1, ..` as text on `chart`.
    pub fn parse(chart: &Chart, coeffs: &[&str]) -> Result<Self, ExprError> {
        if coeffs.is_empty() {
            return Err(ExprError::Syntax { pos: 0, msg: "empty coefficient list".into() });
        }
        Ok(Self::new(coeffs.iter().map(|c| chart.parse(c)).collect::<Result<_, _>>()?))
    }

    /// `P(z) = z`.
    pub fn identity() -> Self {
        Self::new(vec![Expr::zero(), Expr::one()])
    }

    /// Degree `n` with random polynomial coefficients of degree `<= coeff_degree`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize, coeff_degree: u32) -> Self {
        Self::new((0..=n).map(|_| random_polynomial(rng, dim, coeff_degree)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn eval_at<T: Scalar>(&self, p: &[T]) -> Result<Vec<T>, EvalError> {
        self.coeffs.iter().map(|c| c.eval(p)).collect()
    }

    /// Symbolic `Q_P(z, lambda)`.
    pub fn bezout_quotient(&self) -> TriPoly<Expr> {
        bezout_quotient(&self.coeffs)
    }
}

/// `sum_k c_k A^k` as a symbolic operator field.
pub fn poly_of_operator(a: &OperatorField, p: &PolySpec) -> OperatorField {
    let mut acc = OperatorField::scalar(a.chart(), p.coeffs[0].clone());
    let mut power = OperatorField::identity(a.chart());
    for c in &p.coeffs[1..] {
        power = power.compose(a).expect("same chart");
        acc = acc.add(&power.scale(c)).expect("same chart");
    }
    acc
}

/// `sum_k c_k A^k` as a composite evaluated through jets.
pub fn poly_of_operator_expr(a: OperatorExpr, p: &PolySpec) -> OperatorExpr {
    OperatorExpr::polynomial(&p.coeffs, a)
}
