//! Vector fields, operator fields and the tower of generalized torsions.
//!
//! Torsions are computed pointwise: symbolic first derivatives of the
//! operator entries are evaluated at a point and contracted numerically.
//! `tau^(1)` is the Nijenhuis torsion, each higher level is one application of
//! [`level_up`].

mod chain;
mod field;
mod jet;
mod matrix;
mod torsion;
mod vanish;

use thiserror::Error;

use crate::expr::{EvalError, ExprError, SampleError};
use crate::Scalar;

pub use chain::{eigenchain_formula_rhs, EigenChain, CHAIN_TOL};
pub use field::{OperatorField, VectorFieldExpr};
pub use jet::{Coefficient, OperatorExpr, OperatorJet, OperatorSource};
pub use matrix::SquareMatrix;
pub use torsion::{level_up, nijenhuis_from_jet, Tensor12, TorsionTensor};
pub use vanish::{
    is_vanishing, nijenhuis_at, normalized_residual, residual_table, torsion_at, torsion_tower_at,
    vanishing_profile, VanishingReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("torsion level {0} is not supported here")]
    InvalidLevel(usize),
    #[error("evaluation failed at {point:?}: {source}")]
    Eval { point: Vec<f64>, source: EvalError },
    #[error("chain condition violated (defect {defect:e})")]
    ChainViolated { defect: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

impl TensorError {
    pub fn at_point<T: Scalar>(source: EvalError, p: &[T]) -> Self {
        TensorError::Eval { point: p.iter().map(Scalar::to_f64).collect(), source }
    }
}
