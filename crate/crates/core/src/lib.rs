//! Generalized Nijenhuis torsions of operator fields.
//!
//! * [`expr`]: symbolic scalar expressions on a coordinate chart.
//! * [`tensor`]: vector and operator fields, the torsion tower, vanishing tests.
//! * [`spectral`]: pointwise eigen-structure, regularity, joint refinement.
//! * [`algebra`]: closure checks for operator algebras and the `R_S` calculus.
//! * [`charts`]: coordinate changes, one-form integration, block detection.
//! * [`fixtures`]: two worked operator families with their known structure.
//!
//! Pointwise computations are generic over [`Scalar`] (`f64`, `f32`,
//! `BigRational`); spectral analysis is `f64` only.
//!
//! ```
//! use num_rational::BigRational;
//! use torsionlab::tensor::{is_vanishing, torsion_at};
//! use torsionlab::{Chart, OperatorField, SampleDomain};
//!
//! let c = Chart::standard(2);
//! let a = OperatorField::parse(&c, &[vec!["x1", "1"], vec!["0", "x2"]]).unwrap();
//! let domain = SampleDomain::cube(2, 1.0, 2.0, 7).unwrap();
//! assert!(!is_vanishing(&a, 1, &domain, 50, 1e-8).unwrap().vanishing);
//! assert!(is_vanishing(&a, 2, &domain, 50, 1e-8).unwrap().vanishing);
//!
//! let half = BigRational::new(1.into(), 2.into());
//! let exact = torsion_at(&a, 1, &[half.clone(), half]).unwrap();
//! assert_eq!(exact.get(0, 0, 1), &BigRational::from_integer((-1).into()));
//! ```

pub mod algebra;
pub mod charts;
pub mod expr;
pub mod fixtures;
pub mod scalar;
pub mod spectral;
pub mod tensor;

use num_rational::BigRational;

pub use expr::{Chart, Expr, ExprError, SampleDomain};
pub use scalar::Scalar;
pub use tensor::{OperatorExpr, OperatorField, OperatorSource, VectorFieldExpr};

/// Floating-point matrix at a point.
pub type Matrix = tensor::SquareMatrix<f64>;
/// Exact matrix at a rational point.
pub type ExactMatrix = tensor::SquareMatrix<BigRational>;
/// Floating-point torsion at a point.
pub type Torsion = tensor::TorsionTensor<f64>;
/// Exact torsion at a rational point.
pub type ExactTorsion = tensor::TorsionTensor<BigRational>;
