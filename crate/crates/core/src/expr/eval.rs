use std::ops::Deref;

use thiserror::Error;

use super::{Expr, Node};
use crate::Scalar;

/// Divisors (and bases of negative powers) below this magnitude are singular.
pub const SINGULARITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("singularity: divisor magnitude {magnitude:e} below {SINGULARITY_EPS:e}")]
    Singularity { magnitude: f64 },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("point has {got} coordinates, expression needs at least {needed}")]
    PointDimension { needed: usize, got: usize },
    #[error("non-finite result")]
    NonFinite,
}

/// A point of a chart: finite real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, EvalError> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Self(coords))
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

fn check_divisor<T: Scalar>(v: &T) -> Result<(), EvalError> {
    let m = v.abs_f64();
    if m < SINGULARITY_EPS || v.is_zero() {
        Err(EvalError::Singularity { magnitude: m })
    } else {
        Ok(())
    }
}

fn pow_nonneg<T: Scalar>(base: &T, exp: u32) -> T {
    let mut acc = T::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        e >>= 1;
        if e > 0 {
            b = b.clone() * b;
        }
    }
    acc
}

impl Expr {
    /// Evaluates at `point` (coordinates indexed like the chart).
    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<T, EvalError> {
        if let Some(i) = self.max_var() {
            if i >= point.len() {
                return Err(EvalError::PointDimension { needed: i + 1, got: point.len() });
            }
        }
        let v = self.eval_unchecked(point)?;
        if v.to_f64().is_finite() || T::is_exact() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_unchecked<T: Scalar>(&self, p: &[T]) -> Result<T, EvalError> {
        Ok(match self.node() {
            Node::Const(c) => T::from_rational(c),
            Node::Var(i) => p[*i].clone(),
            Node::Add(a, b) => a.eval_unchecked(p)? + b.eval_unchecked(p)?,
            Node::Sub(a, b) => a.eval_unchecked(p)? - b.eval_unchecked(p)?,
            Node::Mul(a, b) => a.eval_unchecked(p)? * b.eval_unchecked(p)?,
            Node::Div(a, b) => {
                let num = a.eval_unchecked(p)?;
                let den = b.eval_unchecked(p)?;
                check_divisor(&den)?;
                num / den
            }
            Node::Pow(a, k) => {
                let base = a.eval_unchecked(p)?;
                if *k >= 0 {
                    pow_nonneg(&base, *k as u32)
                } else {
                    check_divisor(&base)?;
                    T::one() / pow_nonneg(&base, k.unsigned_abs())
                }
            }
            Node::Neg(a) => -a.eval_unchecked(p)?,
            Node::Sqrt(a) => {
                let v = a.eval_unchecked(p)?;
                if v.to_f64() < 0.0 {
                    return Err(EvalError::Domain("square root of a negative number"));
                }
                v.sqrt().ok_or(EvalError::Domain("square root not representable"))?
            }
            Node::Cbrt(a) => {
                let v = a.eval_unchecked(p)?;
                v.cbrt().ok_or(EvalError::Domain("cube root not representable"))?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::expr::Chart;

    #[test]
    fn basic_evaluation() {
        let c = Chart::standard(3);
        assert_eq!(c.parse("x1+x2").unwrap().eval(&[2.0, 3.0, 7.0]).unwrap(), 5.0);
    }

    #[test]
    fn division_by_zero_is_singular() {
        let c = Chart::standard(1);
        let e = c.parse("1/x1").unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(EvalError::Singularity { .. })));
        assert!(matches!(e.eval(&[1e-13]), Err(EvalError::Singularity { .. })));
        assert!(matches!(c.parse("x1^-2").unwrap().eval(&[0.0]), Err(EvalError::Singularity { .. })));
    }

    #[test]
    fn chi_is_a_real_cube_root() {
        let y = Chart::with_prefix("y", 7).unwrap();
        let chi = y.parse("cbrt(3*(y4 - y5 + y6))").unwrap();
        // 3*(y4 - y5 + y6) = -8
        let p: [f64; 7] = [0.0, 0.0, 0.0, 1.0, 5.0, 4.0 / 3.0, 0.0];
        assert!((chi.eval(&p).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_of_negative_is_a_domain_error() {
        let c = Chart::standard(1);
        assert!(matches!(c.parse("sqrt(x1)").unwrap().eval(&[-1.0]), Err(EvalError::Domain(_))));
    }

    #[test]
    fn short_points_are_rejected() {
        let c = Chart::standard(3);
        let e = c.parse("x3").unwrap();
        assert_eq!(e.eval(&[1.0]), Err(EvalError::PointDimension { needed: 3, got: 1 }));
    }

    #[test]
    fn exact_evaluation() {
        let c = Chart::standard(2);
        let e = c.parse("x1^2/3 - x2/7").unwrap();
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(e.eval(&[r(3, 2), r(1, 1)]).unwrap(), r(3, 4) - r(1, 7));
        assert!(Point::new(vec![f64::NAN]).is_err());
    }
}
