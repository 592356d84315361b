//! Scalar types the pointwise machinery can run over.
//!
//! Expressions carry exact rational constants; evaluation can target `f64`,
//! `f32`, or `BigRational` (exact, for polynomial data at rational points).

use std::fmt::Debug;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    fn from_rational(r: &BigRational) -> Self;

    fn from_i64(v: i64) -> Self;

    /// Lossy view used for guards, tolerances and reporting.
    fn to_f64(&self) -> f64;

    /// Real square root, `None` if negative or not representable.
    fn sqrt(&self) -> Option<Self>;

    /// Real cube root, `None` if not representable.
    fn cbrt(&self) -> Option<Self>;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn cbrt(&self) -> Option<Self> {
        Some(f64::cbrt(*self))
    }
}

impl Scalar for f32 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f32::sqrt(*self))
    }
    fn cbrt(&self) -> Option<Self> {
        Some(f32::cbrt(*self))
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = exact_root(self.numer(), 2)?;
        let d = exact_root(self.denom(), 2)?;
        Some(BigRational::new(n, d))
    }
    fn cbrt(&self) -> Option<Self> {
        let sign = if self.is_negative() { -BigRational::one() } else { BigRational::one() };
        let a = self.abs();
        let n = exact_root(a.numer(), 3)?;
        let d = exact_root(a.denom(), 3)?;
        Some(sign * BigRational::new(n, d))
    }
    fn is_exact() -> bool {
        true
    }
}

fn exact_root(v: &num_bigint::BigInt, k: u32) -> Option<num_bigint::BigInt> {
    if v.is_zero() {
        return Some(v.clone());
    }
    let r = v.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *v).then_some(r)
}

/// Converts a finite `f64` into the exact rational it represents.
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roots_are_exact_or_absent() {
        let r = BigRational::new(27.into(), 8.into());
        assert_eq!(Scalar::cbrt(&r), Some(BigRational::new(3.into(), 2.into())));
        let m = -BigRational::from_integer(8.into());
        assert_eq!(Scalar::cbrt(&m), Some(BigRational::from_integer((-2).into())));
        assert_eq!(Scalar::sqrt(&BigRational::from_integer(2.into())), None);
        assert_eq!(Scalar::sqrt(&m), None);
    }

    #[test]
    fn float_cbrt_is_real() {
        assert_eq!(Scalar::cbrt(&-8.0f64), Some(-2.0));
        assert_eq!(Scalar::sqrt(&-1.0f64), None);
    }
}
