use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::Scalar;

/// Dense row-major square matrix over any [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Panics unless `data.len() == n * n`.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data has the wrong length");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v.clone() * c.clone()).collect() }
    }

    /// `self - c I`.
    pub fn shift(&self, c: &T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out[(i, i)] = out[(i, i)].clone() - c.clone();
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n, "vector length mismatch");
        (0..self.n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..self.n {
                    s = s + self[(i, j)].clone() * v[j].clone();
                }
                s
            })
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> SquareMatrix<f64> {
        SquareMatrix { n: self.n, data: self.data.iter().map(Scalar::to_f64).collect() }
    }
}

impl SquareMatrix<f64> {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    /// Panics unless `m` is square.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix is not square");
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Scalar> Add for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn add(self, rhs: &SquareMatrix<T>) -> SquareMatrix<T> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect();
        SquareMatrix { n: self.n, data }
    }
}

impl<T: Scalar> Sub for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn sub(self, rhs: &SquareMatrix<T>) -> SquareMatrix<T> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect();
        SquareMatrix { n: self.n, data }
    }
}

impl<T: Scalar> Neg for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn neg(self) -> SquareMatrix<T> {
        SquareMatrix { n: self.n, data: self.data.iter().map(|a| -a.clone()).collect() }
    }
}

impl<T: Scalar> Mul for &SquareMatrix<T> {
    type Output = SquareMatrix<T>;
    fn mul(self, rhs: &SquareMatrix<T>) -> SquareMatrix<T> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = SquareMatrix::<T>::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.data[i * n + j].clone() + a.clone() * rhs.data[k * n + j].clone();
                    out.data[i * n + j] = v;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;

    #[test]
    fn products_and_powers() {
        let a = SquareMatrix::from_row_major(2, vec![1.0, 1.0, 0.0, 1.0]);
        assert_eq!(a.pow(3), SquareMatrix::from_row_major(2, vec![1.0, 3.0, 0.0, 1.0]));
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![3.0, 2.0]);
        assert_eq!(a.shift(&1.0).pow(2), SquareMatrix::zeros(2));
        assert_eq!(SquareMatrix::from_dmatrix(&a.to_dmatrix()), a);
    }

    #[test]
    fn exact_commutator() {
        let r = |v: i64| BigRational::from_integer(v.into());
        let a = SquareMatrix::from_row_major(2, vec![r(0), r(1), r(0), r(0)]);
        let b = a.transpose();
        let c = a.commutator(&b);
        assert_eq!(c, SquareMatrix::from_row_major(2, vec![r(1), r(0), r(0), r(-1)]));
    }
}
