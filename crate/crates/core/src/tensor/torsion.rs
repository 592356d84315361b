use super::{OperatorJet, SquareMatrix, TensorError};
use crate::Scalar;

/// Pointwise (1,2)-tensor `T^i_{jk}` with no symmetry assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor12<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor12<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        &self.data[(i * self.n + j) * self.n + k]
    }

    fn get_mut(&mut self, i: usize, j: usize, k: usize) -> &mut T {
        &mut self.data[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    /// Largest `|T^i_{jk} + T^i_{kj}|`.
    pub fn skew_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..=j {
                    worst = worst.max((self.get(i, j, k).clone() + self.get(i, k, j).clone()).abs_f64());
                }
            }
        }
        worst
    }

    /// `T(x, y)^i = T^i_{jk} x^j y^k`.
    pub fn contract(&self, x: &[T], y: &[T]) -> Vec<T> {
        let n = self.n;
        assert!(x.len() == n && y.len() == n, "vector length mismatch");
        (0..n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..n {
                    if x[j].is_zero() {
                        continue;
                    }
                    for k in 0..n {
                        s = s + self.get(i, j, k).clone() * x[j].clone() * y[k].clone();
                    }
                }
                s
            })
            .collect()
    }

    /// `out^a_{bc} = P^a_d T^d_{ef} Q^e_b R^f_c`, i.e. `P T(Q X, R Y)`.
    pub fn transform(&self, p: &SquareMatrix<T>, q: &SquareMatrix<T>, r: &SquareMatrix<T>) -> Self {
        let n = self.n;
        assert!(p.dim() == n && q.dim() == n && r.dim() == n, "dimension mismatch");
        // u^d_{bf} = T^d_{ef} Q^e_b
        let mut u = Self::zeros(n);
        for d in 0..n {
            for e in 0..n {
                for b in 0..n {
                    let qe = &q[(e, b)];
                    if qe.is_zero() {
                        continue;
                    }
                    for f in 0..n {
                        let v = u.get(d, b, f).clone() + self.get(d, e, f).clone() * qe.clone();
                        *u.get_mut(d, b, f) = v;
                    }
                }
            }
        }
        // w^d_{bc} = u^d_{bf} R^f_c
        let mut w = Self::zeros(n);
        for d in 0..n {
            for b in 0..n {
                for f in 0..n {
                    let uf = u.get(d, b, f).clone();
                    if uf.is_zero() {
                        continue;
                    }
                    for c in 0..n {
                        let v = w.get(d, b, c).clone() + uf.clone() * r[(f, c)].clone();
                        *w.get_mut(d, b, c) = v;
                    }
                }
            }
        }
        let mut out = Self::zeros(n);
        for a in 0..n {
            for d in 0..n {
                let pd = &p[(a, d)];
                if pd.is_zero() {
                    continue;
                }
                for b in 0..n {
                    for c in 0..n {
                        let v = out.get(a, b, c).clone() + pd.clone() * w.get(d, b, c).clone();
                        *out.get_mut(a, b, c) = v;
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v.clone() * c.clone()).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Self { n: self.n, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Self { n: self.n, data }
    }

    pub fn to_f64(&self) -> Tensor12<f64> {
        Tensor12 { n: self.n, data: self.data.iter().map(Scalar::to_f64).collect() }
    }
}

/// Torsion of level `m >= 1` at one point. Skew in the lower indices by
/// construction: only `j < k` is computed, the rest is filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionTensor<T> {
    level: usize,
    tensor: Tensor12<T>,
}

impl<T: Scalar> TorsionTensor<T> {
    /// Builds from the `j < k` components given by `f`.
    pub fn from_upper(n: usize, level: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        assert!(level >= 1, "torsion levels start at 1");
        let mut t = Tensor12::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in j + 1..n {
                    let v = f(i, j, k);
                    *t.get_mut(i, k, j) = -v.clone();
                    *t.get_mut(i, j, k) = v;
                }
            }
        }
        Self { level, tensor: t }
    }

    /// Takes the `j < k` part of `t`, discarding the rest.
    pub fn from_tensor_upper(level: usize, t: &Tensor12<T>) -> Self {
        Self::from_upper(t.dim(), level, |i, j, k| t.get(i, j, k).clone())
    }

    pub fn zeros(n: usize, level: usize) -> Self {
        Self::from_upper(n, level, |_, _, _| T::zero())
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.tensor.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        self.tensor.get(i, j, k)
    }

    pub fn tensor(&self) -> &Tensor12<T> {
        &self.tensor
    }

    pub fn max_abs(&self) -> f64 {
        self.tensor.max_abs()
    }

    pub fn contract(&self, x: &[T], y: &[T]) -> Vec<T> {
        self.tensor.contract(x, y)
    }

    pub fn to_f64(&self) -> TorsionTensor<f64> {
        TorsionTensor { level: self.level, tensor: self.tensor.to_f64() }
    }
}

/// Nijenhuis torsion from the value and first derivatives of `A` at a point:
/// `T^i_{jk} = A^l_j d_l A^i_k - A^l_k d_l A^i_j - A^i_l (d_j A^l_k - d_k A^l_j)`.
pub fn nijenhuis_from_jet<T: Scalar>(jet: &OperatorJet<T>) -> TorsionTensor<T> {
    let a = &jet.value;
    let d = &jet.grads;
    let n = a.dim();
    TorsionTensor::from_upper(n, 1, |i, j, k| {
        let mut s = T::zero();
        for l in 0..n {
            s = s + a[(l, j)].clone() * d[l][(i, k)].clone() - a[(l, k)].clone() * d[l][(i, j)].clone();
            s = s - a[(i, l)].clone() * (d[j][(l, k)].clone() - d[k][(l, j)].clone());
        }
        s
    })
}

/// One step of the recursion
/// `A^2 T(X,Y) + T(AX,AY) - A(T(X,AY) + T(AX,Y))`.
pub fn level_up<T: Scalar>(t: &TorsionTensor<T>, a: &SquareMatrix<T>) -> Result<TorsionTensor<T>, TensorError> {
    let n = t.dim();
    if a.dim() != n {
        return Err(TensorError::DimensionMismatch { expected: n, got: a.dim() });
    }
    let id = SquareMatrix::identity(n);
    let a2 = a * a;
    let tt = &t.tensor;
    let sum = tt
        .transform(&a2, &id, &id)
        .add(&tt.transform(&id, a, a))
        .sub(&tt.transform(a, &id, a))
        .sub(&tt.transform(a, a, &id));
    Ok(TorsionTensor::from_tensor_upper(t.level + 1, &sum))
}
