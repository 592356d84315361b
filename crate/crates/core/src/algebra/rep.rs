use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg};

use num_traits::{One, Zero};

use crate::expr::{EvalError, Expr};
use crate::tensor::{SquareMatrix, Tensor12};
use crate::Scalar;

/// Coefficient ring for [`TriPoly`]: `Expr` symbolically, a [`Scalar`] at a point.
pub trait Coeff: Clone + Zero + One + Add<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {}

impl<C: Clone + Zero + One + Add<Output = C> + Mul<Output = C> + Neg<Output = C>> Coeff for C {}

/// Sparse polynomial in `z, lambda, mu`: exponents `[i, j, k]` to `s_ijk`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriPoly<C = Expr> {
    terms: BTreeMap<[u32; 3], C>,
}

impl<C: Coeff> TriPoly<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(exps: [u32; 3], c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    pub fn z() -> Self {
        Self::monomial([1, 0, 0], C::one())
    }

    pub fn lambda() -> Self {
        Self::monomial([0, 1, 0], C::one())
    }

    pub fn mu() -> Self {
        Self::monomial([0, 0, 1], C::one())
    }

    /// `(z - lambda)(z - mu)`.
    pub fn sigma() -> Self {
        let zl = Self::z().add(&Self::lambda().neg());
        let zm = Self::z().add(&Self::mu().neg());
        zl.mul(&zm)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponent of any variable.
    pub fn max_exponent(&self) -> u32 {
        self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: [u32; 3], c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&exps) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(exps, s);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(C::one()), |acc, _| acc.mul(self))
    }

    /// Exchanges the roles of `lambda` and `mu`.
    pub fn swap_lambda_mu(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| ([e[0], e[2], e[1]], c.clone())).collect() }
    }

    pub fn map<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> TriPoly<D> {
        let mut out = TriPoly::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, f(c));
        }
        out
    }
}

impl TriPoly<Expr> {
    /// Coefficients evaluated at `p`.
    pub fn eval_at<T: Scalar>(&self, p: &[T]) -> Result<TriPoly<T>, EvalError> {
        let mut out = TriPoly::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c.eval(p)?);
        }
        Ok(out)
    }
}

/// `Q_P(z, lambda) = sum_{k>=1} c_k sum_{p+q=k-1} z^p lambda^q`, so that
/// `P(z) - P(lambda) = (z - lambda) Q_P(z, lambda)`. No `mu` appears.
pub fn bezout_quotient<C: Coeff>(coeffs: &[C]) -> TriPoly<C> {
    let mut q = TriPoly::zero();
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        for p in 0..k as u32 {
            q.add_term([p, k as u32 - 1 - p, 0], c.clone());
        }
    }
    q
}

/// `R_S(T)(X, Y) = sum s_ijk A^i T(A^j X, A^k Y)`.
///
/// Panics on dimension mismatch.
pub fn rep_apply<T: Scalar>(s: &TriPoly<T>, t: &Tensor12<T>, a: &SquareMatrix<T>) -> Tensor12<T> {
    let n = t.dim();
    assert_eq!(a.dim(), n, "dimension mismatch");
    let mut powers = vec![SquareMatrix::identity(n)];
    for k in 1..=s.max_exponent() as usize {
        powers.push(&powers[k - 1] * a);
    }
    let mut out = Tensor12::zeros(n);
    for (e, c) in s.terms() {
        let term = t.transform(&powers[e[0] as usize], &powers[e[1] as usize], &powers[e[2] as usize]);
        out = out.add(&term.scale(c));
    }
    out
}
