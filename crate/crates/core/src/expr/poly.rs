//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Expr, Node};

/// Exponent vector (one entry per chart variable) to coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index out of range");
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut p = Self::zero(dim);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.dim, BigRational::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Converts a polynomial expression; `None` when `e` is not one
    /// or references variables beyond `dim`.
    pub fn from_expr(e: &Expr, dim: usize) -> Option<Self> {
        Some(match e.node() {
            Node::Const(c) => Self::constant(dim, c.clone()),
            Node::Var(i) => {
                if *i >= dim {
                    return None;
                }
                Self::var(dim, *i)
            }
            Node::Add(a, b) => &Self::from_expr(a, dim)? + &Self::from_expr(b, dim)?,
            Node::Sub(a, b) => &Self::from_expr(a, dim)? - &Self::from_expr(b, dim)?,
            Node::Mul(a, b) => &Self::from_expr(a, dim)? * &Self::from_expr(b, dim)?,
            Node::Div(a, b) => {
                let c = b.as_const().filter(|c| !c.is_zero())?;
                Self::from_expr(a, dim)?.scale(&c.recip())
            }
            Node::Pow(a, k) => {
                if *k < 0 {
                    return None;
                }
                Self::from_expr(a, dim)?.pow(*k as u32)
            }
            Node::Neg(a) => -&Self::from_expr(a, dim)?,
            Node::Sqrt(_) | Node::Cbrt(_) => return None,
        })
    }

    /// Sum of monomials, coefficients first.
    pub fn to_expr(&self) -> Expr {
        let mut out = Expr::zero();
        for (e, c) in &self.terms {
            let mut mono = Expr::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    mono = mono * Expr::powi(Expr::var(i), k as i32);
                }
            }
            out = out + mono;
        }
        out
    }

    pub fn diff(&self, var: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                out.add_term(e2, c * BigRational::from_integer(BigInt::from(e[var])));
            }
        }
        out
    }

    /// Antiderivative in `var` vanishing on `x_var = 0`.
    pub fn antiderivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[var] += 1;
            let k = BigRational::from_integer(BigInt::from(e2[var]));
            out.add_term(e2, c / k);
        }
        out
    }

    /// Sets every variable with index greater than `var` to zero.
    pub fn truncate_after(&self, var: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[var + 1..].iter().all(|&k| k == 0) {
                out.add_term(e.clone(), c.clone());
            }
        }
        out
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().enumerate().fold(Expr::const_to_f64(c), |acc, (i, &k)| acc * p[i].powi(k as i32))
            })
            .sum()
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-BigRational::one())
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Chart;

    #[test]
    fn round_trip_through_expr() {
        let c = Chart::standard(3);
        let e = c.parse("(x1 + x2)^2 - x1*(x1 - x3/2)").unwrap();
        let p = MultiPoly::from_expr(&e, 3).unwrap();
        assert_eq!(p.degree(), Some(2));
        let q = MultiPoly::from_expr(&p.to_expr(), 3).unwrap();
        assert_eq!(p, q);
        let pt = [0.3, -1.2, 2.5];
        assert!((p.eval(&pt) - e.eval(&pt).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_polynomials() {
        let c = Chart::standard(2);
        assert!(MultiPoly::from_expr(&c.parse("1/x1").unwrap(), 2).is_none());
        assert!(MultiPoly::from_expr(&c.parse("sqrt(x1)").unwrap(), 2).is_none());
        assert!(MultiPoly::from_expr(&c.parse("x2").unwrap(), 1).is_none());
    }

    #[test]
    fn antiderivative_inverts_diff() {
        let c = Chart::standard(2);
        let p = MultiPoly::from_expr(&c.parse("3*x1^2*x2 + x2 - 7").unwrap(), 2).unwrap();
        assert_eq!(p.antiderivative(0).diff(0), p);
        assert!(p.antiderivative(1).truncate_after(0).is_zero());
    }
}
