use num_integer::binomial;

use super::{OperatorField, SquareMatrix, TensorError, VectorFieldExpr};
use crate::expr::Expr;

/// Chain tolerance for `A X_a = mu X_a + X_{a-1}`, relative to `(1 + |A|)(1 + |X|)`.
pub const CHAIN_TOL: f64 = 1e-8;

/// Generalized eigenvector fields `X_1 .. X_alpha` for the eigenvalue `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenChain {
    pub eigenvalue: Expr,
    pub fields: Vec<VectorFieldExpr>,
}

impl EigenChain {
    pub fn new(eigenvalue: Expr, fields: Vec<VectorFieldExpr>) -> Self {
        assert!(!fields.is_empty(), "a chain needs at least one field");
        Self { eigenvalue, fields }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `X_k` for `k >= 1`; `None` for the null field `X_0` and below.
    pub fn field(&self, k: isize) -> Option<&VectorFieldExpr> {
        (k >= 1).then(|| self.fields.get(k as usize - 1)).flatten()
    }

    /// The same chain with every field multiplied by `h`.
    pub fn scaled(&self, h: &Expr) -> Self {
        Self { eigenvalue: self.eigenvalue.clone(), fields: self.fields.iter().map(|x| x.scale(h)).collect() }
    }

    /// Largest chain-condition defect at `p`, normalized.
    pub fn defect_at(&self, a: &OperatorField, p: &[f64]) -> Result<f64, TensorError> {
        let av = a.eval_at(p).map_err(|e| TensorError::at_point(e, p))?;
        let mu = self.eigenvalue.eval(p).map_err(|e| TensorError::at_point(e, p))?;
        let mut worst = 0.0f64;
        let mut prev = vec![0.0; a.dim()];
        for x in &self.fields {
            let xv = x.eval_at(p).map_err(|e| TensorError::at_point(e, p))?;
            let ax = av.mul_vec(&xv);
            let scale = (1.0 + av.max_abs()) * (1.0 + xv.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            for i in 0..xv.len() {
                worst = worst.max((ax[i] - mu * xv[i] - prev[i]).abs() / scale);
            }
            prev = xv;
        }
        Ok(worst)
    }
}

/// `sum_{i,j=0}^m (-1)^{i+j} C(m,i) C(m,j) (A - mu)^{m-i} (A - nu)^{m-j} [X_{alpha-i}, Y_{beta-j}]`
/// at `p`, for the last fields `X_alpha`, `Y_beta` of the two chains.
pub fn eigenchain_formula_rhs(
    a: &OperatorField,
    x: &EigenChain,
    y: &EigenChain,
    m: usize,
    p: &[f64],
) -> Result<Vec<f64>, TensorError> {
    if m < 2 {
        return Err(TensorError::InvalidLevel(m));
    }
    for chain in [x, y] {
        let d = chain.defect_at(a, p)?;
        if d > CHAIN_TOL {
            return Err(TensorError::ChainViolated { defect: d });
        }
    }
    let n = a.dim();
    let av = a.eval_at(p).map_err(|e| TensorError::at_point(e, p))?;
    let mu = x.eigenvalue.eval(p).map_err(|e| TensorError::at_point(e, p))?;
    let nu = y.eigenvalue.eval(p).map_err(|e| TensorError::at_point(e, p))?;
    let bm = av.shift(&mu);
    let bn = av.shift(&nu);
    let alpha = x.len() as isize;
    let beta = y.len() as isize;
    let mut out = vec![0.0; n];
    for i in 0..=m {
        let Some(xf) = x.field(alpha - i as isize) else { continue };
        for j in 0..=m {
            let Some(yf) = y.field(beta - j as isize) else { continue };
            let bracket = xf.lie_bracket(yf)?.eval_at(p).map_err(|e| TensorError::at_point(e, p))?;
            let op: SquareMatrix<f64> = &bm.pow((m - i) as u32) * &bn.pow((m - j) as u32);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * (binomial(m as u64, i as u64) * binomial(m as u64, j as u64)) as f64;
            for (o, v) in out.iter_mut().zip(op.mul_vec(&bracket)) {
                *o += c * v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Chart;

    #[test]
    fn constant_operator_gives_zero() {
        let c = Chart::standard(2);
        let a = OperatorField::parse(&c, &[vec!["2", "0"], vec!["0", "3"]]).unwrap();
        let x = EigenChain::new(Expr::int(2), vec![VectorFieldExpr::coordinate(&c, 0)]);
        let y = EigenChain::new(Expr::int(3), vec![VectorFieldExpr::coordinate(&c, 1)]);
        assert_eq!(eigenchain_formula_rhs(&a, &x, &y, 2, &[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn broken_chains_are_rejected() {
        let c = Chart::standard(2);
        let a = OperatorField::parse(&c, &[vec!["x1", "1"], vec!["0", "x1"]]).unwrap();
        let wrong = EigenChain::new(Expr::var(0), vec![VectorFieldExpr::coordinate(&c, 1)]);
        let ok = EigenChain::new(Expr::var(0), vec![VectorFieldExpr::coordinate(&c, 0)]);
        assert!(matches!(
            eigenchain_formula_rhs(&a, &wrong, &ok, 2, &[1.0, 1.0]),
            Err(TensorError::ChainViolated { .. })
        ));
        assert!(matches!(eigenchain_formula_rhs(&a, &ok, &ok, 1, &[1.0, 1.0]), Err(TensorError::InvalidLevel(1))));
    }
}
