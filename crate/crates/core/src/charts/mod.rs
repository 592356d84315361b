//! Coordinate changes `y = y(x)`: Jacobians, operator pushforward, exact
//! one-form integration and block-structure detection.

mod blocks;
mod oneform;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::expr::{Chart, EvalError, Expr, ExprError, SampleError};
use crate::tensor::{OperatorField, OperatorSource, SquareMatrix, TensorError};

pub use blocks::{detect_blocks, BlockDetection, BlockPartition};
pub use oneform::{integrate_exact_one_form, OneFormExpr, CLOSEDNESS_PROBES, CLOSEDNESS_TOL};

/// Jacobians with `|det|` at or below this are singular.
pub const MIN_JACOBIAN_DET: f64 = 1e-8;
/// Allowed `|x - x(y(x))|` when an inverse map is given.
pub const INVERSE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular Jacobian at {point:?} (det {det:e})")]
    SingularJacobian { point: Vec<f64>, det: f64 },
    #[error("chart has no inverse map")]
    NoInverse,
    #[error("inverse map is off by {defect:e} at {point:?}")]
    InverseMismatch { point: Vec<f64>, defect: f64 },
    #[error("one-form is not closed: d{j}w{i} - d{i}w{j} = {defect:e} at {point:?}")]
    NotClosed { i: usize, j: usize, point: Vec<f64>, defect: f64 },
    #[error("component {0} is not a polynomial")]
    NonPolynomial(usize),
    #[error("potential check failed: |dF - w| = {defect:e}")]
    PotentialMismatch { defect: f64 },
    #[error("evaluation failed at {point:?}: {source}")]
    Eval { point: Vec<f64>, source: EvalError },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

impl ChartError {
    fn eval(p: &[f64]) -> impl FnOnce(EvalError) -> ChartError + '_ {
        move |source| ChartError::Eval { point: p.to_vec(), source }
    }
}

/// A coordinate map from `src` (x) to `dst` (y), optionally with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoChart {
    src: Chart,
    dst: Chart,
    forward: Vec<Expr>,
    inverse: Option<Vec<Expr>>,
    jacobian: Vec<Vec<Expr>>,
}

impl DiffeoChart {
    pub fn new(src: Chart, dst: Chart, forward: Vec<Expr>) -> Result<Self, ChartError> {
        let n = src.dim();
        for (got, expected) in [(dst.dim(), n), (forward.len(), n)] {
            if got != expected {
                return Err(ChartError::DimensionMismatch { expected, got });
            }
        }
        for e in &forward {
            src.check(e)?;
        }
        let jacobian = forward.iter().map(|y| y.gradient(n)).collect();
        Ok(Self { src, dst, forward, inverse: None, jacobian })
    }

    pub fn parse(src: &Chart, dst: &Chart, forward: &[&str]) -> Result<Self, ChartError> {
        let exprs = forward.iter().map(|s| src.parse(s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(src.clone(), dst.clone(), exprs)
    }

    pub fn identity(chart: &Chart) -> Self {
        let n = chart.dim();
        Self::new(chart.clone(), chart.clone(), (0..n).map(Expr::var).collect())
            .expect("identity chart is well formed")
            .with_inverse((0..n).map(Expr::var).collect())
            .expect("identity inverse is well formed")
    }

    /// Attaches `x^i(y)`, expressions on `dst`.
    pub fn with_inverse(mut self, inverse: Vec<Expr>) -> Result<Self, ChartError> {
        if inverse.len() != self.dim() {
            return Err(ChartError::DimensionMismatch { expected: self.dim(), got: inverse.len() });
        }
        for e in &inverse {
            self.dst.check(e)?;
        }
        self.inverse = Some(inverse);
        Ok(self)
    }

    pub fn parse_inverse(self, inverse: &[&str]) -> Result<Self, ChartError> {
        let exprs = inverse.iter().map(|s| self.dst.parse(s)).collect::<Result<Vec<_>, _>>()?;
        self.with_inverse(exprs)
    }

    pub fn dim(&self) -> usize {
        self.src.dim()
    }

    pub fn src(&self) -> &Chart {
        &self.src
    }

    pub fn dst(&self) -> &Chart {
        &self.dst
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn inverse(&self) -> Option<&[Expr]> {
        self.inverse.as_deref()
    }

    /// `y(p)`.
    pub fn forward_at(&self, p: &[f64]) -> Result<Vec<f64>, ChartError> {
        self.forward.iter().map(|e| e.eval(p)).collect::<Result<_, _>>().map_err(ChartError::eval(p))
    }

    /// `x(y)`.
    pub fn inverse_at(&self, y: &[f64]) -> Result<Vec<f64>, ChartError> {
        let inv = self.inverse.as_ref().ok_or(ChartError::NoInverse)?;
        inv.iter().map(|e| e.eval(y)).collect::<Result<_, _>>().map_err(ChartError::eval(y))
    }

    /// Largest `|x - x(y(x))|` over `points`.
    pub fn inverse_defect(&self, points: &[Vec<f64>]) -> Result<f64, ChartError> {
        let mut worst: f64 = 0.0;
        for p in points {
            let back = self.inverse_at(&self.forward_at(p)?)?;
            let d = p.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// Errors unless the inverse reproduces every point within [`INVERSE_TOL`].
    pub fn check_inverse(&self, points: &[Vec<f64>]) -> Result<(), ChartError> {
        for p in points {
            let d = self.inverse_defect(std::slice::from_ref(p))?;
            if d > INVERSE_TOL {
                return Err(ChartError::InverseMismatch { point: p.clone(), defect: d });
            }
        }
        Ok(())
    }

    /// Symbolic Jacobian `dy^a/dx^i`.
    pub fn jacobian(&self) -> &[Vec<Expr>] {
        &self.jacobian
    }
}

/// `J^a_i = dy^a/dx^i (p)`.
pub fn jacobian_at(c: &DiffeoChart, p: &[f64]) -> Result<SquareMatrix<f64>, ChartError> {
    let n = c.dim();
    let mut vals = Vec::with_capacity(n * n);
    for row in &c.jacobian {
        for e in row {
            vals.push(e.eval(p).map_err(ChartError::eval(p))?);
        }
    }
    Ok(SquareMatrix::from_row_major(n, vals))
}

fn invert(j: &SquareMatrix<f64>, p: &[f64]) -> Result<DMatrix<f64>, ChartError> {
    let jm = j.to_dmatrix();
    let det = jm.determinant();
    if !(det.abs() > MIN_JACOBIAN_DET) {
        return Err(ChartError::SingularJacobian { point: p.to_vec(), det });
    }
    jm.try_inverse().ok_or(ChartError::SingularJacobian { point: p.to_vec(), det })
}

/// Components of `A` in the `y` frame at `y(p)`: `J A J^-1`.
pub fn pushforward_at<S: OperatorSource>(a: &S, c: &DiffeoChart, p: &[f64]) -> Result<SquareMatrix<f64>, ChartError> {
    if a.dim() != c.dim() {
        return Err(ChartError::DimensionMismatch { expected: c.dim(), got: a.dim() });
    }
    let j = jacobian_at(c, p)?;
    let jinv = invert(&j, p)?;
    let av = a.value_at(p).map_err(ChartError::eval(p))?;
    Ok(SquareMatrix::from_dmatrix(&(j.to_dmatrix() * av.to_dmatrix() * jinv)))
}

/// Symbolic pushforward on `dst`: `J(x(y)) A(x(y)) dx/dy (y)`. Needs the inverse.
pub fn pushforward_symbolic(a: &OperatorField, c: &DiffeoChart) -> Result<OperatorField, ChartError> {
    let inv = c.inverse.as_ref().ok_or(ChartError::NoInverse)?;
    let n = c.dim();
    if a.dim() != n {
        return Err(ChartError::DimensionMismatch { expected: n, got: a.dim() });
    }
    let jy: Vec<Vec<Expr>> = c.jacobian.iter().map(|r| r.iter().map(|e| e.substitute(inv)).collect()).collect();
    let ay: Vec<Vec<Expr>> = (0..n).map(|i| (0..n).map(|j| a.entry(i, j).substitute(inv)).collect()).collect();
    let dxdy: Vec<Vec<Expr>> = inv.iter().map(|x| x.gradient(n)).collect();
    let ja: Vec<Vec<Expr>> = (0..n)
        .map(|r| (0..n).map(|col| (0..n).fold(Expr::zero(), |s, k| s + jy[r][k].clone() * ay[k][col].clone())).collect())
        .collect();
    let rows = (0..n)
        .map(|r| (0..n).map(|col| (0..n).fold(Expr::zero(), |s, k| s + ja[r][k].clone() * dxdy[k][col].clone())).collect())
        .collect();
    Ok(OperatorField::new(c.dst.clone(), rows)?)
}

/// Largest entrywise `|P - T| / max(1, |T|)` between the pushforward of `a`
/// and a target operator on `dst` evaluated at `y(p)`.
pub fn pushforward_mismatch<S: OperatorSource>(
    a: &S,
    target: &OperatorField,
    c: &DiffeoChart,
    p: &[f64],
) -> Result<f64, ChartError> {
    let pushed = pushforward_at(a, c, p)?;
    let y = c.forward_at(p)?;
    let t = target.eval_at(&y).map_err(ChartError::eval(&y))?;
    let n = c.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (pv, tv) = (pushed[(i, j)], t[(i, j)]);
            worst = worst.max((pv - tv).abs() / tv.abs().max(1.0));
        }
    }
    Ok(worst)
}
