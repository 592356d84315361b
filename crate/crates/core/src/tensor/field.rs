use std::fmt;
use std::sync::{Arc, OnceLock};

use super::{OperatorJet, SquareMatrix, TensorError};
use crate::expr::{Chart, EvalError, Expr};
use crate::Scalar;

/// A vector field `X = X^i d_i` with symbolic components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldExpr {
    chart: Chart,
    comps: Vec<Expr>,
}

impl VectorFieldExpr {
    pub fn new(chart: Chart, comps: Vec<Expr>) -> Result<Self, TensorError> {
        if comps.len() != chart.dim() {
            return Err(TensorError::DimensionMismatch { expected: chart.dim(), got: comps.len() });
        }
        for c in &comps {
            chart.check(c)?;
        }
        Ok(Self { chart, comps })
    }

    pub fn parse(chart: &Chart, comps: &[&str]) -> Result<Self, TensorError> {
        let exprs = comps.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(chart.clone(), exprs)
    }

    /// The coordinate field `d_k`.
    pub fn coordinate(chart: &Chart, k: usize) -> Self {
        let comps = (0..chart.dim()).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect();
        Self { chart: chart.clone(), comps }
    }

    /// Constant-coefficient field `sum c_i d_i`.
    pub fn constant(chart: &Chart, coeffs: &[i64]) -> Result<Self, TensorError> {
        Self::new(chart.clone(), coeffs.iter().map(|&c| Expr::int(c)).collect())
    }

    pub fn zero(chart: &Chart) -> Self {
        Self { chart: chart.clone(), comps: vec![Expr::zero(); chart.dim()] }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    fn same_chart(&self, other: &Chart) -> Result<(), TensorError> {
        if &self.chart == other {
            Ok(())
        } else {
            Err(TensorError::ChartMismatch)
        }
    }

    /// `[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i`.
    pub fn lie_bracket(&self, other: &Self) -> Result<Self, TensorError> {
        self.same_chart(&other.chart)?;
        let n = self.dim();
        let comps = (0..n)
            .map(|i| {
                let mut s = Expr::zero();
                for j in 0..n {
                    s = s + &self.comps[j] * other.comps[i].diff(j) - &other.comps[j] * self.comps[i].diff(j);
                }
                s
            })
            .collect();
        Ok(Self { chart: self.chart.clone(), comps })
    }

    pub fn scale(&self, f: &Expr) -> Self {
        Self { chart: self.chart.clone(), comps: self.comps.iter().map(|c| f * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.same_chart(&other.chart)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Ok(Self { chart: self.chart.clone(), comps })
    }

    pub fn eval_at<T: Scalar>(&self, p: &[T]) -> Result<Vec<T>, EvalError> {
        self.comps.iter().map(|c| c.eval(p)).collect()
    }
}

/// A (1,1)-tensor field: `entries[i][j] = A^i_j`, row = output component.
#[derive(Clone)]
pub struct OperatorField {
    chart: Chart,
    entries: Vec<Expr>,
    derivs: Arc<OnceLock<Vec<Expr>>>,
}

impl fmt::Debug for OperatorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        let rows: Vec<&[Expr]> = self.entries.chunks(n).collect();
        f.debug_struct("OperatorField").field("chart", &self.chart.names()).field("entries", &rows).finish()
    }
}

impl PartialEq for OperatorField {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart && self.entries == other.entries
    }
}

impl OperatorField {
    pub fn new(chart: Chart, rows: Vec<Vec<Expr>>) -> Result<Self, TensorError> {
        let n = chart.dim();
        if rows.len() != n {
            return Err(TensorError::DimensionMismatch { expected: n, got: rows.len() });
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(TensorError::DimensionMismatch { expected: n, got: row.len() });
            }
            for e in row {
                chart.check(&e)?;
                entries.push(e);
            }
        }
        Ok(Self::from_entries(chart, entries))
    }

    fn from_entries(chart: Chart, entries: Vec<Expr>) -> Self {
        Self { chart, entries, derivs: Arc::new(OnceLock::new()) }
    }

    /// Parses a matrix of entry strings on `chart`.
    pub fn parse<S: AsRef<str>>(chart: &Chart, rows: &[Vec<S>]) -> Result<Self, TensorError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| chart.parse(s.as_ref())).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(chart.clone(), rows)
    }

    pub fn identity(chart: &Chart) -> Self {
        Self::scalar(chart, Expr::one())
    }

    /// `f I`.
    pub fn scalar(chart: &Chart, f: Expr) -> Self {
        let n = chart.dim();
        let entries = (0..n * n).map(|idx| if idx / n == idx % n { f.clone() } else { Expr::zero() }).collect();
        Self::from_entries(chart.clone(), entries)
    }

    pub fn diagonal(chart: &Chart, diag: Vec<Expr>) -> Result<Self, TensorError> {
        let n = chart.dim();
        if diag.len() != n {
            return Err(TensorError::DimensionMismatch { expected: n, got: diag.len() });
        }
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { Expr::zero() }).collect())
            .collect();
        Self::new(chart.clone(), rows)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim() + j]
    }

    pub fn rows(&self) -> Vec<Vec<Expr>> {
        self.entries.chunks(self.dim()).map(<[Expr]>::to_vec).collect()
    }

    fn same_chart(&self, other: &Chart) -> Result<(), TensorError> {
        if &self.chart == other {
            Ok(())
        } else {
            Err(TensorError::ChartMismatch)
        }
    }

    /// `d_l A^i_j`, computed once per field and cached.
    pub fn derivative(&self, l: usize, i: usize, j: usize) -> &Expr {
        let n = self.dim();
        let table = self.derivs.get_or_init(|| {
            let mut t = Vec::with_capacity(n * n * n);
            for l in 0..n {
                for e in &self.entries {
                    t.push(e.diff(l));
                }
            }
            t
        });
        &table[(l * n + i) * n + j]
    }

    /// `(AX)^i = A^i_j X^j`.
    pub fn apply(&self, x: &VectorFieldExpr) -> Result<VectorFieldExpr, TensorError> {
        self.same_chart(x.chart())?;
        let n = self.dim();
        let comps = (0..n)
            .map(|i| (0..n).fold(Expr::zero(), |s, j| s + self.entry(i, j) * &x.components()[j]))
            .collect();
        VectorFieldExpr::new(self.chart.clone(), comps)
    }

    /// Symbolic product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self, TensorError> {
        self.same_chart(&other.chart)?;
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push((0..n).fold(Expr::zero(), |s, k| s + self.entry(i, k) * other.entry(k, j)));
            }
        }
        Ok(Self::from_entries(self.chart.clone(), entries))
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.same_chart(&other.chart)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self::from_entries(self.chart.clone(), entries))
    }

    pub fn scale(&self, f: &Expr) -> Self {
        Self::from_entries(self.chart.clone(), self.entries.iter().map(|e| f * e).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(&self.chart);
        for _ in 0..k {
            acc = acc.compose(self).expect("same chart");
        }
        acc
    }

    pub fn eval_at<T: Scalar>(&self, p: &[T]) -> Result<SquareMatrix<T>, EvalError> {
        let data = self.entries.iter().map(|e| e.eval(p)).collect::<Result<Vec<_>, _>>()?;
        Ok(SquareMatrix::from_row_major(self.dim(), data))
    }

    pub fn jet_at<T: Scalar>(&self, p: &[T]) -> Result<OperatorJet<T>, EvalError> {
        let n = self.dim();
        let value = self.eval_at(p)?;
        let grads = (0..n)
            .map(|l| {
                let mut data = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        data.push(self.derivative(l, i, j).eval(p)?);
                    }
                }
                Ok(SquareMatrix::from_row_major(n, data))
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        Ok(OperatorJet { value, grads })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_fields_commute() {
        let c = Chart::standard(3);
        let b = VectorFieldExpr::coordinate(&c, 0).lie_bracket(&VectorFieldExpr::coordinate(&c, 1)).unwrap();
        assert!(b.components().iter().all(Expr::is_zero));
    }

    #[test]
    fn bracket_of_x1_d2_with_d1() {
        let c = Chart::standard(2);
        let x = VectorFieldExpr::parse(&c, &["0", "x1"]).unwrap();
        let b = x.lie_bracket(&VectorFieldExpr::coordinate(&c, 0)).unwrap();
        assert_eq!(b.eval_at(&[0.3, 0.7]).unwrap(), vec![0.0, -1.0]);
    }

    #[test]
    fn chart_mismatch_is_an_error() {
        let x = VectorFieldExpr::coordinate(&Chart::standard(2), 0);
        let y = VectorFieldExpr::coordinate(&Chart::with_prefix("y", 2).unwrap(), 0);
        assert!(matches!(x.lie_bracket(&y), Err(TensorError::ChartMismatch)));
    }

    #[test]
    fn diagonal_operator_scales_coordinate_fields() {
        let c = Chart::standard(3);
        let d = OperatorField::diagonal(&c, vec![Expr::var(0), Expr::var(2), Expr::int(5)]).unwrap();
        for k in 0..3 {
            let e = VectorFieldExpr::coordinate(&c, k);
            let ax = d.apply(&e).unwrap().eval_at(&[2.0, 3.0, 4.0]).unwrap();
            let want = [2.0, 4.0, 5.0][k];
            for (i, v) in ax.iter().enumerate() {
                assert_eq!(*v, if i == k { want } else { 0.0 });
            }
        }
        let id = OperatorField::identity(&c);
        let x = VectorFieldExpr::parse(&c, &["x1*x2", "1", "x3^2"]).unwrap();
        assert_eq!(id.apply(&x).unwrap(), x);
    }

    #[test]
    fn jets_match_symbolic_derivatives() {
        let c = Chart::standard(2);
        let a = OperatorField::parse(&c, &[vec!["x1*x2", "x2^2"], vec!["1/x1", "0"]]).unwrap();
        let j = a.jet_at(&[2.0, 3.0]).unwrap();
        assert_eq!(j.value[(0, 0)], 6.0);
        assert_eq!(j.grads[0][(0, 0)], 3.0);
        assert_eq!(j.grads[1][(0, 1)], 6.0);
        assert_eq!(j.grads[0][(1, 0)], -0.25);
        let sq = a.pow(2);
        assert_eq!(sq.eval_at(&[2.0, 3.0]).unwrap(), &j.value * &j.value);
    }
}
