use super::ChartError;
use crate::expr::{Chart, Expr, MultiPoly, SampleDomain};

/// Number of random points at which closedness and `dF = w` are checked.
pub const CLOSEDNESS_PROBES: usize = 20;
/// Absolute tolerance for both probe checks.
pub const CLOSEDNESS_TOL: f64 = 1e-10;

const PROBE_SEED: u64 = 7;

/// A one-form `w = w_i dx^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormExpr {
    chart: Chart,
    comps: Vec<Expr>,
}

impl OneFormExpr {
    pub fn new(chart: Chart, comps: Vec<Expr>) -> Result<Self, ChartError> {
        if comps.len() != chart.dim() {
            return Err(ChartError::DimensionMismatch { expected: chart.dim(), got: comps.len() });
        }
        for c in &comps {
            chart.check(c)?;
        }
        Ok(Self { chart, comps })
    }

    pub fn parse(chart: &Chart, comps: &[&str]) -> Result<Self, ChartError> {
        let exprs = comps.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>, _>>()?;
        Self::new(chart.clone(), exprs)
    }

    /// `dF`.
    pub fn exact(chart: &Chart, f: &Expr) -> Result<Self, ChartError> {
        Self::new(chart.clone(), f.gradient(chart.dim()))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn scale(&self, f: &Expr) -> Self {
        Self { chart: self.chart.clone(), comps: self.comps.iter().map(|c| c.clone() * f.clone()).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, ChartError> {
        if other.comps.len() != self.comps.len() {
            return Err(ChartError::DimensionMismatch { expected: self.comps.len(), got: other.comps.len() });
        }
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Self { chart: self.chart.clone(), comps })
    }

    pub fn eval_at(&self, p: &[f64]) -> Result<Vec<f64>, ChartError> {
        self.comps.iter().map(|c| c.eval(p)).collect::<Result<_, _>>().map_err(ChartError::eval(p))
    }

    fn probes(&self) -> Result<Vec<Vec<f64>>, ChartError> {
        let domain = SampleDomain::cube(self.chart.dim(), -1.0, 1.0, PROBE_SEED)?;
        Ok(domain.sample_points(CLOSEDNESS_PROBES)?.into_iter().map(|p| p.into_inner()).collect())
    }

    /// Checks `d_i w_j = d_j w_i` at the probe points.
    pub fn check_closed(&self) -> Result<(), ChartError> {
        let n = self.chart.dim();
        let grads: Vec<Vec<Expr>> = self.comps.iter().map(|w| w.gradient(n)).collect();
        for p in self.probes()? {
            for i in 0..n {
                for j in i + 1..n {
                    let a = grads[j][i].eval(&p).map_err(ChartError::eval(&p))?;
                    let b = grads[i][j].eval(&p).map_err(ChartError::eval(&p))?;
                    if (a - b).abs() > CLOSEDNESS_TOL {
                        return Err(ChartError::NotClosed { i, j, point: p, defect: (a - b).abs() });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Potential `F` with `dF = w` and `F(0) = 0`, integrating along the
/// coordinate axes from the origin.
pub fn integrate_exact_one_form(w: &OneFormExpr) -> Result<Expr, ChartError> {
    let n = w.chart.dim();
    let mut polys = Vec::with_capacity(n);
    for (i, c) in w.comps.iter().enumerate() {
        polys.push(MultiPoly::from_expr(c, n).ok_or(ChartError::NonPolynomial(i))?);
    }
    w.check_closed()?;
    // leg i runs along x^i with x^{i+1..} still zero
    let mut f = MultiPoly::zero(n);
    for (i, p) in polys.iter().enumerate() {
        f = &f + &p.truncate_after(i).antiderivative(i);
    }
    let potential = f.to_expr();
    let dw = OneFormExpr::exact(&w.chart, &potential)?;
    for p in w.probes()? {
        let (a, b) = (dw.eval_at(&p)?, w.eval_at(&p)?);
        let defect = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if defect > CLOSEDNESS_TOL {
            return Err(ChartError::PotentialMismatch { defect });
        }
    }
    Ok(potential)
}
