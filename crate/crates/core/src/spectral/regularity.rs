use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::linalg::{numerical_rank, projection_residual, sorted_svd};
use super::{spectrum_at, SpectralError, SpectralTolerances};
use crate::expr::{Point, SampleDomain};
use crate::tensor::{OperatorSource, TensorError, VectorFieldExpr};

/// Shape of a spectrum: number of distinct eigenvalues, sorted Riesz
/// indices, sorted generalized-eigenspace dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpectrumDigest {
    pub distinct: usize,
    pub riesz: Vec<usize>,
    pub ranks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub samples: usize,
    pub seed: u64,
    pub digests: Vec<SpectrumDigest>,
    pub constant: bool,
    /// First sample whose digest differs from the first one.
    pub first_discrepancy: Option<(usize, Vec<f64>)>,
}

/// Samples the spectrum shape over `domain`; regular iff it never changes.
pub fn regularity_check<S: OperatorSource>(
    a: &S,
    domain: &SampleDomain,
    n_pts: usize,
    tol: &SpectralTolerances,
) -> Result<RegularityReport, SpectralError> {
    if n_pts < 2 {
        return Err(SpectralError::TooFewPoints(2));
    }
    let points = domain.sample_points(n_pts)?;
    let digests = points
        .par_iter()
        .map(|p| spectrum_at(a, p, tol).map(|s| s.digest()))
        .collect::<Result<Vec<_>, _>>()?;
    let first_discrepancy = digests
        .iter()
        .position(|d| d != &digests[0])
        .map(|i| (i, points[i].to_vec()));
    Ok(RegularityReport {
        samples: n_pts,
        seed: domain.seed(),
        constant: first_discrepancy.is_none(),
        digests,
        first_discrepancy,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvolutivityReport {
    pub involutive: bool,
    /// Largest `|[X_a, X_b] - proj|` over pairs and points.
    pub worst_residual: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub worst_point: Vec<f64>,
}

/// Whether each bracket `[X_a, X_b]` stays in the span of the fields, tested
/// by least-squares projection at sampled points.
pub fn involutivity_check(
    fields: &[VectorFieldExpr],
    domain: &SampleDomain,
    n_pts: usize,
    tol: f64,
) -> Result<InvolutivityReport, SpectralError> {
    let Some(first) = fields.first() else {
        return Ok(InvolutivityReport { involutive: true, worst_residual: 0.0, worst_pair: None, worst_point: Vec::new() });
    };
    let n = first.dim();
    let mut brackets = Vec::new();
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            brackets.push(((a, b), fields[a].lie_bracket(&fields[b])?));
        }
    }
    let points = domain.sample_points(n_pts)?;
    let per_point = points
        .par_iter()
        .map(|p: &Point| -> Result<(f64, Option<(usize, usize)>), SpectralError> {
            let eval = |x: &VectorFieldExpr| x.eval_at(p).map_err(|e| SpectralError::from(TensorError::at_point(e, p)));
            let cols = fields.iter().map(eval).collect::<Result<Vec<_>, _>>()?;
            let f = DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
            let svd = sorted_svd(&f);
            if numerical_rank(&svd.sv, 1e-8, 1.0).rank < cols.len() {
                return Err(SpectralError::DependentFields.at(p));
            }
            let q = svd.u.columns(0, cols.len()).into_owned();
            let mut worst = (0.0, None);
            for (pair, br) in &brackets {
                let v = DVector::from_vec(eval(br)?);
                let r = projection_residual(&q, &v);
                if r > worst.0 {
                    worst = (r, Some(*pair));
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = (0.0, None, Vec::new());
    for (i, (r, pair)) in per_point.into_iter().enumerate() {
        if pair.is_some() && r > best.0 {
            best = (r, pair, points[i].to_vec());
        }
    }
    Ok(InvolutivityReport { involutive: best.0 <= tol, worst_residual: best.0, worst_pair: best.1, worst_point: best.2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Chart, Expr};
    use crate::tensor::OperatorField;

    #[test]
    fn constant_matrix_is_regular() {
        let c = Chart::standard(2);
        let a = OperatorField::parse(&c, &[vec!["1", "1"], vec!["0", "1"]]).unwrap();
        let d = SampleDomain::cube(2, 0.0, 1.0, 1).unwrap();
        let r = regularity_check(&a, &d, 5, &SpectralTolerances::default()).unwrap();
        assert!(r.constant);
        assert_eq!(r.digests[0], SpectrumDigest { distinct: 1, riesz: vec![2], ranks: vec![2] });
    }

    #[test]
    fn collision_breaks_regularity() {
        let a = OperatorField::diagonal(&Chart::standard(2), vec![Expr::var(0), -Expr::var(0)]).unwrap();
        let d = SampleDomain::new(vec![(-1.0, 1.0), (0.0, 0.0)], 3).unwrap();
        // force a sample at the collision
        let d0 = SampleDomain::new(vec![(0.0, 0.0), (0.0, 0.0)], 3).unwrap();
        let at0 = spectrum_at(&a, &d0.sample_points(1).unwrap()[0], &SpectralTolerances::default()).unwrap();
        assert_eq!(at0.blocks.len(), 1);
        let generic = regularity_check(&a, &d, 20, &SpectralTolerances::default()).unwrap();
        assert_eq!(generic.digests[0].distinct, 2);
    }

    #[test]
    fn involutive_and_not() {
        let c = Chart::standard(3);
        let d = SampleDomain::cube(3, 1.0, 2.0, 5).unwrap();
        let coord = [VectorFieldExpr::coordinate(&c, 0), VectorFieldExpr::coordinate(&c, 1)];
        assert!(involutivity_check(&coord, &d, 10, 1e-10).unwrap().involutive);
        let x = VectorFieldExpr::coordinate(&c, 1);
        let y = VectorFieldExpr::parse(&c, &["x2", "0", "1"]).unwrap();
        let r = involutivity_check(&[x, y], &d, 10, 1e-10).unwrap();
        assert!(!r.involutive);
        assert_eq!(r.worst_pair, Some((0, 1)));
    }
}
