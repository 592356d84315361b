use rayon::prelude::*;

use super::{level_up, nijenhuis_from_jet, OperatorSource, SquareMatrix, TensorError, TorsionTensor};
use crate::expr::{Point, SampleDomain};
use crate::Scalar;

/// `tau^(1) .. tau^(max_level)` at `p`, sharing one jet evaluation.
pub fn torsion_tower_at<S: OperatorSource, T: Scalar>(
    a: &S,
    max_level: usize,
    p: &[T],
) -> Result<(SquareMatrix<T>, Vec<TorsionTensor<T>>), TensorError> {
    if max_level == 0 {
        return Err(TensorError::InvalidLevel(0));
    }
    let jet = a.jet_at(p).map_err(|e| TensorError::at_point(e, p))?;
    let mut tower = Vec::with_capacity(max_level);
    tower.push(nijenhuis_from_jet(&jet));
    for _ in 1..max_level {
        let next = level_up(tower.last().expect("nonempty"), &jet.value)?;
        tower.push(next);
    }
    Ok((jet.value, tower))
}

/// `tau^(m)` at `p`: the Nijenhuis torsion for `m = 1`, then `m - 1` level-ups.
pub fn torsion_at<S: OperatorSource, T: Scalar>(a: &S, m: usize, p: &[T]) -> Result<TorsionTensor<T>, TensorError> {
    let (_, mut tower) = torsion_tower_at(a, m, p)?;
    Ok(tower.pop().expect("nonempty"))
}

pub fn nijenhuis_at<S: OperatorSource, T: Scalar>(a: &S, p: &[T]) -> Result<TorsionTensor<T>, TensorError> {
    torsion_at(a, 1, p)
}

/// `max|tau^(m)| / (1 + max|A|^(2m-1))`, entrywise maxima.
pub fn normalized_residual(t: &TorsionTensor<f64>, a: &SquareMatrix<f64>) -> f64 {
    let m = t.level() as i32;
    t.max_abs() / (1.0 + a.max_abs().powi(2 * m - 1))
}

/// Residual statistics for one level over a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct VanishingReport {
    pub level: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol_rel: f64,
    pub max_residual: f64,
    pub min_residual: f64,
    /// Point attaining `max_residual` (first one on ties).
    pub worst_point: Vec<f64>,
    pub vanishing: bool,
}

/// Normalized residuals of `tau^(1..=max_level)` at each point, in sample order.
pub fn residual_table<S: OperatorSource>(
    a: &S,
    max_level: usize,
    points: &[Point],
) -> Result<Vec<Vec<f64>>, TensorError> {
    points
        .par_iter()
        .map(|p| {
            let (value, tower) = torsion_tower_at::<S, f64>(a, max_level, p)?;
            Ok(tower.iter().map(|t| normalized_residual(t, &value)).collect())
        })
        .collect()
}

/// One [`VanishingReport`] per level `1..=max_level` over the same sample.
pub fn vanishing_profile<S: OperatorSource>(
    a: &S,
    max_level: usize,
    domain: &SampleDomain,
    n_pts: usize,
    tol_rel: f64,
) -> Result<Vec<VanishingReport>, TensorError> {
    if a.dim() != domain.dim() {
        return Err(TensorError::DimensionMismatch { expected: a.dim(), got: domain.dim() });
    }
    let points = domain.sample_points(n_pts)?;
    let table = residual_table(a, max_level, &points)?;
    Ok((0..max_level)
        .map(|l| {
            let mut worst = 0;
            let mut min = f64::INFINITY;
            for (i, row) in table.iter().enumerate() {
                if row[l] > table[worst][l] {
                    worst = i;
                }
                min = min.min(row[l]);
            }
            let max = table[worst][l];
            VanishingReport {
                level: l + 1,
                samples: n_pts,
                seed: domain.seed(),
                tol_rel,
                max_residual: max,
                min_residual: min,
                worst_point: points[worst].to_vec(),
                vanishing: max <= tol_rel,
            }
        })
        .collect())
}

/// Whether `tau^(m)` vanishes on the sample: worst normalized residual `<= tol_rel`.
pub fn is_vanishing<S: OperatorSource>(
    a: &S,
    m: usize,
    domain: &SampleDomain,
    n_pts: usize,
    tol_rel: f64,
) -> Result<VanishingReport, TensorError> {
    let mut profile = vanishing_profile(a, m, domain, n_pts, tol_rel)?;
    Ok(profile.pop().expect("nonempty"))
}
