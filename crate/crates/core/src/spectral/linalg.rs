//! Dense linear-algebra helpers on top of nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

/// Singular value decomposition with singular values sorted descending.
pub(crate) struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sv: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let (rows, cols) = m.shape();
    // zero rows are appended to wide matrices so that V comes out full
    let padded;
    let work = if rows < cols {
        let mut sq = DMatrix::zeros(cols, cols);
        sq.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded = sq;
        &padded
    } else {
        m
    };
    let svd = work.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    SortedSvd {
        u: DMatrix::from_fn(rows, k, |r, c| u[(r, order[c])]),
        sv: order.iter().take(rows.min(cols)).map(|&i| svd.singular_values[i]).collect(),
        v: DMatrix::from_fn(cols, k, |r, c| vt[(order[c], r)]),
    }
}

/// Rank decision for one matrix.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct RankDecision {
    pub rank: usize,
    /// Singular value falling within a factor `band` of the threshold, if any.
    pub ambiguous: Option<f64>,
    pub threshold: f64,
}

/// Singular values `<= rel * sigma_max` count as zero; values within a factor
/// `band` of the threshold make the decision ambiguous.
pub(crate) fn numerical_rank(sv: &[f64], rel: f64, band: f64) -> RankDecision {
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return RankDecision { rank: 0, ambiguous: None, threshold: 0.0 };
    }
    let threshold = rel * smax;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let ambiguous = sv.iter().copied().find(|&s| s > threshold / band && s <= threshold * band && s != smax);
    RankDecision { rank, ambiguous, threshold }
}

/// Orthonormal basis of the column span, rank decided at `rel`.
pub fn orthonormal_basis(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = sorted_svd(m);
    let r = numerical_rank(&svd.sv, rel, 1.0).rank;
    svd.u.columns(0, r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the column span.
pub fn orthogonal_complement(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    // zero columns make U full
    let mut sq = DMatrix::zeros(n, n.max(m.ncols()));
    sq.view_mut((0, 0), m.shape()).copy_from(m);
    let svd = sorted_svd(&sq);
    let r = numerical_rank(&svd.sv, rel, 1.0).rank;
    svd.u.columns(r, n - r).into_owned()
}

/// Sine of the largest principal angle between two column spans; `1` when
/// the dimensions differ.
pub fn max_principal_angle_sin(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orthonormal_basis(a, 1e-10);
    let qb = orthonormal_basis(b, 1e-10);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = &qa - &qb * (qb.transpose() * &qa);
    let svd = sorted_svd(&resid);
    svd.sv.first().copied().unwrap_or(0.0).min(1.0)
}

/// Largest principal angle in radians.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_principal_angle_sin(a, b).asin()
}

/// Intersection of two column spans (orthonormal result), via the kernel of
/// the stacked orthogonal-complement projectors.
pub fn subspace_intersection(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let ca = orthogonal_complement(a, 1e-10);
    let cb = orthogonal_complement(b, 1e-10);
    let stacked = DMatrix::from_fn(ca.ncols() + cb.ncols(), n, |r, c| {
        if r < ca.ncols() {
            ca[(c, r)]
        } else {
            cb[(c, r - ca.ncols())]
        }
    });
    if stacked.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = sorted_svd(&stacked);
    // singular values lie in [0, sqrt 2]; the kernel is the tail of V
    let mut sv = svd.sv.clone();
    sv.resize(n, 0.0);
    let k = sv.iter().filter(|&&s| s <= tol).count();
    svd.v.columns(n - k, k).into_owned()
}

/// `|| (I - Q Q^T) v ||` for an orthonormal `Q`.
pub fn projection_residual(q: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (v - q * (q.transpose() * v)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 3.0, 1.0, 4.0, 0.0, 1.0]);
        let s = sorted_svd(&m);
        assert!(s.sv.windows(2).all(|w| w[0] >= w[1]));
        let rec = &s.u * DMatrix::from_diagonal(&DVector::from_vec(s.sv.clone())) * s.v.transpose();
        assert!((rec - m).abs().max() < 1e-12);
    }

    #[test]
    fn rectangular_bases() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(orthonormal_basis(&m, 1e-10).ncols(), 2);
        let c = orthogonal_complement(&m, 1e-10);
        assert_eq!(c.ncols(), 1);
        assert!((c[(2, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn principal_angles() {
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert!((max_principal_angle(&a, &b) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let c = DMatrix::from_row_slice(3, 1, &[-2.0, 0.0, 0.0]);
        assert!(max_principal_angle(&a, &c) < 1e-12);
    }

    #[test]
    fn intersections_of_coordinate_planes() {
        let xy = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let yz = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let i = subspace_intersection(&xy, &yz, 1e-8);
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-12);
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert_eq!(subspace_intersection(&x, &yz, 1e-8).ncols(), 0);
    }

    #[test]
    fn rank_ambiguity_band() {
        let d = numerical_rank(&[1.0, 0.5, 2e-8], 1e-8, 10.0);
        assert_eq!(d.rank, 3);
        assert!(d.ambiguous.is_some());
        let d = numerical_rank(&[1.0, 0.5, 1e-14], 1e-8, 10.0);
        assert_eq!((d.rank, d.ambiguous), (2, None));
    }
}
