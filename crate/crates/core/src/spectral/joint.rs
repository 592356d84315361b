use nalgebra::DMatrix;

use super::linalg::subspace_intersection;
use super::{spectrum_of_matrix, SpectralError, SpectralTolerances};
use crate::tensor::{OperatorSource, SquareMatrix};

/// Singular values of stacked complements below this are treated as a
/// common direction.
pub const SUBSPACE_TOL: f64 = 1e-6;

/// A joint generalized eigenspace, with one eigenvalue per operator.
#[derive(Clone, Debug, PartialEq)]
pub struct JointBlock {
    pub eigenvalues: Vec<f64>,
    pub basis: DMatrix<f64>,
}

impl JointBlock {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointRefinement {
    pub point: Vec<f64>,
    pub blocks: Vec<JointBlock>,
    /// Largest `|(I - Q Q^T) A Q|` over blocks and operators.
    pub invariance_residual: f64,
}

/// Intersections of the generalized eigenspaces of commuting operators at
/// `p`, ordered lexicographically by the eigenvalue tuples.
pub fn joint_refinement<S: OperatorSource>(
    ops: &[&S],
    p: &[f64],
    tol: &SpectralTolerances,
) -> Result<JointRefinement, SpectralError> {
    let run = || -> Result<JointRefinement, SpectralError> {
        let mats = ops.iter().map(|a| a.value_at(p)).collect::<Result<Vec<_>, _>>()?;
        joint_refinement_of_matrices(&mats, tol).map(|(blocks, invariance_residual)| JointRefinement {
            point: p.to_vec(),
            blocks,
            invariance_residual,
        })
    };
    run().map_err(|e| e.at(p))
}

pub(crate) fn joint_refinement_of_matrices(
    mats: &[SquareMatrix<f64>],
    tol: &SpectralTolerances,
) -> Result<(Vec<JointBlock>, f64), SpectralError> {
    let Some(first) = mats.first() else {
        return Ok((Vec::new(), 0.0));
    };
    let n = first.dim();
    for (a, ma) in mats.iter().enumerate() {
        for (b, mb) in mats.iter().enumerate().skip(a + 1) {
            let residual = ma.commutator(mb).max_abs();
            if residual > 1e-8 * (1.0 + ma.max_abs()) * (1.0 + mb.max_abs()) {
                return Err(SpectralError::NonCommuting { a, b, residual });
            }
        }
    }
    let mut blocks = vec![JointBlock { eigenvalues: Vec::new(), basis: DMatrix::identity(n, n) }];
    for m in mats {
        let spectrum = spectrum_of_matrix(m, tol)?;
        let mut next = Vec::new();
        for blk in &blocks {
            for eb in &spectrum {
                let basis = subspace_intersection(&blk.basis, &eb.eig_basis, SUBSPACE_TOL);
                if basis.ncols() > 0 {
                    let mut eigenvalues = blk.eigenvalues.clone();
                    eigenvalues.push(eb.eigenvalue);
                    next.push(JointBlock { eigenvalues, basis });
                }
            }
        }
        blocks = next;
    }
    let total: usize = blocks.iter().map(JointBlock::rank).sum();
    if total != n {
        return Err(SpectralError::IncompleteRefinement { total, dim: n });
    }
    let mut invariance: f64 = 0.0;
    for blk in &blocks {
        let q = &blk.basis;
        for m in mats {
            let aq = m.to_dmatrix() * q;
            let r = (&aq - q * (q.transpose() * &aq)).abs().max();
            invariance = invariance.max(r);
        }
    }
    Ok((blocks, invariance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pair_splits_into_lines() {
        let a = SquareMatrix::from_row_major(3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let b = SquareMatrix::from_row_major(3, vec![5.0, 0.0, 0.0, 0.0, 7.0, 0.0, 0.0, 0.0, 7.0]);
        let (blocks, inv) = joint_refinement_of_matrices(&[a, b], &SpectralTolerances::default()).unwrap();
        let tuples: Vec<_> = blocks.iter().map(|b| (b.eigenvalues.clone(), b.rank())).collect();
        assert_eq!(tuples.len(), 3);
        assert_eq!(tuples[0].1, 1);
        assert!((tuples[0].0[1] - 5.0).abs() < 1e-12 && (tuples[1].0[1] - 7.0).abs() < 1e-12);
        assert!((tuples[2].0[0] - 2.0).abs() < 1e-12);
        assert!(inv < 1e-12);
    }

    #[test]
    fn non_commuting_is_reported() {
        let a = SquareMatrix::from_row_major(2, vec![0.0, 1.0, 0.0, 0.0]);
        let b = a.transpose();
        assert!(matches!(
            joint_refinement_of_matrices(&[a, b], &SpectralTolerances::default()),
            Err(SpectralError::NonCommuting { a: 0, b: 1, .. })
        ));
    }
}
