//! Pointwise spectral analysis of operator fields.
//!
//! At a point the operator is a real matrix. Its eigenvalues are clustered,
//! each cluster gives an eigenvalue `lambda`, and the Riesz index is read off
//! the numerical ranks of the powers of `A - lambda I`. From the SVD of
//! `(A - lambda I)^rho` come the generalized eigenspace (kernel), the
//! characteristic space (image) and its annihilator.

mod joint;
pub mod linalg;
mod regularity;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::expr::{EvalError, SampleError};
use crate::tensor::{OperatorSource, SquareMatrix, TensorError};

pub use joint::{joint_refinement, JointBlock, JointRefinement, SUBSPACE_TOL};
pub use linalg::{max_principal_angle, max_principal_angle_sin, orthogonal_complement, orthonormal_basis, subspace_intersection};
pub use regularity::{involutivity_check, regularity_check, InvolutivityReport, RegularityReport, SpectrumDigest};

use linalg::{numerical_rank, sorted_svd};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("complex eigenvalue {re} + {im}i")]
    ComplexEigenvalue { re: f64, im: f64 },
    #[error("ambiguous rank of (A - {eigenvalue} I)^{power}: singular value {singular_value:e} near threshold {threshold:e}")]
    RankAmbiguous { eigenvalue: f64, power: usize, singular_value: f64, threshold: f64 },
    #[error("eigenvalue {eigenvalue}: algebraic multiplicity {algebraic}, generalized eigenspace of dimension {generalized}")]
    InconsistentMultiplicity { eigenvalue: f64, algebraic: usize, generalized: usize },
    #[error("minimal polynomial degree {spectral} from the spectrum, {powers} from the powers of A")]
    MinimalPolyMismatch { spectral: usize, powers: usize },
    #[error("ambiguous linear dependence among the powers of A")]
    PowersAmbiguous,
    #[error("operators {a} and {b} do not commute (residual {residual:e})")]
    NonCommuting { a: usize, b: usize, residual: f64 },
    #[error("joint refinement ranks sum to {total}, expected {dim}")]
    IncompleteRefinement { total: usize, dim: usize },
    #[error("spanning fields are dependent")]
    DependentFields,
    #[error("at least {0} sample points are required")]
    TooFewPoints(usize),
    #[error("at {point:?}: {source}")]
    AtPoint { point: Vec<f64>, source: Box<SpectralError> },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

impl SpectralError {
    pub(crate) fn at(self, p: &[f64]) -> Self {
        match self {
            e @ SpectralError::AtPoint { .. } => e,
            e => SpectralError::AtPoint { point: p.to_vec(), source: Box::new(e) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralTolerances {
    /// Eigenvalues closer than `cluster * (1 + max|A|)` are merged.
    pub cluster: f64,
    /// Imaginary parts up to `imag * (1 + max|A|)` are dropped.
    pub imag: f64,
    /// Singular values below `rank * sigma_max` are zero.
    pub rank: f64,
    /// Singular values within this factor of the rank threshold are ambiguous.
    pub band: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        Self { cluster: 1e-5, imag: 1e-8, rank: 1e-8, band: 10.0 }
    }
}

/// One distinct eigenvalue and its spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBlock {
    pub eigenvalue: f64,
    pub riesz: usize,
    /// Dimension of the generalized eigenspace.
    pub rank: usize,
    /// `n x rank`, orthonormal basis of `ker (A - lambda I)^rho`.
    pub eig_basis: DMatrix<f64>,
    /// `n x (n - rank)`, orthonormal basis of `Im (A - lambda I)^rho`.
    pub char_basis: DMatrix<f64>,
    /// `rank x n`; each row is a covector vanishing on `char_basis`.
    pub annihilator: DMatrix<f64>,
}

/// Spectrum of an operator at a point, eigenvalues ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumAtPoint {
    pub point: Vec<f64>,
    pub blocks: Vec<EigenBlock>,
}

impl SpectrumAtPoint {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.eigenvalue).collect()
    }

    pub fn riesz(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.riesz).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rank).collect()
    }

    /// `sum rho_i`.
    pub fn minimal_poly_degree(&self) -> usize {
        self.blocks.iter().map(|b| b.riesz).sum()
    }

    /// Index of the eigenvalue closest to `lambda`.
    pub fn nearest(&self, lambda: f64) -> Option<usize> {
        (0..self.blocks.len()).min_by(|&a, &b| {
            (self.blocks[a].eigenvalue - lambda).abs().total_cmp(&(self.blocks[b].eigenvalue - lambda).abs())
        })
    }

    pub fn digest(&self) -> SpectrumDigest {
        let mut riesz = self.riesz();
        let mut ranks = self.ranks();
        riesz.sort_unstable();
        ranks.sort_unstable();
        SpectrumDigest { distinct: self.blocks.len(), riesz, ranks }
    }
}

/// Distinct real eigenvalues with algebraic multiplicities, ascending.
pub fn clustered_eigenvalues(m: &SquareMatrix<f64>, tol: &SpectralTolerances) -> Result<Vec<(f64, usize)>, SpectralError> {
    if !m.is_finite() {
        return Err(SpectralError::NonFinite);
    }
    let n = m.dim();
    let scale = 1.0 + m.max_abs();
    let eig = m.to_dmatrix().complex_eigenvalues();
    let vals: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    // single-linkage clustering in the complex plane
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for a in 0..n {
        for b in a + 1..n {
            let d = (vals[a].0 - vals[b].0).hypot(vals[a].1 - vals[b].1);
            if d <= tol.cluster * scale {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut clusters: Vec<(usize, f64, f64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match clusters.iter_mut().find(|c| c.0 == r) {
            Some(c) => {
                c.1 += vals[i].0;
                c.2 += vals[i].1;
                c.3 += 1;
            }
            None => clusters.push((r, vals[i].0, vals[i].1, 1)),
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for (_, re, im, k) in clusters {
        let (re, im) = (re / k as f64, im / k as f64);
        if im.abs() > tol.imag * scale {
            return Err(SpectralError::ComplexEigenvalue { re, im });
        }
        out.push((re, k));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Spectral decomposition of a single matrix.
pub fn spectrum_of_matrix(m: &SquareMatrix<f64>, tol: &SpectralTolerances) -> Result<Vec<EigenBlock>, SpectralError> {
    let n = m.dim();
    let mut blocks = Vec::new();
    for (lambda, mult) in clustered_eigenvalues(m, tol)? {
        let b = m.shift(&lambda);
        let mut power = b.clone();
        let mut found = None;
        let mut prev_rank = n;
        for j in 1..=mult {
            let svd = sorted_svd(&power.to_dmatrix());
            let dec = numerical_rank(&svd.sv, tol.rank, tol.band);
            if let Some(s) = dec.ambiguous {
                return Err(SpectralError::RankAmbiguous {
                    eigenvalue: lambda,
                    power: j,
                    singular_value: s,
                    threshold: dec.threshold,
                });
            }
            if dec.rank >= prev_rank {
                // stabilized before reaching the algebraic multiplicity
                return Err(SpectralError::InconsistentMultiplicity {
                    eigenvalue: lambda,
                    algebraic: mult,
                    generalized: n - dec.rank,
                });
            }
            prev_rank = dec.rank;
            if n - dec.rank == mult {
                found = Some((j, svd));
                break;
            }
            if n - dec.rank > mult {
                return Err(SpectralError::InconsistentMultiplicity {
                    eigenvalue: lambda,
                    algebraic: mult,
                    generalized: n - dec.rank,
                });
            }
            power = &power * &b;
        }
        let Some((riesz, svd)) = found else {
            return Err(SpectralError::InconsistentMultiplicity {
                eigenvalue: lambda,
                algebraic: mult,
                generalized: n - prev_rank,
            });
        };
        let r = mult;
        blocks.push(EigenBlock {
            eigenvalue: lambda,
            riesz,
            rank: r,
            eig_basis: svd.v.columns(n - r, r).into_owned(),
            char_basis: svd.u.columns(0, n - r).into_owned(),
            annihilator: svd.u.columns(n - r, r).transpose(),
        });
    }
    Ok(blocks)
}

/// Spectrum of `a` at `p`.
pub fn spectrum_at<S: OperatorSource>(a: &S, p: &[f64], tol: &SpectralTolerances) -> Result<SpectrumAtPoint, SpectralError> {
    let run = || -> Result<SpectrumAtPoint, SpectralError> {
        let m = a.value_at(p)?;
        Ok(SpectrumAtPoint { point: p.to_vec(), blocks: spectrum_of_matrix(&m, tol)? })
    };
    run().map_err(|e| e.at(p))
}

/// Smallest `d` with `I, C, .., C^d` linearly dependent, where
/// `C = (A - cI)/s` is `A` centred at its mean eigenvalue and scaled.
pub fn powers_dependence_degree(m: &SquareMatrix<f64>, tol: &SpectralTolerances) -> Result<usize, SpectralError> {
    let n = m.dim();
    let c = (0..n).map(|i| m[(i, i)]).sum::<f64>() / n as f64;
    let centred = m.shift(&c);
    let s = centred.max_abs();
    if s == 0.0 {
        return Ok(1);
    }
    let cm = centred.scale(&(1.0 / s));
    let mut powers = vec![SquareMatrix::identity(n)];
    for d in 1..=n {
        powers.push(&powers[d - 1] * &cm);
        let k = DMatrix::from_fn(n * n, d + 1, |r, col| powers[col].as_slice()[r]);
        let svd = sorted_svd(&k);
        let dec = numerical_rank(&svd.sv, tol.rank, tol.band);
        if dec.ambiguous.is_some() {
            return Err(SpectralError::PowersAmbiguous);
        }
        if dec.rank < d + 1 {
            return Ok(d);
        }
    }
    Ok(n)
}

/// Degree of the minimal polynomial at `p`: `sum rho_i`, cross-checked
/// against the first linear dependence among the powers of `A(p)`.
pub fn minimal_poly_degree_at<S: OperatorSource>(a: &S, p: &[f64], tol: &SpectralTolerances) -> Result<usize, SpectralError> {
    let run = || -> Result<usize, SpectralError> {
        let m = a.value_at(p)?;
        let spectral: usize = spectrum_of_matrix(&m, tol)?.iter().map(|b| b.riesz).sum();
        let powers = powers_dependence_degree(&m, tol)?;
        if powers != spectral {
            return Err(SpectralError::MinimalPolyMismatch { spectral, powers });
        }
        Ok(spectral)
    };
    run().map_err(|e| e.at(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Chart;
    use crate::tensor::OperatorField;

    fn m(n: usize, v: &[f64]) -> SquareMatrix<f64> {
        SquareMatrix::from_row_major(n, v.to_vec())
    }

    #[test]
    fn identity_has_one_block() {
        let c = Chart::standard(4);
        let s = spectrum_at(&OperatorField::identity(&c), &[0.0; 4], &SpectralTolerances::default()).unwrap();
        assert_eq!(s.eigenvalues(), vec![1.0]);
        assert_eq!((s.riesz(), s.ranks()), (vec![1], vec![4]));
        assert_eq!(s.blocks[0].annihilator.nrows(), 4);
        assert_eq!(minimal_poly_degree_at(&OperatorField::identity(&c), &[0.0; 4], &SpectralTolerances::default()).unwrap(), 1);
    }

    #[test]
    fn jordan_block_and_simple_eigenvalue() {
        let a = m(3, &[2.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
        let tol = SpectralTolerances::default();
        let blocks = spectrum_of_matrix(&a, &tol).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!((blocks[0].riesz, blocks[0].rank), (1, 1));
        assert_eq!((blocks[1].riesz, blocks[1].rank), (2, 2));
        assert!((blocks[1].eigenvalue - 2.0).abs() < 1e-12);
        // annihilator of the characteristic space of -1 is dx3
        assert!((blocks[0].annihilator[(0, 2)].abs() - 1.0).abs() < 1e-12);
        assert!((&blocks[1].annihilator * &blocks[1].char_basis).abs().max() < 1e-12);
        assert_eq!(powers_dependence_degree(&a, &tol).unwrap(), 3);
    }

    #[test]
    fn rotation_is_rejected() {
        let r = m(2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(matches!(
            spectrum_of_matrix(&r, &SpectralTolerances::default()),
            Err(SpectralError::ComplexEigenvalue { .. })
        ));
    }

    #[test]
    fn near_collision_is_ambiguous_or_split() {
        let a = m(2, &[1.0, 1.0, 0.0, 1.0 + 3e-8]);
        let r = spectrum_of_matrix(&a, &SpectralTolerances::default());
        assert!(r.is_err() || r.unwrap().len() == 1);
    }
}
