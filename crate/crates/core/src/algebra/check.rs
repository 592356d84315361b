use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{bezout_quotient, poly_of_operator_expr, rep_apply, AlgebraError, PolySpec};
use crate::expr::{random_polynomial, Expr, Point, SampleDomain};
use crate::spectral::{minimal_poly_degree_at, SpectralTolerances};
use crate::tensor::{normalized_residual, torsion_at, torsion_tower_at, OperatorExpr, OperatorSource, Tensor12};
use crate::Scalar;

/// Degree bound of the random coefficient functions in closure checks.
pub const COMBO_COEFF_DEGREE: u32 = 2;

const COMBO_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// `max|a - b| / max(1, max|a|, max|b|)`.
pub fn relative_difference<T: Scalar>(a: &Tensor12<T>, b: &Tensor12<T>) -> f64 {
    a.sub(b).max_abs() / 1f64.max(a.max_abs()).max(b.max_abs())
}

/// Both sides of the Bezout identity at `point`, plus the scale of roundoff
/// in their evaluation: `1 + |P(A)|^(2m-1) + |S|_A (1 + |A|^(2m-1))` with
/// `|S|_A = sum |s_ijk| |A|^(i+j+k)`.
fn bezout_identity_sides(
    a: &OperatorExpr,
    p: &PolySpec,
    m: usize,
    point: &[f64],
) -> Result<(Tensor12<f64>, Tensor12<f64>, f64), AlgebraError> {
    let pa = poly_of_operator_expr(a.clone(), p);
    let pv = pa.value_at(point)?;
    let lhs = torsion_at(&pa, m, point)?;
    let (value, tower) = torsion_tower_at(a, m, point)?;
    let q = bezout_quotient(&p.eval_at(point)?);
    let s = q.pow(m as u32).mul(&q.swap_lambda_mu().pow(m as u32));
    let rhs = rep_apply(&s, tower[m - 1].tensor(), &value);
    let e = 2 * m as i32 - 1;
    let av = value.max_abs();
    let s_norm: f64 = s.terms().map(|(k, c)| c.abs() * av.powi((k[0] + k[1] + k[2]) as i32)).sum();
    let noise = 1.0 + pv.max_abs().powi(e) + s_norm * (1.0 + av.powi(e));
    Ok((lhs.tensor().clone(), rhs, noise))
}

/// Relative gap between `tau^(m)` of `P(A)` and `R_{Q(z,l)^m Q(z,mu)^m} tau^(m)_A` at `point`.
pub fn bezout_identity_residual(a: &OperatorExpr, p: &PolySpec, m: usize, point: &[f64]) -> Result<f64, AlgebraError> {
    let (lhs, rhs, _) = bezout_identity_sides(a, p, m, point)?;
    Ok(relative_difference(&lhs, &rhs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport {
    pub level: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Worst normalized residual of `tau^(m)_A`.
    pub operator_residual: f64,
    /// Worst normalized residual of `tau^(m)_{P(A)}`.
    pub polynomial_residual: f64,
    /// Worst gap in the Bezout representation identity, normalized by the
    /// roundoff scale of both sides.
    pub identity_residual: f64,
    pub preserved: bool,
    pub identity_holds: bool,
}

/// For `A` with vanishing `tau^(m)`, checks that `P(A)` has vanishing
/// `tau^(m)` and that the Bezout representation identity holds pointwise.
pub fn check_polynomial_preservation(
    a: &OperatorExpr,
    p: &PolySpec,
    m: usize,
    domain: &SampleDomain,
    n_pts: usize,
    tol: f64,
) -> Result<PreservationReport, AlgebraError> {
    let points = domain.sample_points(n_pts)?;
    let rows = points
        .par_iter()
        .map(|x| -> Result<[f64; 3], AlgebraError> {
            let (value, tower) = torsion_tower_at(a, m, x)?;
            let pa = poly_of_operator_expr(a.clone(), p);
            let (pv, pt) = torsion_tower_at(&pa, m, x)?;
            Ok([
                normalized_residual(&tower[m - 1], &value),
                normalized_residual(&pt[m - 1], &pv),
                {
                    let (lhs, rhs, noise) = bezout_identity_sides(a, p, m, x)?;
                    lhs.sub(&rhs).max_abs() / noise
                },
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    let operator_residual = worst(0);
    if operator_residual > tol {
        return Err(AlgebraError::PreconditionFailed { level: m, residual: operator_residual });
    }
    let (polynomial_residual, identity_residual) = (worst(1), worst(2));
    Ok(PreservationReport {
        level: m,
        samples: n_pts,
        seed: domain.seed(),
        tol,
        operator_residual,
        polynomial_residual,
        identity_residual,
        preserved: polynomial_residual <= tol,
        identity_holds: identity_residual <= tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraTolerances {
    /// Normalized torsion residual counted as zero.
    pub vanish_rel: f64,
    /// `|[A, B]| <= commute * (1 + |A|)(1 + |B|)`.
    pub commute: f64,
}

impl Default for AlgebraTolerances {
    fn default() -> Self {
        Self { vanish_rel: 1e-8, commute: 1e-8 }
    }
}

/// Outcome of the closure checks for a family of operators.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraCheckReport {
    pub level: usize,
    pub samples: usize,
    pub seed: u64,
    pub combos: usize,
    pub tolerances: AlgebraTolerances,
    pub commute: Vec<Vec<bool>>,
    pub commute_residual: f64,
    pub generators_residual: f64,
    pub module_closed: bool,
    pub module_residual: f64,
    pub ring_closed: bool,
    pub ring_residual: f64,
}

impl AlgebraCheckReport {
    pub fn commutative(&self) -> bool {
        self.commute.iter().flatten().all(|&b| b)
    }

    pub fn generators_vanishing(&self) -> bool {
        self.generators_residual <= self.tolerances.vanish_rel
    }

    pub fn passes(&self) -> bool {
        self.commutative() && self.generators_vanishing() && self.module_closed && self.ring_closed
    }
}

struct Combo {
    f: Expr,
    g: Expr,
    a: usize,
    b: usize,
}

fn worst_residual<S: OperatorSource>(op: &S, m: usize, points: &[Point]) -> Result<f64, AlgebraError> {
    points.iter().try_fold(0.0, |acc: f64, x| {
        let (value, tower) = torsion_tower_at(op, m, x)?;
        Ok(acc.max(normalized_residual(&tower[m - 1], &value)))
    })
}

/// Pairwise commutation, level-`m` vanishing of the generators, and closure
/// under `f K_a + g K_b` and `K_a K_b` for `n_combos` random choices of
/// generators and coefficient polynomials.
pub fn check_algebra(
    ops: &[OperatorExpr],
    m: usize,
    domain: &SampleDomain,
    n_pts: usize,
    n_combos: usize,
    tol: &AlgebraTolerances,
) -> Result<AlgebraCheckReport, AlgebraError> {
    let Some(first) = ops.first() else {
        return Err(AlgebraError::EmptyFamily);
    };
    let n = first.dim();
    for op in ops {
        if op.dim() != n || domain.dim() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, got: op.dim().max(domain.dim()) });
        }
    }
    let points = domain.sample_points(n_pts)?;

    let values = points
        .par_iter()
        .map(|x| ops.iter().map(|op| op.value_at(x)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let k = ops.len();
    let mut commute = vec![vec![true; k]; k];
    let mut commute_residual: f64 = 0.0;
    for vals in &values {
        for a in 0..k {
            for b in a + 1..k {
                let scale = (1.0 + vals[a].max_abs()) * (1.0 + vals[b].max_abs());
                let r = vals[a].commutator(&vals[b]).max_abs() / scale;
                commute_residual = commute_residual.max(r);
                if r > tol.commute {
                    commute[a][b] = false;
                    commute[b][a] = false;
                }
            }
        }
    }

    let generators_residual = ops
        .par_iter()
        .map(|op| worst_residual(op, m, &points))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(domain.seed() ^ COMBO_SEED_SALT);
    let combos: Vec<Combo> = (0..n_combos)
        .map(|_| Combo {
            f: random_polynomial(&mut rng, n, COMBO_COEFF_DEGREE),
            g: random_polynomial(&mut rng, n, COMBO_COEFF_DEGREE),
            a: rng.random_range(0..k),
            b: rng.random_range(0..k),
        })
        .collect();
    let results = combos
        .par_iter()
        .map(|c| -> Result<(f64, f64), AlgebraError> {
            let lin = OperatorExpr::combination(c.f.clone(), ops[c.a].clone(), c.g.clone(), ops[c.b].clone());
            let prod = OperatorExpr::product(ops[c.a].clone(), ops[c.b].clone());
            Ok((worst_residual(&lin, m, &points)?, worst_residual(&prod, m, &points)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let module_residual = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let ring_residual = results.iter().map(|r| r.1).fold(0.0, f64::max);

    Ok(AlgebraCheckReport {
        level: m,
        samples: n_pts,
        seed: domain.seed(),
        combos: n_combos,
        tolerances: *tol,
        commute,
        commute_residual,
        generators_residual,
        module_closed: module_residual <= tol.vanish_rel,
        module_residual,
        ring_closed: ring_residual <= tol.vanish_rel,
        ring_residual,
    })
}

/// Exponents `0..d` of the independent powers of `A(p)`, with `d` the degree
/// of the minimal polynomial. Independence is checked on the centred, scaled
/// powers, which span the same space.
pub fn cyclic_basis<S: OperatorSource>(a: &S, p: &[f64], tol: &SpectralTolerances) -> Result<Vec<u32>, AlgebraError> {
    let d = minimal_poly_degree_at(a, p, tol)?;
    Ok((0..d as u32).collect())
}
