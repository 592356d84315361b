#![allow(dead_code)]

use rand::Rng;
use torsionlab::expr::random_polynomial;
use torsionlab::tensor::SquareMatrix;
use torsionlab::{Chart, OperatorField, VectorFieldExpr};

/// Operator with random polynomial entries of degree `<= deg`.
pub fn random_operator<R: Rng>(rng: &mut R, n: usize, deg: u32) -> OperatorField {
    let rows = (0..n).map(|_| (0..n).map(|_| random_polynomial(rng, n, deg)).collect()).collect();
    OperatorField::new(Chart::standard(n), rows).unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `t[i][j][k]`.
pub type Components = Vec<Vec<Vec<f64>>>;

/// Nijenhuis torsion from its definition on coordinate fields:
/// `[A d_j, A d_k] - A([A d_j, d_k] + [d_j, A d_k])`.
pub fn nijenhuis_oracle(a: &OperatorField, p: &[f64]) -> Components {
    let c = a.chart().clone();
    let n = c.dim();
    let av = a.eval_at(p).unwrap();
    let mut t = vec![vec![vec![0.0; n]; n]; n];
    for j in 0..n {
        for k in 0..n {
            let dj = VectorFieldExpr::coordinate(&c, j);
            let dk = VectorFieldExpr::coordinate(&c, k);
            let adj = a.apply(&dj).unwrap();
            let adk = a.apply(&dk).unwrap();
            let b1 = adj.lie_bracket(&adk).unwrap().eval_at(p).unwrap();
            let b2 = adj.lie_bracket(&dk).unwrap().eval_at(p).unwrap();
            let b3 = dj.lie_bracket(&adk).unwrap().eval_at(p).unwrap();
            let s: Vec<f64> = b2.iter().zip(&b3).map(|(x, y)| x + y).collect();
            let as_ = av.mul_vec(&s);
            for i in 0..n {
                t[i][j][k] = b1[i] - as_[i];
            }
        }
    }
    t
}

pub fn bilinear(t: &Components, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += t[i][j][k] * x[j] * y[k];
                }
            }
            s
        })
        .collect()
}

fn column(m: &SquareMatrix<f64>, j: usize) -> Vec<f64> {
    (0..m.dim()).map(|i| m[(i, j)]).collect()
}

/// `A^2 T(X,Y) + T(AX,AY) - A(T(X,AY) + T(AX,Y))` on coordinate vectors.
pub fn level_up_oracle(t: &Components, a: &SquareMatrix<f64>) -> Components {
    let n = a.dim();
    let a2 = a * a;
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for j in 0..n {
        for k in 0..n {
            let ej: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            let ek: Vec<f64> = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
            let (aj, ak) = (column(a, j), column(a, k));
            let t1 = a2.mul_vec(&bilinear(t, &ej, &ek));
            let t2 = bilinear(t, &aj, &ak);
            let mixed: Vec<f64> = bilinear(t, &ej, &ak).iter().zip(bilinear(t, &aj, &ek)).map(|(x, y)| x + y).collect();
            let t3 = a.mul_vec(&mixed);
            for i in 0..n {
                out[i][j][k] = t1[i] + t2[i] - t3[i];
            }
        }
    }
    out
}

/// Largest `|t[i][j][k] - get(i, j, k)|`.
pub fn max_diff(t: &Components, get: impl Fn(usize, usize, usize) -> f64) -> f64 {
    let n = t.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((t[i][j][k] - get(i, j, k)).abs());
            }
        }
    }
    worst
}

pub fn max_abs(t: &Components) -> f64 {
    t.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}
