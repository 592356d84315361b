//! Property tests: parsing, differentiation and exact torsion identities.

mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torsionlab::algebra::{bezout_quotient, rep_apply, TriPoly};
use torsionlab::expr::{random_polynomial, MultiPoly};
use torsionlab::tensor::{torsion_at, OperatorExpr, Tensor12};
use torsionlab::{Chart, Expr, OperatorSource};

use common::random_operator;

const DIM: usize = 3;

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![(0..DIM).prop_map(Expr::var), (-9i64..=9, 1i64..=4).prop_map(|(n, d)| Expr::ratio(n, d))]
}

/// Expressions that are smooth wherever they evaluate.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), -2i32..=3).prop_map(|(a, k)| Expr::powi(a, k)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::quotient(a, Expr::int(2) + b.clone() * b)),
            inner.clone().prop_map(|a| Expr::sqrt(Expr::int(1) + a.clone() * a)),
            inner.prop_map(Expr::cbrt),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, DIM)
}

fn rational_point(n: usize) -> impl Strategy<Value = Vec<BigRational>> {
    proptest::collection::vec((-12i64..=12, 1i64..=5).prop_map(|(a, b)| rat(a, b)), n)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn poly_of(e: &Expr) -> MultiPoly {
    MultiPoly::from_expr(e, DIM).expect("polynomial")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_text_parses_back(e in expr(), p in point()) {
        let c = Chart::standard(DIM);
        let text = e.to_text(&c);
        let back = c.parse(&text).unwrap();
        prop_assert_eq!(back.to_text(&c), text.clone());
        if let (Ok(u), Ok(v)) = (e.eval::<f64>(&p), back.eval::<f64>(&p)) {
            prop_assert!(close(u, v, 1e-12), "{} -> {} vs {}", text, u, v);
        }
    }

    #[test]
    fn derivative_matches_central_difference(e in expr(), p in point(), var in 0..DIM) {
        let h = 1e-5;
        let shifted = |s: f64| {
            let mut q = p.clone();
            q[var] += s;
            e.eval::<f64>(&q)
        };
        let (Ok(fp), Ok(fm), Ok(d)) = (shifted(h), shifted(-h), e.diff(var).eval::<f64>(&p)) else {
            return Ok(());
        };
        // stay away from poles and the cusp of cbrt
        let (Ok(f2p), Ok(f2m)) = (shifted(2.0 * h), shifted(-2.0 * h)) else { return Ok(()); };
        let fd = (8.0 * (fp - fm) - (f2p - f2m)) / (12.0 * h);
        let curvature = (fp + fm - 2.0 * e.eval::<f64>(&p).unwrap()).abs() / (h * h);
        prop_assume!(d.abs() < 1e4 && curvature < 1e4);
        prop_assert!(close(d, fd, 1e-5), "d/dx{}: {} vs {}", var + 1, d, fd);
    }

    #[test]
    fn polynomial_derivative_is_exact(seed in any::<u64>(), var in 0..DIM) {
        let e = random_polynomial(&mut ChaCha8Rng::seed_from_u64(seed), DIM, 4);
        prop_assert_eq!(poly_of(&e.diff(var)), poly_of(&e).diff(var));
    }

    #[test]
    fn exact_affine_scaling_of_level_two(seed in any::<u64>(), p in rational_point(DIM)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_operator(&mut rng, DIM, 2);
        let f = random_polynomial(&mut rng, DIM, 2);
        let g = random_polynomial(&mut rng, DIM, 2);
        let combo = OperatorExpr::affine(f, g.clone(), a.clone().into());
        let lhs = torsion_at(&combo, 2, &p).unwrap();
        let g4 = num_traits::pow(g.eval(&p).unwrap(), 4);
        let rhs = torsion_at(&a, 2, &p).unwrap().tensor().scale(&g4);
        prop_assert_eq!(lhs.tensor(), &rhs);
    }

    #[test]
    fn exact_sigma_recursion(seed in any::<u64>(), p in rational_point(DIM), m in 1usize..=3) {
        let a = random_operator(&mut ChaCha8Rng::seed_from_u64(seed), DIM, 2);
        let value = a.value_at(&p).unwrap();
        let t = torsion_at(&a, m, &p).unwrap();
        let next = torsion_at(&a, m + 1, &p).unwrap();
        prop_assert_eq!(&rep_apply(&TriPoly::sigma(), t.tensor(), &value), next.tensor());
    }

    #[test]
    fn representation_is_multiplicative(seed in any::<u64>(), p in rational_point(DIM)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_operator(&mut rng, DIM, 1).value_at(&p).unwrap();
        let t = torsion_at(&random_operator(&mut rng, DIM, 2), 1, &p).unwrap().tensor().clone();
        let s1 = TriPoly::sigma().add(&TriPoly::z().mul(&TriPoly::constant(rat(3, 2))));
        let s2 = TriPoly::lambda().add(&TriPoly::mu().pow(2)).add(&TriPoly::constant(rat(-1, 1)));
        let nested = rep_apply(&s1, &rep_apply(&s2, &t, &a), &a);
        prop_assert_eq!(rep_apply(&s1.mul(&s2), &t, &a), nested);
    }

    #[test]
    fn symmetric_representations_keep_skew_tensors_skew(seed in any::<u64>(), p in rational_point(DIM)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_operator(&mut rng, DIM, 1).value_at(&p).unwrap();
        let t = torsion_at(&random_operator(&mut rng, DIM, 2), 1, &p).unwrap().tensor().clone();
        let s = TriPoly::sigma().pow(2).add(&TriPoly::lambda().mul(&TriPoly::mu()));
        let out: Tensor12<BigRational> = rep_apply(&s, &t, &a);
        prop_assert_eq!(out.skew_defect(), 0.0);
    }

    #[test]
    fn bezout_quotient_divides(coeffs in proptest::collection::vec((-9i64..=9, 1i64..=4), 1..6)) {
        let c: Vec<BigRational> = coeffs.iter().map(|&(a, b)| rat(a, b)).collect();
        let in_var = |v: TriPoly<BigRational>| {
            c.iter().enumerate().fold(TriPoly::zero(), |acc, (k, ck)| {
                acc.add(&v.pow(k as u32).mul(&TriPoly::constant(ck.clone())))
            })
        };
        let diff = in_var(TriPoly::z()).add(&in_var(TriPoly::lambda()).neg());
        let z_minus_l = TriPoly::z().add(&TriPoly::lambda().neg());
        prop_assert_eq!(z_minus_l.mul(&bezout_quotient(&c)), diff);
    }
}
