use rand::Rng;

use super::Expr;

/// Random polynomial of total degree at most `max_degree` in `dim`
/// variables, with coefficients in `{-3, -5/2, .., 3}`.
pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_degree: u32) -> Expr {
    let mut out = Expr::zero();
    for exps in monomials(dim, max_degree) {
        let c = rng.random_range(-6i64..=6);
        if c == 0 {
            continue;
        }
        let mut mono = Expr::ratio(c, 2);
        for (i, &k) in exps.iter().enumerate() {
            if k > 0 {
                mono = mono * Expr::powi(Expr::var(i), k as i32);
            }
        }
        out = out + mono;
    }
    out
}

fn monomials(dim: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; dim]];
    for i in 0..dim {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().sum();
            for k in 0..=(max_degree - used) {
                let mut e2 = e.clone();
                e2[i] = k;
                next.push(e2);
            }
        }
        out = next;
    }
    out
}
