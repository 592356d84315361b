use super::{Expr, Node};

impl Expr {
    /// Exact partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff(var) + b.diff(var),
            Node::Sub(a, b) => a.diff(var) - b.diff(var),
            Node::Mul(a, b) => a.diff(var) * b + a * b.diff(var),
            Node::Div(a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                if db.is_zero() {
                    da / b
                } else {
                    (da * b - a * db) / Expr::powi(b.clone(), 2)
                }
            }
            Node::Pow(a, k) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::int(*k as i64) * Expr::powi(a.clone(), k - 1) * da
            }
            Node::Neg(a) => -a.diff(var),
            // d sqrt(u) = u' / (2 sqrt(u))
            Node::Sqrt(a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                da / (Expr::int(2) * self)
            }
            // d cbrt(u) = u' / (3 cbrt(u)^2)
            Node::Cbrt(a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                da / (Expr::int(3) * Expr::powi(self.clone(), 2))
            }
        }
    }

    pub fn gradient(&self, dim: usize) -> Vec<Expr> {
        (0..dim).map(|v| self.diff(v)).collect()
    }
}
