//! Pretty-printer whose output re-parses to the same AST.

use std::fmt;

use super::{Chart, Expr, Node};

/// An expression paired with the names it should print with.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    chart: Option<&'a Chart>,
}

impl Expr {
    pub fn display<'a>(&'a self, chart: &'a Chart) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, chart: Some(chart) }
    }

    /// Text in the parser's grammar for `chart`.
    pub fn to_text(&self, chart: &Chart) -> String {
        self.display(chart).to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ExprDisplay { expr: self, chart: None }.fmt(f)
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.chart, f)
    }
}

fn is_sum(e: &Expr) -> bool {
    matches!(e.node(), Node::Add(..) | Node::Sub(..))
}

fn is_term(e: &Expr) -> bool {
    matches!(e.node(), Node::Add(..) | Node::Sub(..) | Node::Mul(..) | Node::Div(..))
}

/// Atoms print without parentheses in base position.
fn is_atom(e: &Expr) -> bool {
    match e.node() {
        Node::Var(_) | Node::Sqrt(_) | Node::Cbrt(_) => true,
        Node::Const(c) => Expr::const_is_nonneg_integer(c),
        _ => false,
    }
}

fn wrapped(e: &Expr, chart: Option<&Chart>, paren: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if paren {
        f.write_str("(")?;
        write_expr(e, chart, f)?;
        f.write_str(")")
    } else {
        write_expr(e, chart, f)
    }
}

fn write_expr(e: &Expr, chart: Option<&Chart>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Const(c) => {
            if Expr::const_is_nonneg_integer(c) {
                write!(f, "{c}")
            } else {
                write!(f, "({c})")
            }
        }
        Node::Var(i) => match chart.and_then(|c| c.names().get(*i)) {
            Some(name) => f.write_str(name),
            None => write!(f, "x{}", i + 1),
        },
        Node::Add(a, b) => {
            write_expr(a, chart, f)?;
            f.write_str(" + ")?;
            wrapped(b, chart, is_sum(b), f)
        }
        Node::Sub(a, b) => {
            write_expr(a, chart, f)?;
            f.write_str(" - ")?;
            wrapped(b, chart, is_sum(b), f)
        }
        Node::Mul(a, b) => {
            wrapped(a, chart, is_sum(a), f)?;
            f.write_str("*")?;
            wrapped(b, chart, is_term(b), f)
        }
        Node::Div(a, b) => {
            wrapped(a, chart, is_sum(a), f)?;
            f.write_str("/")?;
            wrapped(b, chart, is_term(b), f)
        }
        Node::Pow(a, k) => {
            wrapped(a, chart, !is_atom(a), f)?;
            write!(f, "^{k}")
        }
        Node::Neg(a) => {
            f.write_str("-")?;
            wrapped(a, chart, is_term(a), f)
        }
        Node::Sqrt(a) => {
            f.write_str("sqrt(")?;
            write_expr(a, chart, f)?;
            f.write_str(")")
        }
        Node::Cbrt(a) => {
            f.write_str("cbrt(")?;
            write_expr(a, chart, f)?;
            f.write_str(")")
        }
    }
}
