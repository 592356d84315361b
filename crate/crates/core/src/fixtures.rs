//! The two commuting operator families used throughout the tests and the CLI:
//! a 5-dimensional family with a level-3 torsion tower and a 7-dimensional
//! one with a level-4 tower, together with their spectra, eigen-distributions,
//! annihilators and block-separating coordinates.

use crate::charts::{BlockPartition, DiffeoChart, OneFormExpr};
use crate::expr::{Chart, Expr, SampleDomain};
use crate::tensor::{EigenChain, OperatorField, VectorFieldExpr};

/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 20220515;
/// Minimum `|x1|` accepted by the fixture domains.
pub const X1_GUARD_EPS: f64 = 1e-3;
/// Minimum eigenvalue gap enforced by [`Fixture::spectral_domain`].
pub const GAP_GUARD_EPS: f64 = 0.05;

const CHI: &str = "cbrt(3*(y4 - y5 + y6))";

/// Operator entries as text, before parsing.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    pub rows: Vec<Vec<String>>,
}

impl OperatorSpec {
    pub fn build(&self, chart: &Chart) -> OperatorField {
        OperatorField::parse(chart, &self.rows).expect("fixture operators parse")
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub chart: Chart,
    pub specs: Vec<OperatorSpec>,
    pub operators: Vec<OperatorField>,
    /// Per operator, one eigenvalue per eigen-distribution (same order).
    pub eigenvalues: Vec<Vec<Expr>>,
    pub riesz: Vec<usize>,
    /// Generators of each eigen-distribution, shared by the family.
    pub eigenspaces: Vec<Vec<VectorFieldExpr>>,
    /// Generators of the annihilator of each characteristic distribution.
    pub annihilators: Vec<Vec<OneFormExpr>>,
    pub y_chart: Chart,
    pub forward: Vec<String>,
    pub inverse: Vec<String>,
    pub diffeo: DiffeoChart,
    /// The family written in the block-separating coordinates.
    pub printed_specs: Vec<OperatorSpec>,
    pub printed: Vec<OperatorField>,
    pub partition: BlockPartition,
    /// First level at which the torsion vanishes.
    pub vanishing_level: usize,
    pub block_tol: f64,
}

impl Fixture {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn minimal_poly_degree(&self) -> usize {
        self.riesz.iter().sum()
    }

    pub fn operator(&self, name: &str) -> Option<&OperatorField> {
        self.specs.iter().position(|s| s.name == name).map(|i| &self.operators[i])
    }

    /// `[1, 2]^n` with `|x1|` guarded.
    pub fn domain(&self, seed: u64) -> SampleDomain {
        SampleDomain::cube(self.dim(), 1.0, 2.0, seed)
            .expect("valid box")
            .with_guard(Expr::var(0))
            .with_guard_eps(X1_GUARD_EPS)
    }

    /// [`Fixture::domain`] restricted to points where all eigenvalues of
    /// operator `k` are at least [`GAP_GUARD_EPS`] apart.
    pub fn spectral_domain(&self, k: usize, seed: u64) -> SampleDomain {
        let ev = &self.eigenvalues[k];
        let mut guards = Vec::new();
        for a in 0..ev.len() {
            for b in a + 1..ev.len() {
                let d = ev[a].clone() - ev[b].clone();
                if d.as_const().is_none() {
                    guards.push(d);
                }
            }
        }
        SampleDomain::cube(self.dim(), 1.0, 2.0, seed)
            .expect("valid box")
            .with_guard(Expr::var(0))
            .with_guards(guards)
            .with_guard_eps(GAP_GUARD_EPS)
    }
}

fn forms(chart: &Chart, gens: &[&[&str]]) -> Vec<OneFormExpr> {
    gens.iter().map(|g| OneFormExpr::parse(chart, g).expect("fixture forms parse")).collect()
}

fn fields(chart: &Chart, gens: &[&[&str]]) -> Vec<VectorFieldExpr> {
    gens.iter().map(|g| VectorFieldExpr::parse(chart, g).expect("fixture fields parse")).collect()
}

/// The 5-dimensional operator with free functions `f1, f2, f3`.
pub fn lta_rows(f1: &str, f2: &str, f3: &str) -> Vec<Vec<String>> {
    let (f1, f2, f3) = (format!("({f1})"), format!("({f2})"), format!("({f3})"));
    vec![
        vec![f1.clone(), "1".into(), "0".into(), "1".into(), "0".into()],
        vec![format!("{f1} - {f2} + 1"), format!("{f1} + 1"), format!("-{f3}"), format!("{f1} - {f2} + 1"), format!("-{f3}")],
        vec!["1".into(), "0".into(), format!("{f2} + {f3}"), "1".into(), f3.clone()],
        vec![format!("{f2} - {f1}"), "-1".into(), f3.clone(), format!("{f2} - 1"), f3.clone()],
        vec!["-1".into(), "0".into(), format!("-{f3} - 1"), "-1".into(), format!("{f2} - {f3} - 1")],
    ]
}

/// `(f1, f2, f3)` for `L1, L2, L3`.
pub const LTA_PARAMETERS: [(&str, &str, &str); 3] = [("x1", "0", "x3"), ("x2", "x5", "x3"), ("0", "x4 + x3*x5", "x3")];

/// The 7-dimensional operator with free functions `g1 .. g5`.
pub fn lfa1_rows(g: [&str; 5]) -> Vec<Vec<String>> {
    let [g1, g2, g3, g4, g5] = g.map(|s| format!("({s})"));
    vec![
        vec![g1.clone(), "x1".into(), format!("x1 + {g2}"), "-x1".into(), "x1".into(), "-x1".into(), "x1".into()],
        vec![
            "1".into(),
            g5.clone(),
            format!("-{g1} + {g5} + x1"),
            format!("{g4} - {g5}"),
            "0".into(),
            format!("{g1} - {g5} - x1"),
            format!("-1 - {g4} + {g5}"),
        ],
        vec!["0".into(), "0".into(), g1.clone(), "0".into(), "0".into(), "0".into(), "0".into()],
        vec![format!("1 + {g1} - {g4}"), "x1".into(), format!("x1 + {g2}"), format!("-1 - x1 + {g4}"), "x1".into(), "-x1".into(), "x1".into()],
        vec![
            "0".into(),
            format!("{g1} - {g5}"),
            format!("{g1} + {g3} - {g5} + 1/x1"),
            format!("-{g1} + {g5}"),
            g1.clone(),
            format!("-{g1} + {g5} - 1/x1"),
            format!("{g1} - {g5}"),
        ],
        vec!["0".into(), "0".into(), "x1".into(), "0".into(), "0".into(), format!("{g1} - x1"), "0".into()],
        vec![format!("{g1} - {g4}"), "x1".into(), format!("x1 + {g2}"), "-1 - x1".into(), "x1".into(), "-x1".into(), format!("1 + x1 + {g4}")],
    ]
}

/// `(g1, .., g5)` for `K1, K2, K3`.
pub const LFA1_PARAMETERS: [[&str; 5]; 3] = [
    ["x2", "0", "-1/x1", "0", "0"],
    ["x3", "-x1 - 1/x1", "-1/x1", "x6", "x7"],
    ["x4", "-x1", "-1/x1", "x5", "1"],
];

/// [`LFA1_PARAMETERS`] with `g3` replaced by `+1/x1`.
pub fn lfa1_parameters_positive_g3() -> [[&'static str; 5]; 3] {
    LFA1_PARAMETERS.map(|mut g| {
        g[2] = "1/x1";
        g
    })
}

fn block_rows(diag: &[&str], block: &[&[&str]]) -> Vec<Vec<String>> {
    let n = diag.len() + block.len();
    let off = diag.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < off {
                        if i == j { diag[i].to_string() } else { "0".to_string() }
                    } else if j < off {
                        "0".to_string()
                    } else {
                        block[i - off][j - off].replace("chi", CHI)
                    }
                })
                .collect()
        })
        .collect()
}

fn spec(name: String, rows: Vec<Vec<String>>) -> OperatorSpec {
    OperatorSpec { name, rows }
}

/// The 5-dimensional family `L1, L2, L3`.
pub fn lta() -> Fixture {
    let chart = Chart::standard(5);
    let y_chart = Chart::with_prefix("y", 5).expect("valid chart");
    let specs: Vec<OperatorSpec> =
        LTA_PARAMETERS.iter().enumerate().map(|(i, (a, b, c))| spec(format!("L{}", i + 1), lta_rows(a, b, c))).collect();
    let operators = specs.iter().map(|s| s.build(&chart)).collect();
    let eigenvalues = LTA_PARAMETERS
        .iter()
        .map(|(f1, f2, _)| {
            [format!("{f1} + 1"), format!("{f1} - 1"), format!("{f2} - 1"), f2.to_string()]
                .iter()
                .map(|s| chart.parse(s).expect("parses"))
                .collect()
        })
        .collect();
    let eigenspaces = vec![
        fields(&chart, &[&["1", "2", "0", "-1", "0"]]),
        fields(&chart, &[&["1", "0", "0", "-1", "0"]]),
        fields(&chart, &[&["0", "x3", "0", "-x3", "1"]]),
        fields(&chart, &[&["0", "0", "1", "0", "-1"], &["0", "1", "0", "-1", "0"]]),
    ];
    let annihilators = vec![
        forms(&chart, &[&["1", "1", "0", "1", "0"]]),
        forms(&chart, &[&["1", "-1", "0", "-1", "0"]]),
        forms(&chart, &[&["0", "0", "1", "0", "1"]]),
        forms(&chart, &[&["0", "0", "1", "0", "0"], &["1", "0", "0", "1", "x3"]]),
    ];
    let forward: Vec<String> =
        ["x1 + x2 + x4", "x1 - x2 - x4", "x3 + x5", "x3", "x1 + x4 + x3*x5"].map(String::from).to_vec();
    let inverse: Vec<String> = [
        "(y1 + y2)/2",
        "y1 - y5 + y4*(y3 - y4)",
        "y4",
        "y5 - (y1 + y2)/2 - y4*(y3 - y4)",
        "y3 - y4",
    ]
    .map(String::from)
    .to_vec();
    let diffeo = diffeo(&chart, &y_chart, &forward, &inverse);
    let printed_specs = vec![
        spec(
            "L1".into(),
            block_rows(
                &["(y1 + y2)/2 + 1", "(y1 + y2)/2 - 1", "-1"],
                &[&["-y3 + 2*y4", "1"], &["-(y3 - 2*y4)^2", "y3 - 2*y4"]],
            ),
        ),
        spec(
            "L2".into(),
            block_rows(
                &["y1 + (y3 - y4)*y4 - y5 + 1", "y1 + (y3 - y4)*y4 - y5 - 1", "y3 - y4 - 1"],
                &[&["y4", "1"], &["-(y3 - 2*y4)^2", "2*y3 - 3*y4"]],
            ),
        ),
        spec(
            "L3".into(),
            block_rows(
                &["1", "-1", "-(y1 + y2)/2 + y5 - 1"],
                &[
                    &["-(y1 + y2)/2 - y3 + 2*y4 + y5", "1"],
                    &["-(y3 - 2*y4)^2", "-(y1 + y2)/2 + y3 - 2*y4 + y5"],
                ],
            ),
        ),
    ];
    let printed = printed_specs.iter().map(|s| s.build(&y_chart)).collect();
    Fixture {
        name: "lta",
        chart,
        specs,
        operators,
        eigenvalues,
        riesz: vec![1, 1, 1, 2],
        eigenspaces,
        annihilators,
        y_chart,
        forward,
        inverse,
        diffeo,
        printed_specs,
        printed,
        partition: BlockPartition::new(vec![1, 1, 1, 2]).expect("valid"),
        vanishing_level: 3,
        block_tol: 1e-8,
    }
}

/// The 7-dimensional family `K1, K2, K3`.
pub fn lfa1() -> Fixture {
    lfa1_with(LFA1_PARAMETERS)
}

/// The 7-dimensional family built from other choices of `g1 .. g5`.
/// Eigen data and charts are those of the standard family.
pub fn lfa1_with(params: [[&str; 5]; 3]) -> Fixture {
    let chart = Chart::standard(7);
    let y_chart = Chart::with_prefix("y", 7).expect("valid chart");
    let specs: Vec<OperatorSpec> =
        params.iter().enumerate().map(|(i, g)| spec(format!("K{}", i + 1), lfa1_rows(*g))).collect();
    let operators = specs.iter().map(|s| s.build(&chart)).collect();
    let eigenvalues = params
        .iter()
        .map(|[g1, _, _, g4, g5]| {
            [g5.to_string(), format!("{g4} + 1"), format!("{g4} - 1"), format!("{g1} - x1"), g1.to_string()]
                .iter()
                .map(|s| chart.parse(s).expect("parses"))
                .collect()
        })
        .collect();
    let eigenspaces = vec![
        fields(&chart, &[&["0", "1", "0", "0", "-1", "0", "0"]]),
        fields(&chart, &[&["0", "1", "0", "0", "0", "0", "-1"]]),
        fields(&chart, &[&["0", "1", "0", "2", "0", "0", "1"]]),
        fields(&chart, &[&["1", "-x1^2", "0", "1", "-1", "-x1^2", "1"]]),
        fields(
            &chart,
            &[&["1", "0", "0", "1", "0", "0", "1"], &["0", "0", "0", "0", "1", "0", "0"], &["0", "0", "1", "0", "0", "1", "0"]],
        ),
    ];
    let annihilators = vec![
        forms(&chart, &[&["0", "1", "1", "-1", "0", "-1", "1"]]),
        forms(&chart, &[&["1", "0", "0", "1", "0", "0", "-2"]]),
        forms(&chart, &[&["1", "0", "0", "-1", "0", "0", "0"]]),
        forms(&chart, &[&["0", "0", "1", "0", "0", "-1", "0"]]),
        forms(
            &chart,
            &[
                &["0", "0", "1", "0", "0", "0", "0"],
                &["x1^2", "0", "0", "0", "0", "1", "0"],
                &["1", "1", "0", "-1", "1", "-1", "1"],
            ],
        ),
    ];
    let forward: Vec<String> = [
        "x2 + x3 - x4 - x6 + x7",
        "x1 + x4 - 2*x7",
        "x1 - x4",
        "x3 - x6",
        "x3",
        "x1^3/3 + x6",
        "x1 + x2 - x4 + x5 - x6 + x7",
    ]
    .map(String::from)
    .to_vec();
    // x1 = chi, x3 = y5, x4 = chi - y3, x6 = y5 - y4, x7 = (2 chi - y2 - y3)/2
    let x2 = "y1 - y5 + (chi - y3) + (y5 - y4) - (2*chi - y2 - y3)/2";
    let inverse: Vec<String> = [
        "chi".to_string(),
        x2.to_string(),
        "y5".to_string(),
        "chi - y3".to_string(),
        format!("y7 - chi - ({x2}) + (chi - y3) + (y5 - y4) - (2*chi - y2 - y3)/2"),
        "y5 - y4".to_string(),
        "(2*chi - y2 - y3)/2".to_string(),
    ]
    .map(|s| s.replace("chi", CHI))
    .to_vec();
    let diffeo = diffeo(&chart, &y_chart, &forward, &inverse);
    let s = "(y1 + (y2 - y3)/2 - y4)";
    let printed_specs = vec![
        spec(
            "K1".into(),
            block_rows(
                &["0", "1", "-1", &format!("{s} - chi").replace("chi", CHI)],
                &[
                    &[s, "0", "0"],
                    &["chi + chi^3", &format!("{s} - chi"), "chi^3"],
                    &["chi", "-chi^(-1)", &format!("{s} + chi")],
                ],
            ),
        ),
        spec(
            "K2".into(),
            block_rows(
                &[
                    &"-(y2 + y3)/2 + chi".replace("chi", CHI),
                    "1 - y4 + y5",
                    "-1 - y4 + y5",
                    &"y5 - chi".replace("chi", CHI),
                ],
                &[&["y5", "0", "0"], &["0", "y5 - chi", "chi^3"], &["-chi^(-1)", "-chi^(-1)", "y5 + chi"]],
            ),
        ),
        spec(
            "K3".into(),
            block_rows(
                &[
                    "1",
                    &"1 - y1 + y5 - chi + y7".replace("chi", CHI),
                    &"-1 - y1 + y5 - chi + y7".replace("chi", CHI),
                    "-y3",
                ],
                &[&["-y3 + chi", "0", "0"], &["chi", "-y3", "chi^3"], &["0", "-chi^(-1)", "-y3 + 2*chi"]],
            ),
        ),
    ];
    let printed = printed_specs.iter().map(|s| s.build(&y_chart)).collect();
    Fixture {
        name: "lfa1",
        chart,
        specs,
        operators,
        eigenvalues,
        riesz: vec![1, 1, 1, 1, 3],
        eigenspaces,
        annihilators,
        y_chart,
        forward,
        inverse,
        diffeo,
        printed_specs,
        printed,
        partition: BlockPartition::new(vec![1, 1, 1, 1, 3]).expect("valid"),
        vanishing_level: 4,
        block_tol: 1e-6,
    }
}

fn diffeo(x: &Chart, y: &Chart, forward: &[String], inverse: &[String]) -> DiffeoChart {
    let f: Vec<&str> = forward.iter().map(String::as_str).collect();
    let i: Vec<&str> = inverse.iter().map(String::as_str).collect();
    DiffeoChart::parse(x, y, &f).and_then(|c| c.parse_inverse(&i)).expect("fixture chart parses")
}

/// Jordan chain of length 2 in the last eigen-distribution of the
/// 5-dimensional family, eigenvalue `f2`.
pub fn lta_chain(k: usize) -> EigenChain {
    let f = lta();
    let chart = &f.chart;
    EigenChain::new(
        f.eigenvalues[k][3].clone(),
        fields(chart, &[&["0", "0", "-1", "0", "1"], &["0", "1", "0", "-1", "0"]]),
    )
}

/// Eigenvector chain of length 1 for eigenvalue `f2 - 1`.
pub fn lta_simple_chain(k: usize) -> EigenChain {
    let f = lta();
    EigenChain::new(f.eigenvalues[k][2].clone(), f.eigenspaces[2].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::OperatorSource;

    #[test]
    fn fixtures_build() {
        for f in [lta(), lfa1()] {
            assert_eq!(f.operators.len(), 3);
            assert_eq!(f.printed.len(), 3);
            assert_eq!(f.partition.dim(), f.dim());
            assert_eq!(f.eigenvalues[0].len(), f.riesz.len());
            let p = f.domain(1).sample_points(3).unwrap();
            let pts: Vec<Vec<f64>> = p.iter().map(|q| q.to_vec()).collect();
            assert!(f.diffeo.inverse_defect(&pts).unwrap() < 1e-12, "{}", f.name);
            for op in &f.operators {
                assert!(op.value_at(&pts[0]).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn eigenvectors_are_eigenvectors() {
        let f = lta();
        let p = [1.2, 1.7, 1.4, 1.9, 1.1];
        for (k, op) in f.operators.iter().enumerate() {
            let a = op.value_at(&p).unwrap();
            for (d, gens) in f.eigenspaces.iter().enumerate().take(3) {
                let v = gens[0].eval_at(&p).unwrap();
                let lam: f64 = f.eigenvalues[k][d].eval(&p).unwrap();
                let av = a.mul_vec(&v);
                for i in 0..5 {
                    assert!((av[i] - lam * v[i]).abs() < 1e-12, "op {k} space {d}");
                }
            }
        }
    }
}
