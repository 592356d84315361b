//! Manifest files: a chart, named operators, a sampling domain and optional
//! target charts, all as JSON with expression strings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use serde_json::Map;
use torsionlab::charts::{BlockPartition, DiffeoChart, OneFormExpr};
use torsionlab::fixtures::DEFAULT_SEED;
use torsionlab::{Chart, Expr, OperatorField, SampleDomain, VectorFieldExpr};

/// Manifest problem with a 1-based source line when one is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestError {
    pub file: String,
    pub line: Option<usize>,
    pub msg: String,
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.file, l, self.msg),
            None => write!(f, "{}: {}", self.file, self.msg),
        }
    }
}

impl std::error::Error for ManifestError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    name: String,
    chart: Vec<String>,
    #[serde(default)]
    level: Option<usize>,
    domain: RawDomain,
    #[serde(default)]
    tolerances: RawTolerances,
    operators: Map<String, serde_json::Value>,
    #[serde(default)]
    charts: Map<String, serde_json::Value>,
    #[serde(default)]
    fields: Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    #[serde(rename = "box")]
    bounds: Vec<(f64, f64)>,
    #[serde(default)]
    guards: Vec<String>,
    #[serde(default)]
    guard_eps: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    vanish_rel: Option<f64>,
    rank: Option<f64>,
    cluster: Option<f64>,
    block: Option<f64>,
    gap: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawOperator {
    Rows(Vec<Vec<String>>),
    Full {
        rows: Vec<Vec<String>>,
        #[serde(default)]
        spectral_guards: Vec<String>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    names: Vec<String>,
    forward: Vec<String>,
    #[serde(default)]
    inverse: Option<Vec<String>>,
    #[serde(default)]
    partition: Option<String>,
    #[serde(default)]
    potentials: Vec<RawPotential>,
    #[serde(default)]
    expected: Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    coordinate: String,
    form: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub vanish_rel: f64,
    pub rank: f64,
    pub cluster: f64,
    pub block: f64,
    /// Minimum eigenvalue gap enforced by spectral guards.
    pub gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { vanish_rel: 1e-8, rank: 1e-8, cluster: 1e-5, block: 1e-8, gap: 0.05 }
    }
}

#[derive(Clone, Debug)]
pub struct NamedOperator {
    pub name: String,
    pub field: OperatorField,
    /// Extra guards for spectral sampling, typically eigenvalue differences.
    pub spectral_guards: Vec<Expr>,
}

/// A one-form whose potential should reproduce a target coordinate.
#[derive(Clone, Debug)]
pub struct Potential {
    pub coordinate: usize,
    pub form: OneFormExpr,
}

#[derive(Clone, Debug)]
pub struct TargetChart {
    pub name: String,
    pub diffeo: DiffeoChart,
    pub partition: Option<BlockPartition>,
    pub potentials: Vec<Potential>,
    /// Operators as they should read in the target coordinates.
    pub expected: Vec<(String, OperatorField)>,
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub name: String,
    pub chart: Chart,
    pub level: Option<usize>,
    pub bounds: Vec<(f64, f64)>,
    pub guards: Vec<Expr>,
    pub guard_eps: Option<f64>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub operators: Vec<NamedOperator>,
    pub charts: Vec<TargetChart>,
    pub fields: BTreeMap<String, Vec<VectorFieldExpr>>,
}

struct Ctx<'a> {
    file: &'a str,
    src: &'a str,
}

impl Ctx<'_> {
    fn err(&self, needle: Option<&str>, msg: impl Into<String>) -> ManifestError {
        ManifestError { file: self.file.to_string(), line: needle.and_then(|n| self.line_of(n)), msg: msg.into() }
    }

    /// Line of the first occurrence of `text` as a JSON string.
    fn line_of(&self, text: &str) -> Option<usize> {
        let quoted = serde_json::to_string(text).ok()?;
        let at = self.src.find(&quoted)?;
        Some(self.src[..at].matches('\n').count() + 1)
    }

    /// Line of the key `"name":`.
    fn key_line(&self, name: &str) -> Option<usize> {
        let quoted = serde_json::to_string(name).ok()?;
        let mut from = 0;
        while let Some(off) = self.src[from..].find(&quoted) {
            let at = from + off;
            if self.src[at + quoted.len()..].trim_start().starts_with(':') {
                return Some(self.src[..at].matches('\n').count() + 1);
            }
            from = at + quoted.len();
        }
        None
    }

    fn parse(&self, chart: &Chart, text: &str, what: &str) -> Result<Expr, ManifestError> {
        chart.parse(text).map_err(|e| self.err(Some(text), format!("{what}: `{text}`: {e}")))
    }

    fn parse_all(&self, chart: &Chart, texts: &[String], what: &str) -> Result<Vec<Expr>, ManifestError> {
        texts.iter().enumerate().map(|(i, t)| self.parse(chart, t, &format!("{what} [{i}]"))).collect()
    }

    fn value<T: for<'de> Deserialize<'de>>(&self, key: &str, v: &serde_json::Value, what: &str) -> Result<T, ManifestError> {
        T::deserialize(v).map_err(|e| ManifestError {
            file: self.file.to_string(),
            line: self.key_line(key),
            msg: format!("{what} `{key}`: {e}"),
        })
    }

    fn rows(&self, chart: &Chart, rows: &[Vec<String>], what: &str) -> Result<OperatorField, ManifestError> {
        let n = chart.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(ManifestError {
                file: self.file.to_string(),
                line: self.key_line(what.rsplit(' ').next().unwrap_or(what)),
                msg: format!("{what}: expected a {n}x{n} matrix"),
            });
        }
        let mut parsed = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            let mut out = Vec::with_capacity(n);
            for (j, t) in row.iter().enumerate() {
                out.push(self.parse(chart, t, &format!("{what} entry ({}, {})", i + 1, j + 1))?);
            }
            parsed.push(out);
        }
        OperatorField::new(chart.clone(), parsed).map_err(|e| self.err(None, format!("{what}: {e}")))
    }
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let file = path.display().to_string();
        let src = std::fs::read_to_string(path)
            .map_err(|e| ManifestError { file: file.clone(), line: None, msg: format!("cannot read: {e}") })?;
        Self::from_str(&src, &file)
    }

    /// Parses manifest text; `file` only labels error messages.
    pub fn from_str(src: &str, file: &str) -> Result<Self, ManifestError> {
        let ctx = Ctx { file, src };
        let raw: RawManifest = serde_json::from_str(src)
            .map_err(|e| ManifestError { file: file.to_string(), line: Some(e.line()), msg: e.to_string() })?;
        let chart = Chart::new(raw.chart.clone()).map_err(|e| ctx.err(None, format!("chart: {e}")))?;
        let n = chart.dim();

        if raw.domain.bounds.len() != n {
            return Err(ManifestError {
                file: file.into(),
                line: ctx.key_line("box"),
                msg: format!("domain box has {} intervals, chart has {n} coordinates", raw.domain.bounds.len()),
            });
        }
        let guards = ctx.parse_all(&chart, &raw.domain.guards, "domain guard")?;
        if let Some(eps) = raw.domain.guard_eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(ManifestError { file: file.into(), line: ctx.key_line("guard_eps"), msg: "guard_eps must be positive".into() });
            }
        }
        let d = Tolerances::default();
        let t = raw.tolerances;
        let tolerances = Tolerances {
            vanish_rel: t.vanish_rel.unwrap_or(d.vanish_rel),
            rank: t.rank.unwrap_or(d.rank),
            cluster: t.cluster.unwrap_or(d.cluster),
            block: t.block.unwrap_or(d.block),
            gap: t.gap.unwrap_or(d.gap),
        };

        let mut operators = Vec::new();
        for (name, v) in &raw.operators {
            let (rows, sg) = match ctx.value::<RawOperator>(name, v, "operator")? {
                RawOperator::Rows(r) => (r, Vec::new()),
                RawOperator::Full { rows, spectral_guards } => (rows, spectral_guards),
            };
            let field = ctx.rows(&chart, &rows, &format!("operator {name}"))?;
            let spectral_guards = ctx.parse_all(&chart, &sg, &format!("operator {name} spectral guard"))?;
            operators.push(NamedOperator { name: name.clone(), field, spectral_guards });
        }
        if operators.is_empty() {
            return Err(ManifestError { file: file.into(), line: ctx.key_line("operators"), msg: "no operators".into() });
        }

        let mut charts = Vec::new();
        for (name, v) in &raw.charts {
            let rc: RawChart = ctx.value(name, v, "chart")?;
            charts.push(build_chart(&ctx, &chart, name, rc)?);
        }

        let mut fields = BTreeMap::new();
        for (name, v) in &raw.fields {
            let gens: Vec<Vec<String>> = ctx.value(name, v, "field list")?;
            let mut out = Vec::new();
            for (k, g) in gens.iter().enumerate() {
                if g.len() != n {
                    return Err(ManifestError {
                        file: file.into(),
                        line: ctx.key_line(name),
                        msg: format!("field {name} [{k}]: expected {n} components"),
                    });
                }
                let comps = ctx.parse_all(&chart, g, &format!("field {name} [{k}]"))?;
                out.push(VectorFieldExpr::new(chart.clone(), comps).map_err(|e| ctx.err(None, e.to_string()))?);
            }
            fields.insert(name.clone(), out);
        }

        Ok(Manifest {
            name: raw.name,
            chart,
            level: raw.level,
            bounds: raw.domain.bounds,
            guards,
            guard_eps: raw.domain.guard_eps,
            seed: raw.domain.seed.unwrap_or(DEFAULT_SEED),
            tolerances,
            operators,
            charts,
            fields,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn operator(&self, name: &str) -> Option<&NamedOperator> {
        self.operators.iter().find(|o| o.name == name)
    }

    pub fn target_chart(&self, name: &str) -> Option<&TargetChart> {
        self.charts.iter().find(|c| c.name == name)
    }

    /// The sampling box with the manifest guards.
    pub fn domain(&self, seed: u64) -> Result<SampleDomain, String> {
        let d = SampleDomain::new(self.bounds.clone(), seed).map_err(|e| e.to_string())?.with_guards(self.guards.clone());
        Ok(match self.guard_eps {
            Some(eps) => d.with_guard_eps(eps),
            None => d,
        })
    }

    /// [`Manifest::domain`] plus the operator's spectral guards, which are
    /// held at least `gap` away from zero.
    pub fn spectral_domain(&self, op: &NamedOperator, seed: u64) -> Result<SampleDomain, String> {
        let d = self.domain(seed)?;
        if op.spectral_guards.is_empty() {
            return Ok(d);
        }
        let eps = d.guard_eps().max(self.tolerances.gap);
        Ok(d.with_guards(op.spectral_guards.clone()).with_guard_eps(eps))
    }
}

fn build_chart(ctx: &Ctx, src: &Chart, name: &str, rc: RawChart) -> Result<TargetChart, ManifestError> {
    let n = src.dim();
    let at = |msg: String| ManifestError { file: ctx.file.into(), line: ctx.key_line(name), msg: format!("chart {name}: {msg}") };
    let dst = Chart::new(rc.names.clone()).map_err(|e| at(e.to_string()))?;
    if dst.dim() != n || rc.forward.len() != n {
        return Err(at(format!("expected {n} target names and {n} forward components")));
    }
    let forward = ctx.parse_all(src, &rc.forward, &format!("chart {name} forward"))?;
    let mut diffeo = DiffeoChart::new(src.clone(), dst.clone(), forward).map_err(|e| at(e.to_string()))?;
    if let Some(inv) = &rc.inverse {
        if inv.len() != n {
            return Err(at(format!("expected {n} inverse components")));
        }
        let inverse = ctx.parse_all(&dst, inv, &format!("chart {name} inverse"))?;
        diffeo = diffeo.with_inverse(inverse).map_err(|e| at(e.to_string()))?;
    }
    let partition = match &rc.partition {
        Some(p) => Some(p.parse::<BlockPartition>().map_err(|e| ctx.err(Some(p), format!("chart {name} partition: {e}")))?),
        None => None,
    };
    let mut potentials = Vec::new();
    for p in &rc.potentials {
        let coordinate = dst
            .index_of(&p.coordinate)
            .ok_or_else(|| ctx.err(Some(&p.coordinate), format!("chart {name}: unknown coordinate `{}`", p.coordinate)))?;
        if p.form.len() != n {
            return Err(at(format!("potential for {} needs {n} form components", p.coordinate)));
        }
        let comps = ctx.parse_all(src, &p.form, &format!("chart {name} form for {}", p.coordinate))?;
        let form = OneFormExpr::new(src.clone(), comps).map_err(|e| at(e.to_string()))?;
        potentials.push(Potential { coordinate, form });
    }
    let mut expected = Vec::new();
    for (op, v) in &rc.expected {
        let rows: Vec<Vec<String>> = ctx.value(op, v, "expected matrix")?;
        expected.push((op.clone(), ctx.rows(&dst, &rows, &format!("chart {name} expected {op}"))?));
    }
    Ok(TargetChart { name: name.to_string(), diffeo, partition, potentials, expected })
}
