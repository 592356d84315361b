//! The four subcommands. Each returns a [`Report`]; sampling problems and
//! malformed requests are errors, failed verdicts are not.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;
use torsionlab::algebra::{check_algebra, cyclic_basis, AlgebraTolerances};
use torsionlab::charts::{
    detect_blocks, integrate_exact_one_form, pushforward_at, pushforward_mismatch, BlockPartition, DiffeoChart, OneFormExpr,
    INVERSE_TOL,
};
use torsionlab::spectral::{involutivity_check, regularity_check, spectrum_at, SpectralTolerances};
use torsionlab::tensor::vanishing_profile;
use torsionlab::{OperatorExpr, SampleDomain};

use crate::manifest::{Manifest, NamedOperator, TargetChart};
use crate::report::{sci, Check, Invocation, Report};

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_COMBOS: usize = 50;
/// Largest bracket residual accepted by the involutivity check.
pub const INVOLUTIVITY_TOL: f64 = 1e-8;
/// `|dF - w|` accepted for integrated potentials.
pub const POTENTIAL_TOL: f64 = 1e-10;

/// Options shared by all commands.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Options {
    pub operators: Vec<String>,
    pub level: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub chart: Option<String>,
    pub hint: Option<String>,
    pub combos: Option<usize>,
}

impl Options {
    fn invocation(&self, m: &Manifest, ops: &[&NamedOperator]) -> Invocation {
        Invocation {
            operators: ops.iter().map(|o| o.name.clone()).collect(),
            level: None,
            samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: self.seed.unwrap_or(m.seed),
            tol: self.tol,
            chart: None,
            hint: None,
            combos: None,
        }
    }
}

fn select<'a>(m: &'a Manifest, names: &[String]) -> Result<Vec<&'a NamedOperator>> {
    if names.is_empty() {
        return Ok(m.operators.iter().collect());
    }
    names
        .iter()
        .map(|n| {
            m.operator(n).ok_or_else(|| {
                let known: Vec<&str> = m.operators.iter().map(|o| o.name.as_str()).collect();
                anyhow!("operator `{n}` is not in the manifest (known: {})", known.join(", "))
            })
        })
        .collect()
}

fn level(m: &Manifest, opts: &Options) -> Result<usize> {
    let l = opts.level.or(m.level).unwrap_or(1);
    if l == 0 {
        bail!("level must be at least 1");
    }
    Ok(l)
}

fn domain(m: &Manifest, seed: u64) -> Result<SampleDomain> {
    m.domain(seed).map_err(|e| anyhow!("domain: {e}"))
}

/// Vanishing profile of `tau^(1..=m)` for each operator.
pub fn cmd_torsion(m: &Manifest, opts: &Options) -> Result<Report> {
    let ops = select(m, &opts.operators)?;
    let mut inv = opts.invocation(m, &ops);
    let lvl = level(m, opts)?;
    inv.level = Some(lvl);
    let tol = opts.tol.unwrap_or(m.tolerances.vanish_rel);
    let dom = domain(m, inv.seed)?;
    let mut checks = Vec::new();
    let mut results = Vec::new();
    let mut body = String::new();
    for op in &ops {
        let profile = vanishing_profile(&op.field, lvl, &dom, inv.samples, tol).with_context(|| format!("operator {}", op.name))?;
        let first = profile.iter().find(|r| r.vanishing).map(|r| r.level);
        let top = &profile[lvl - 1];
        checks.push(Check::within(format!("{}: tau^({lvl}) vanishes", op.name), top.max_residual, tol));
        let _ = writeln!(body, "## {}\n\n| level | max residual | min residual | vanishing |\n|---|---|---|---|", op.name);
        for r in &profile {
            let _ = writeln!(body, "| {} | {} | {} | {} |", r.level, sci(r.max_residual), sci(r.min_residual), r.vanishing);
        }
        let _ = writeln!(
            body,
            "\ngeneralized Nijenhuis level: {}\n",
            first.map_or_else(|| format!("above {lvl}"), |l| l.to_string())
        );
        results.push(json!({
            "operator": op.name,
            "first_vanishing_level": first,
            "levels": profile.iter().map(|r| json!({
                "level": r.level,
                "max_residual": r.max_residual,
                "min_residual": r.min_residual,
                "vanishing": r.vanishing,
                "worst_point": r.worst_point,
            })).collect::<Vec<_>>(),
        }));
    }
    Ok(Report::new("torsion", &m.name, inv, checks, json!({ "tolerance": tol, "operators": results }), body))
}

/// Spectral shape over the sample, the eigen-data at the first point, and
/// involutivity of the manifest's vector-field lists.
pub fn cmd_spectrum(m: &Manifest, opts: &Options) -> Result<Report> {
    let ops = select(m, &opts.operators)?;
    let inv = opts.invocation(m, &ops);
    let tol = SpectralTolerances { cluster: m.tolerances.cluster, rank: opts.tol.unwrap_or(m.tolerances.rank), ..Default::default() };
    let mut checks = Vec::new();
    let mut results = Vec::new();
    let mut body = String::new();
    for op in &ops {
        let dom = m.spectral_domain(op, inv.seed).map_err(|e| anyhow!("domain: {e}"))?;
        let name = format!("{}: spectrum regular", op.name);
        let report = match regularity_check(&op.field, &dom, inv.samples.max(2), &tol) {
            Ok(r) => r,
            Err(e) => {
                checks.push(Check::failed(name, &e));
                results.push(json!({ "operator": op.name, "error": e.to_string() }));
                continue;
            }
        };
        let mut check = Check::new(name, report.constant);
        if let Some((i, p)) = &report.first_discrepancy {
            check = check.with_detail(format!("sample {i} at {p:?}: {:?}", report.digests[*i]));
        }
        checks.push(check);
        let p0 = dom.sample_points(1)?.remove(0);
        let s = spectrum_at(&op.field, &p0, &tol)?;
        let digest = &report.digests[0];
        let _ = writeln!(
            body,
            "## {}\n\n{} distinct eigenvalues, Riesz indices {:?}, ranks {:?}\n\nat {:?}:\n\n| eigenvalue | Riesz index | rank | annihilator rows |\n|---|---|---|---|",
            op.name, digest.distinct, digest.riesz, digest.ranks, p0.coords()
        );
        let mut blocks = Vec::new();
        for b in &s.blocks {
            let rows: Vec<Vec<f64>> = b.annihilator.row_iter().map(|r| r.iter().copied().collect()).collect();
            let text: Vec<String> =
                rows.iter().map(|r| format!("[{}]", r.iter().map(|v| format!("{:.4}", if v.abs() < 5e-5 { 0.0 } else { *v })).collect::<Vec<_>>().join(", "))).collect();
            let _ = writeln!(body, "| {:.6} | {} | {} | {} |", b.eigenvalue, b.riesz, b.rank, text.join(" "));
            blocks.push(json!({ "eigenvalue": b.eigenvalue, "riesz": b.riesz, "rank": b.rank, "annihilator": rows }));
        }
        let _ = writeln!(body);
        results.push(json!({
            "operator": op.name,
            "digest": { "distinct": digest.distinct, "riesz": digest.riesz, "ranks": digest.ranks },
            "regular": report.constant,
            "point": p0.coords(),
            "blocks": blocks,
        }));
    }
    let mut involutivity = Vec::new();
    if !m.fields.is_empty() {
        let dom = domain(m, inv.seed)?;
        let _ = writeln!(body, "## Distributions\n\n| fields | worst bracket residual | involutive |\n|---|---|---|");
        for (name, gens) in &m.fields {
            let check = format!("{name}: involutive");
            match involutivity_check(gens, &dom, inv.samples, INVOLUTIVITY_TOL) {
                Ok(r) => {
                    let _ = writeln!(body, "| {name} | {} | {} |", sci(r.worst_residual), r.involutive);
                    checks.push(Check::within(check, r.worst_residual, INVOLUTIVITY_TOL));
                    involutivity.push(json!({ "fields": name, "worst_residual": r.worst_residual, "involutive": r.involutive }));
                }
                Err(e) => {
                    checks.push(Check::failed(check, &e));
                    involutivity.push(json!({ "fields": name, "error": e.to_string() }));
                }
            }
        }
    }
    let results = json!({
        "tolerances": { "cluster": tol.cluster, "imag": tol.imag, "rank": tol.rank, "band": tol.band },
        "operators": results,
        "involutivity": involutivity,
    });
    Ok(Report::new("spectrum", &m.name, inv, checks, results, body))
}

/// Commutativity and module/ring closure of the selected operators.
pub fn cmd_algebra(m: &Manifest, opts: &Options) -> Result<Report> {
    let ops = select(m, &opts.operators)?;
    let mut inv = opts.invocation(m, &ops);
    let lvl = level(m, opts)?;
    let combos = opts.combos.unwrap_or(DEFAULT_COMBOS);
    inv.level = Some(lvl);
    inv.combos = Some(combos);
    let tol = AlgebraTolerances { vanish_rel: opts.tol.unwrap_or(m.tolerances.vanish_rel), ..Default::default() };
    let dom = domain(m, inv.seed)?;
    let exprs: Vec<OperatorExpr> = ops.iter().map(|o| o.field.clone().into()).collect();
    let names: Vec<&str> = ops.iter().map(|o| o.name.as_str()).collect();
    let mut body = String::new();
    let (checks, report) = match check_algebra(&exprs, lvl, &dom, inv.samples, combos, &tol) {
        Ok(r) => {
            let commute = Check::within("operators commute", r.commute_residual, tol.commute).with_detail(non_commuting(&r.commute, &names));
            let checks = vec![
                commute,
                Check::within(format!("generators: tau^({lvl}) vanishes"), r.generators_residual, tol.vanish_rel),
                Check::within("module closure", r.module_residual, tol.vanish_rel),
                Check::within("ring closure", r.ring_residual, tol.vanish_rel),
            ];
            let report = json!({
                "commute": r.commute,
                "commute_residual": r.commute_residual,
                "generators_residual": r.generators_residual,
                "module_residual": r.module_residual,
                "ring_residual": r.ring_residual,
            });
            (checks, report)
        }
        Err(e) => (vec![Check::failed("algebra check", &e)], json!({ "error": e.to_string() })),
    };
    let p0 = dom.sample_points(1)?.remove(0);
    let spectral = SpectralTolerances { cluster: m.tolerances.cluster, rank: m.tolerances.rank, ..Default::default() };
    let _ = writeln!(body, "## Cyclic bases at {:?}\n\n| operator | independent powers |\n|---|---|", p0.coords());
    let mut cyclic = Vec::new();
    for op in &ops {
        match cyclic_basis(&op.field, &p0, &spectral) {
            Ok(powers) => {
                let _ = writeln!(body, "| {} | {:?} |", op.name, powers);
                cyclic.push(json!({ "operator": op.name, "powers": powers }));
            }
            Err(e) => {
                let _ = writeln!(body, "| {} | {e} |", op.name);
                cyclic.push(json!({ "operator": op.name, "error": e.to_string() }));
            }
        }
    }
    let results = json!({
        "tolerances": { "vanish_rel": tol.vanish_rel, "commute": tol.commute },
        "closure": report,
        "cyclic": { "point": p0.coords(), "operators": cyclic },
    });
    Ok(Report::new("algebra", &m.name, inv, checks, results, body))
}

fn non_commuting(table: &[Vec<bool>], names: &[&str]) -> String {
    let mut pairs = Vec::new();
    for (i, row) in table.iter().enumerate() {
        for (j, &ok) in row.iter().enumerate().skip(i + 1) {
            if !ok {
                pairs.push(format!("[{}, {}]", names[i], names[j]));
            }
        }
    }
    if pairs.is_empty() { String::new() } else { format!("non-commuting: {}", pairs.join(" ")) }
}

/// Pushes the operators forward to a target chart and looks for a common
/// block structure; also integrates the chart's potentials.
pub fn cmd_blockdiag(m: &Manifest, opts: &Options) -> Result<Report> {
    let ops = select(m, &opts.operators)?;
    let mut inv = opts.invocation(m, &ops);
    let identity;
    let target: &TargetChart = match &opts.chart {
        Some(name) => m.target_chart(name).ok_or_else(|| anyhow!("chart `{name}` is not in the manifest"))?,
        None => match m.charts.as_slice() {
            [only] => only,
            [] => {
                identity = TargetChart {
                    name: "identity".into(),
                    diffeo: DiffeoChart::identity(&m.chart),
                    partition: None,
                    potentials: Vec::new(),
                    expected: Vec::new(),
                };
                &identity
            }
            _ => bail!("the manifest has several charts; pick one with --chart"),
        },
    };
    let hint = match &opts.hint {
        Some(h) => Some(h.parse::<BlockPartition>().map_err(|e| anyhow!("--hint: {e}"))?),
        None => None,
    };
    if let Some(h) = &hint {
        if h.dim() != m.dim() {
            bail!("--hint {h} covers {} coordinates, the chart has {}", h.dim(), m.dim());
        }
    }
    inv.chart = Some(target.name.clone());
    inv.hint = hint.as_ref().map(|h| h.to_string());
    let tol = opts.tol.unwrap_or(m.tolerances.block);
    let dom = domain(m, inv.seed)?;
    let points: Vec<Vec<f64>> = dom.sample_points(inv.samples)?.into_iter().map(Vec::from).collect();
    let c = &target.diffeo;
    let mut checks = Vec::new();
    let mut body = String::new();

    let inverse = match c.inverse() {
        Some(_) => {
            let d = c.inverse_defect(&points)?;
            checks.push(Check::within("inverse chart", d, INVERSE_TOL));
            Some(d)
        }
        None => None,
    };

    let mut potentials = Vec::new();
    if !target.potentials.is_empty() {
        let _ = writeln!(body, "## Potentials\n\n| coordinate | potential | drift | dF - w |\n|---|---|---|---|");
    }
    for pot in &target.potentials {
        let y = c.dst().names()[pot.coordinate].clone();
        let name = format!("potential of {y}");
        match potential_defects(c, pot.coordinate, &pot.form, &points) {
            Ok((f, drift, exactness)) => {
                let text = f.to_text(&m.chart);
                let _ = writeln!(body, "| {y} | {text} | {} | {} |", sci(drift), sci(exactness));
                checks.push(Check::within(format!("{name}: dF = w"), exactness, POTENTIAL_TOL));
                checks.push(Check::within(format!("{name}: matches up to a constant"), drift, tol));
                potentials.push(json!({ "coordinate": y, "potential": text, "drift": drift, "exactness": exactness }));
            }
            Err(e) => {
                checks.push(Check::failed(name, &e));
                potentials.push(json!({ "coordinate": y, "error": e }));
            }
        }
    }

    let mut all = Vec::new();
    let mut per_op = Vec::new();
    let _ = writeln!(body, "\n## Pushforwards\n\n| operator | partition | off-block residual |\n|---|---|---|");
    for op in &ops {
        let mats = points
            .par_iter()
            .map(|p| pushforward_at(&op.field, c, p))
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("pushforward of {}", op.name))?;
        let d = detect_blocks(&mats, hint.as_ref(), tol);
        let _ = writeln!(body, "| {} | {} | {} |", op.name, d.partition, sci(d.residual));
        let mut entry = json!({ "operator": op.name, "partition": d.partition.to_string(), "residual": d.residual });
        if let Some((_, expected)) = target.expected.iter().find(|(n, _)| n == &op.name) {
            let mismatch = points
                .par_iter()
                .map(|p| pushforward_mismatch(&op.field, expected, c, p))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(Check::within(format!("{}: matches the expected matrix", op.name), mismatch, tol));
            entry["expected_mismatch"] = json!(mismatch);
        }
        per_op.push(entry);
        all.extend(mats);
    }
    let joint = detect_blocks(&all, hint.as_ref(), tol);
    let mut check = Check::within("joint block structure", joint.residual, tol).with_detail(joint.partition.to_string());
    if let (None, Some(want)) = (&hint, &target.partition) {
        if &joint.partition != want {
            check.passed = false;
            check.detail = Some(format!("found {}, expected {want}", joint.partition));
        }
    }
    checks.push(check);
    let _ = writeln!(body, "| joint | {} | {} |", joint.partition, sci(joint.residual));
    let results = json!({
        "tolerance": tol,
        "inverse_defect": inverse,
        "potentials": potentials,
        "operators": per_op,
        "joint": { "partition": joint.partition.to_string(), "residual": joint.residual },
    });
    Ok(Report::new("blockdiag", &m.name, inv, checks, results, body))
}

/// Integrates `form`, then measures how far `F - y_k` drifts from its value
/// at the first point and how far `dF` is from `form`.
fn potential_defects(
    c: &DiffeoChart,
    k: usize,
    form: &OneFormExpr,
    points: &[Vec<f64>],
) -> Result<(torsionlab::Expr, f64, f64), String> {
    let f = integrate_exact_one_form(form).map_err(|e| e.to_string())?;
    let df = OneFormExpr::exact(form.chart(), &f).map_err(|e| e.to_string())?;
    let y = &c.forward()[k];
    let mut offset = None;
    let (mut drift, mut exactness) = (0.0f64, 0.0f64);
    for p in points {
        let fv: f64 = f.eval(p).map_err(|e| e.to_string())?;
        let yv: f64 = y.eval(p).map_err(|e| e.to_string())?;
        let o = *offset.get_or_insert(fv - yv);
        drift = drift.max((fv - yv - o).abs() / (1.0 + yv.abs()));
        let (a, b) = (df.eval_at(p).map_err(|e| e.to_string())?, form.eval_at(p).map_err(|e| e.to_string())?);
        exactness = exactness.max(a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max));
    }
    Ok((f, drift, exactness))
}

/// Dispatches on the command name.
pub fn run(command: &str, m: &Manifest, opts: &Options) -> Result<Report> {
    match command {
        "torsion" => cmd_torsion(m, opts),
        "spectrum" => cmd_spectrum(m, opts),
        "algebra" => cmd_algebra(m, opts),
        "blockdiag" => cmd_blockdiag(m, opts),
        other => Err(anyhow!("unknown command `{other}`")),
    }
}

