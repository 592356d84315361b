//! Command reports: a schema-versioned JSON document plus markdown text.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Flags as the command saw them, after defaults were applied.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Invocation {
    pub operators: Vec<String>,
    pub level: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub chart: Option<String>,
    pub hint: Option<String>,
    pub combos: Option<usize>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), passed, value: None, tolerance: None, detail: None }
    }

    /// Passes iff `value <= tolerance`.
    pub fn within(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { value: Some(value), tolerance: Some(tolerance), ..Self::new(name, value <= tolerance) }
    }

    pub fn failed(name: impl Into<String>, detail: impl ToString) -> Self {
        Self { detail: Some(detail.to_string()), ..Self::new(name, false) }
    }

    pub fn with_detail(mut self, detail: impl ToString) -> Self {
        self.detail = Some(detail.to_string());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub manifest: String,
    pub invocation: Invocation,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub results: Value,
    #[serde(skip)]
    pub markdown: String,
}

impl Report {
    pub fn new(command: &str, manifest: &str, invocation: Invocation, checks: Vec<Check>, results: Value, body: String) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            schema: SCHEMA_VERSION,
            command: command.into(),
            manifest: manifest.into(),
            invocation,
            checks,
            passed,
            results,
            markdown: body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let inv = &self.invocation;
        let _ = writeln!(out, "# torsionlab {}: {}\n", self.command, self.manifest);
        let _ = writeln!(out, "- operators: {}", inv.operators.join(", "));
        if let Some(m) = inv.level {
            let _ = writeln!(out, "- level: {m}");
        }
        let _ = writeln!(out, "- samples: {}, seed: {}", inv.samples, inv.seed);
        if let Some(c) = &inv.chart {
            let _ = writeln!(out, "- chart: {c}");
        }
        if let Some(h) = &inv.hint {
            let _ = writeln!(out, "- hint: {h}");
        }
        if let Some(c) = inv.combos {
            let _ = writeln!(out, "- combinations: {c}");
        }
        let _ = writeln!(out, "\n## Checks\n\n| check | verdict | value | tolerance | detail |\n|---|---|---|---|---|");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.value.map(|v| format!("{v:.3e}")).unwrap_or_default(),
                c.tolerance.map(|v| format!("{v:.0e}")).unwrap_or_default(),
                c.detail.as_deref().unwrap_or(""),
            );
        }
        if !self.markdown.is_empty() {
            let _ = write!(out, "\n{}", self.markdown);
        }
        let _ = writeln!(out, "\n**{}**", if self.passed { "all checks passed" } else { "some checks failed" });
        out
    }
}

pub fn sci(v: f64) -> String {
    format!("{v:.3e}")
}
