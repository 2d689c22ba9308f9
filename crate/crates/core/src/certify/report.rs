use serde_json::{Map, Number, Value};

use super::{CertSpec, Grid, Property};
use crate::format::fmt17;
use crate::qcore::QParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No violation found at this order, grid and tolerance.
    Consistent,
    Violated,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    /// Too close to zero to resolve the sign.
    Neutral,
    Violation,
}

impl CheckStatus {
    pub fn name(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Neutral => "neutral",
            CheckStatus::Violation => "violation",
        }
    }
}

/// One sign check: `value` is `D_q^n` at `x` already multiplied by the
/// sign the property requires, so a violation has `value < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRecord {
    pub index: usize,
    pub x: f64,
    pub n: usize,
    pub value: f64,
    pub scale: f64,
    pub status: CheckStatus,
}

impl CheckRecord {
    /// Signed slack; zero for neutral checks.
    pub fn margin(&self) -> f64 {
        match self.status {
            CheckStatus::Neutral => 0.0,
            _ => self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub property: Property,
    pub q: f64,
    pub max_order: usize,
    pub grid: Grid,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub verdict: Verdict,
    /// Violations sorted by (grid index, n).
    pub counterexamples: Vec<CheckRecord>,
    /// Every check, sorted by (grid index, n).
    pub checks: Vec<CheckRecord>,
    pub min_margin: f64,
    pub checks_run: usize,
    pub neutral_checks: usize,
}

impl CertReport {
    pub(crate) fn from_checks(q: QParam, spec: &CertSpec, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by_key(|c| (c.index, c.n));
        let counterexamples: Vec<CheckRecord> = checks
            .iter()
            .copied()
            .filter(|c| c.status == CheckStatus::Violation)
            .collect();
        let min_margin = checks.iter().map(CheckRecord::margin).fold(f64::INFINITY, f64::min);
        let neutral_checks = checks.iter().filter(|c| c.status == CheckStatus::Neutral).count();
        Self {
            property: spec.property,
            q: q.q(),
            max_order: spec.max_order,
            grid: spec.grid.clone(),
            tol_abs: spec.tol_abs,
            tol_rel: spec.tol_rel,
            verdict: if counterexamples.is_empty() {
                Verdict::Consistent
            } else {
                Verdict::Violated
            },
            counterexamples,
            checks_run: checks.len(),
            checks,
            min_margin,
            neutral_checks,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }

    pub fn first_counterexample(&self) -> Option<&CheckRecord> {
        self.counterexamples.first()
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("property".into(), self.property.name().into());
        m.insert("verdict".into(), self.verdict.name().into());
        m.insert("q".into(), num(self.q));
        m.insert("max_order".into(), self.max_order.into());
        m.insert("grid".into(), self.grid.describe().into());
        m.insert("tol_abs".into(), num(self.tol_abs));
        m.insert("tol_rel".into(), num(self.tol_rel));
        m.insert("checks_run".into(), self.checks_run.into());
        m.insert("neutral_checks".into(), self.neutral_checks.into());
        m.insert("min_margin".into(), num(self.min_margin));
        let cx = self
            .counterexamples
            .iter()
            .map(|c| {
                let mut e = Map::new();
                e.insert("x".into(), num(c.x));
                e.insert("n".into(), c.n.into());
                e.insert("value".into(), num(c.value));
                e.insert("scale".into(), num(c.scale));
                Value::Object(e)
            })
            .collect();
        m.insert("counterexamples".into(), Value::Array(cx));
        Value::Object(m)
    }

    /// Structured report; numbers carry 17 significant digits.
    pub fn to_json(&self) -> String {
        pretty(&self.to_value())
    }

    /// All checks as CSV with header `x,n,value,scale,margin,status`.
    pub fn to_csv(&self) -> String {
        let mut w = csv_writer();
        w.write_record(["x", "n", "value", "scale", "margin", "status"])
            .expect("in-memory write");
        write_rows(&mut w, None, &self.checks);
        finish(w)
    }
}

/// One named certification inside a harness.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub label: String,
    pub report: CertReport,
}

/// Result of a theorem harness: the certifications it ran, scalar
/// diagnostics, and whether the tested implication held.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessReport {
    pub name: String,
    pub passed: bool,
    pub sections: Vec<Section>,
    pub values: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl HarnessReport {
    pub(crate) fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            sections: Vec::new(),
            values: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, label: impl Into<String>, report: CertReport) -> &CertReport {
        self.sections.push(Section {
            label: label.into(),
            report,
        });
        &self.sections.last().expect("just pushed").report
    }

    pub fn section(&self, label: &str) -> Option<&CertReport> {
        self.sections.iter().find(|s| s.label == label).map(|s| &s.report)
    }

    pub fn to_json(&self) -> String {
        let mut m = Map::new();
        m.insert("harness".into(), self.name.clone().into());
        m.insert("passed".into(), self.passed.into());
        let mut vals = Map::new();
        for (k, v) in &self.values {
            vals.insert(k.clone(), num(*v));
        }
        m.insert("values".into(), Value::Object(vals));
        m.insert(
            "notes".into(),
            Value::Array(self.notes.iter().map(|n| Value::from(n.as_str())).collect()),
        );
        let secs = self
            .sections
            .iter()
            .map(|s| {
                let mut e = Map::new();
                e.insert("label".into(), s.label.clone().into());
                e.insert("report".into(), s.report.to_value());
                Value::Object(e)
            })
            .collect();
        m.insert("sections".into(), Value::Array(secs));
        pretty(&Value::Object(m))
    }

    /// Checks of every section, with a leading `section` column.
    pub fn to_csv(&self) -> String {
        let mut w = csv_writer();
        w.write_record(["section", "x", "n", "value", "scale", "margin", "status"])
            .expect("in-memory write");
        for s in &self.sections {
            write_rows(&mut w, Some(&s.label), &s.report.checks);
        }
        finish(w)
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        // arbitrary_precision keeps the 17-digit text as written
        Value::Number(fmt17(v).parse::<Number>().expect("fmt17 emits a JSON number"))
    } else {
        Value::String(fmt17(v))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn write_rows(w: &mut csv::Writer<Vec<u8>>, label: Option<&str>, checks: &[CheckRecord]) {
    for c in checks {
        let mut row = Vec::with_capacity(7);
        if let Some(l) = label {
            row.push(l.to_string());
        }
        row.extend([
            fmt17(c.x),
            c.n.to_string(),
            fmt17(c.value),
            fmt17(c.scale),
            fmt17(c.margin()),
            c.status.name().to_string(),
        ]);
        w.write_record(&row).expect("in-memory write");
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
