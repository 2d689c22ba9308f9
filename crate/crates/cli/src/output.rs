//! Report writing: CSV with a `#` provenance footer, or JSON wrapped in a
//! provenance object.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use qcalc::certify::CertSpec;
use qcalc::format::fmt17;
use serde_json::{Map, Number, Value};

use crate::Common;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Run parameters recorded alongside every output.
pub struct Provenance {
    q: f64,
    max_order: usize,
    grid: String,
    tol_abs: f64,
    tol_rel: f64,
    pub extra: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(q: f64, spec: &CertSpec) -> Self {
        Self {
            q,
            max_order: spec.max_order,
            grid: spec.grid.describe(),
            tol_abs: spec.tol_abs,
            tol_rel: spec.tol_rel,
            extra: Vec::new(),
        }
    }

    fn fields(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("qcalc".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("q".to_string(), fmt17(self.q)),
            ("N".to_string(), self.max_order.to_string()),
            ("grid".to_string(), self.grid.clone()),
            ("tol_abs".to_string(), fmt17(self.tol_abs)),
            ("tol_rel".to_string(), fmt17(self.tol_rel)),
        ];
        v.extend(self.extra.iter().cloned());
        v
    }

    fn footer(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            s.push_str(&format!("# {} = {}\n", k, v));
        }
        s
    }

    fn to_value(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in self.fields() {
            m.insert(k, scalar(&v));
        }
        Value::Object(m)
    }
}

fn scalar(s: &str) -> Value {
    match s.parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(s.to_string()),
    }
}

pub enum Emitter {
    /// Header and preformatted rows, rendered in either format.
    Table(Vec<String>, Vec<Vec<String>>),
    /// Library-rendered CSV.
    Text(String),
    /// Library-rendered JSON.
    Json(String),
}

impl Emitter {
    pub fn table(header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Emitter::Table(header.iter().map(|h| h.to_string()).collect(), rows)
    }

    fn render(&self, format: Format, prov: &Provenance) -> String {
        match (self, format) {
            (Emitter::Table(header, rows), Format::Csv) => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(Vec::new());
                w.write_record(header).expect("in-memory write");
                for r in rows {
                    w.write_record(r).expect("in-memory write");
                }
                let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output");
                body + &prov.footer()
            }
            (Emitter::Table(header, rows), Format::Json) => {
                let rows = rows
                    .iter()
                    .map(|r| {
                        let mut m = Map::new();
                        for (h, v) in header.iter().zip(r) {
                            m.insert(h.clone(), scalar(v));
                        }
                        Value::Object(m)
                    })
                    .collect();
                wrap(prov, Value::Array(rows))
            }
            (Emitter::Text(s), _) => s.clone() + &prov.footer(),
            (Emitter::Json(s), _) => wrap(prov, serde_json::from_str(s).expect("library emits valid JSON")),
        }
    }

    /// Writes to `--out`, else to `<out_dir>/<name>.<ext>`, else stdout.
    pub fn write(&self, c: &Common, name: &str, prov: &Provenance) -> io::Result<()> {
        let text = self.render(c.format, prov);
        let path: Option<PathBuf> = c.out.clone().or_else(|| {
            c.out_dir
                .as_ref()
                .map(|d| d.join(format!("{}.{}", name, c.format.ext())))
        });
        match path {
            Some(p) => fs::write(&p, text)
                .map_err(|e| io::Error::new(e.kind(), format!("cannot write {}: {}", p.display(), e))),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

fn wrap(prov: &Provenance, result: Value) -> String {
    let mut m = Map::new();
    m.insert("provenance".into(), prov.to_value());
    m.insert("result".into(), result);
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("values serialize");
    s.push('\n');
    s
}
