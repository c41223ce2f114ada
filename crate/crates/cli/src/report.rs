//! Scenario reports and their text, CSV and JSON-lines renderings.
//!
//! Rendering splits a report into a data part and a metadata part. The data
//! part depends only on the config and seed and is byte-stable; wall-clock
//! duration lives in the metadata part only.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::ScenarioKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or_else(|| json!(format!("{x:?}")), Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// `value ≤ tolerance` unless `passed` was set explicitly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub kind: ScenarioKind,
    pub seed: Option<u64>,
    pub prng: Option<&'static str>,
    /// The config as run, in TOML.
    pub config_echo: String,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Module error that stopped the run, if any.
    pub error: Option<String>,
    pub duration: Duration,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Jsonl,
}

/// A rendered report: `data` is byte-stable, `meta` carries the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub data: String,
    pub meta: String,
}

fn checks_table(report: &ScenarioReport) -> Table {
    let mut t = Table::new("checks", &["check", "value", "tolerance", "passed"]);
    for c in &report.checks {
        t.push(vec![c.name.clone().into(), c.value.into(), c.tolerance.into(), c.passed.into()]);
    }
    t
}

fn data_tables(report: &ScenarioReport) -> Vec<Table> {
    let mut tables = report.tables.clone();
    if let Some(e) = &report.error {
        let mut t = Table::new("error", &["message"]);
        t.push(vec![e.clone().into()]);
        tables.push(t);
    }
    tables.push(checks_table(report));
    tables
}

fn csv_table(t: &Table) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&t.columns).expect("in-memory write");
    for r in &t.rows {
        w.write_record(r.iter().map(Cell::render)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn text_table(t: &Table) -> String {
    let cells: Vec<Vec<String>> = std::iter::once(t.columns.clone())
        .chain(t.rows.iter().map(|r| r.iter().map(Cell::render).collect()))
        .collect();
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = format!("== {} ==\n", t.name);
    for r in &cells {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn header(report: &ScenarioReport) -> Vec<(String, String)> {
    let mut h = vec![("scenario".to_string(), report.name.clone()), ("kind".to_string(), report.kind.to_string())];
    if let Some(s) = report.seed {
        h.push(("seed".into(), s.to_string()));
    }
    if let Some(p) = report.prng {
        h.push(("prng".into(), p.to_string()));
    }
    h
}

pub fn render(report: &ScenarioReport, format: Format) -> Rendered {
    let tables = data_tables(report);
    let status = if report.passed() { "pass" } else { "fail" };
    let millis = report.duration.as_secs_f64() * 1e3;
    match format {
        Format::Text => {
            let mut data = String::new();
            for (k, v) in header(report) {
                data.push_str(&format!("{k}: {v}\n"));
            }
            for n in &report.notes {
                data.push_str(&format!("note: {n}\n"));
            }
            for t in &tables {
                data.push('\n');
                data.push_str(&text_table(t));
            }
            data.push_str(&format!("\nstatus: {status}\n"));
            let meta = format!("duration_ms: {millis:.3}\n");
            Rendered { data, meta }
        }
        Format::Csv => {
            let mut data = String::new();
            for (k, v) in header(report) {
                data.push_str(&format!("# {k}: {v}\n"));
            }
            for t in &tables {
                data.push_str(&format!("# table: {}\n", t.name));
                data.push_str(&csv_table(t));
            }
            let mut meta = format!("# status: {status}\n# duration_ms: {millis:.3}\n");
            for n in &report.notes {
                meta.push_str(&format!("# note: {n}\n"));
            }
            Rendered { data, meta }
        }
        Format::Jsonl => {
            let mut data = String::new();
            for t in &tables {
                for r in &t.rows {
                    let mut obj = Map::new();
                    obj.insert("table".into(), json!(t.name));
                    for (c, v) in t.columns.iter().zip(r) {
                        obj.insert(c.clone(), v.json());
                    }
                    data.push_str(&Value::Object(obj).to_string());
                    data.push('\n');
                }
            }
            let meta = json!({
                "meta": {
                    "scenario": report.name,
                    "kind": report.kind.name(),
                    "seed": report.seed,
                    "prng": report.prng,
                    "status": status,
                    "notes": report.notes,
                    "duration_ms": millis,
                    "config": report.config_echo,
                }
            });
            Rendered { data, meta: format!("{meta}\n") }
        }
    }
}

/// Writes the data part to `out` (or stdout) and the metadata part to
/// `<out>.meta` (or after the data on stdout).
pub fn emit_report(report: &ScenarioReport, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    let r = render(report, format);
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, &r.data)?;
            let mut meta_path = path.as_os_str().to_owned();
            meta_path.push(".meta");
            let mut meta = r.meta;
            if format != Format::Jsonl {
                meta.push_str("\n# config\n");
                meta.push_str(&report.config_echo);
            }
            std::fs::write(meta_path, meta)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(r.data.as_bytes())?;
            stdout.write_all(r.meta.as_bytes())
        }
    }
}
