use std::io::Write;
use std::path::Path;

use carnot_core::Error;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::CapExceeded { .. } | Error::ExplosionGuard { .. } | Error::UnsupportedParams(_) => EXIT_CAP,
        Error::Certificate(_) | Error::RecursionFailure { .. } => EXIT_CERTIFICATE,
        _ => EXIT_VALIDATION,
    }
}

/// Variant name of an error, e.g. `JacobiViolation`.
pub fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

pub fn error_payload(e: &Error) -> Value {
    json!({
        "kind": error_kind(e),
        "message": e.to_string(),
        "detail": format!("{e:?}"),
        "exit_code": exit_code(e),
    })
}

/// SHA-256 over every input document, labelled and length-prefixed.
#[derive(Debug, Clone, Default)]
pub struct InputDigest {
    hasher: Sha256,
    sources: Vec<String>,
}

impl InputDigest {
    pub fn add(&mut self, label: &str, content: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((content.len() as u64).to_le_bytes());
        self.hasher.update(content);
        self.sources.push(label.to_string());
    }

    pub fn finish(self) -> Inputs {
        let digest = self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Inputs { digest, sources: self.sources }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inputs {
    pub digest: String,
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub inputs: Inputs,
    pub seed: u64,
    pub mode: String,
    pub ok: bool,
    pub outputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Rows for `--csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

pub fn write_report(report: &RunReport, out: Option<&Path>) -> std::io::Result<()> {
    let text = report.to_json_string();
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}
