use std::io::Write;
use std::path::Path;

use lerw_core::graph::WeightedGraph;
use lerw_core::rational::format_rational;
use lerw_core::Rational;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    /// Exact comparison; a failing record keeps both values.
    pub fn equal(name: impl Into<String>, lhs: &Rational, rhs: &Rational) -> Self {
        let status = if lhs == rhs { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, lhs: format_rational(lhs), rhs: format_rational(rhs), note: String::new() }
    }

    pub fn with_status(name: impl Into<String>, pass: bool, lhs: String, rhs: String) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, lhs, rhs, note: String::new() }
    }

    pub fn skipped(name: impl Into<String>, why: &str) -> Self {
        Check {
            name: name.into(),
            status: Status::Skipped,
            lhs: String::new(),
            rhs: String::new(),
            note: format!("skipped: {why}"),
        }
    }

    pub fn info(name: impl Into<String>, lhs: String, rhs: String) -> Self {
        Check { name: name.into(), status: Status::Info, lhs, rhs, note: String::new() }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    pub wall_time_ms: u128,
}

impl VerificationReport {
    pub fn new(command: &str) -> Self {
        VerificationReport {
            command: command.to_string(),
            fingerprint: None,
            seed: None,
            checks: Vec::new(),
            details: None,
            wall_time_ms: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["name", "status", "lhs", "rhs", "note"])?;
        for c in &self.checks {
            let status = serde_json::to_value(c.status)?.as_str().unwrap_or_default().to_string();
            w.write_record([&c.name, &status, &c.lhs, &c.rhs, &c.note])?;
        }
        w.flush()
    }
}

/// SHA-256 of the canonical JSON form of the graph.
pub fn fingerprint(g: &WeightedGraph) -> String {
    let doc = serde_json::to_vec(&g.to_document()).expect("graph documents serialize");
    hex::encode(Sha256::digest(doc))
}

pub fn print_json<T: Serialize>(value: &T) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}
