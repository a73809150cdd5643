//! CSV bound reports with a provenance line.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const REPORT_HEADER: &str =
    "instance_id,bound_name,r,value_nats,value_bits,gap,iterations,wallclock_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub instance_id: String,
    pub bound_name: String,
    pub r: Option<usize>,
    pub value_nats: f64,
    pub gap: f64,
    pub iterations: usize,
    pub wallclock_ms: u128,
}

impl BoundRow {
    pub fn value_bits(&self) -> f64 {
        self.value_nats / std::f64::consts::LN_2
    }
}

/// Provenance recorded in the first line of every emitted CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub instance_hash: String,
    /// `key=value` pairs, kept in insertion order.
    pub config: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(instance_bytes: &[u8]) -> Self {
        Self {
            instance_hash: instance_hash(instance_bytes),
            config: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    /// `# tool-version, instance-hash, config` with `;`-separated config entries.
    pub fn line(&self) -> String {
        let config: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "# {} {}, sha256:{}, {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            self.instance_hash,
            config.join(";")
        )
    }
}

/// First 16 hex digits of the SHA-256 of the instance file.
pub fn instance_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub provenance: Provenance,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            provenance,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: BoundRow) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.provenance.line());
        let _ = writeln!(out, "{REPORT_HEADER}");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                field(&row.instance_id),
                field(&row.bound_name),
                row.r.map_or(String::new(), |r| r.to_string()),
                row.value_nats,
                row.value_bits(),
                row.gap,
                row.iterations,
                row.wallclock_ms
            );
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
