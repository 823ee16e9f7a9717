use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Machine-readable summary of one invocation. Apart from `timings_ms`, the
/// record is a function of the document text, flags and budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    /// SHA-256 of the document text.
    pub input_digest: String,
    pub command: String,
    pub parameters: Value,
    pub verdicts: BTreeMap<String, String>,
    pub timings_ms: BTreeMap<String, f64>,
}

pub fn digest(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

impl RunRecord {
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        fs::write(dir.join("run.json"), text + "\n")
    }
}
