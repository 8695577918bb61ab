//! Run manifest: a deterministic JSON record of what a run computed.
//! No timestamps; identical inputs produce identical bytes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub format: String,
    pub artifacts: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_passed: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(experiment: String, config_hash: String, seed: Option<u64>, format: String) -> Self {
        Self {
            tool: "pathint",
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            config_hash,
            seed,
            format,
            artifacts: Vec::new(),
            metrics: BTreeMap::new(),
            checks: BTreeMap::new(),
            all_passed: None,
            notes: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn check(&mut self, name: &str, passed: bool) {
        self.checks.insert(name.to_string(), passed);
    }

    pub fn artifact(&mut self, name: &str) {
        self.artifacts.push(name.to_string());
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        let path = out_dir.join("manifest.json");
        let mut file = std::fs::File::create(&path)?;
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Internal(format!("manifest serialization: {e}")))?;
        file.write_all(body.as_bytes())?;
        file.write_all(b"\n")?;
        Ok(())
    }
}
