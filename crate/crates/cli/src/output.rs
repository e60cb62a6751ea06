use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use nlslab::harness::SCHEMA_VERSION;

/// Write to a temporary sibling, then rename over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub config_path: String,
    pub config_hash: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Path, config_hash: String, seed: u64) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            config_hash,
            seed,
            outputs: Vec::new(),
            started_unix: now_unix(),
            finished_unix: 0.0,
        }
    }

    pub fn finish(mut self, out: &Path) -> std::io::Result<()> {
        self.finished_unix = now_unix();
        self.outputs.sort();
        let text = serde_json::to_string_pretty(&self).expect("manifest serialises");
        write_atomic(&out.join("manifest.json"), text.as_bytes())
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub schema_version: u32,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

/// Writes `error.json` into `out` if possible; failures here are ignored since
/// the error is also printed.
pub fn write_error(out: Option<&PathBuf>, record: &ErrorRecord) {
    if let Some(dir) = out {
        let text = serde_json::to_string_pretty(record).expect("record serialises");
        let _ = write_atomic(&dir.join("error.json"), text.as_bytes());
    }
}
