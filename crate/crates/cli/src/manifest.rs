//! Run manifests: one JSON document per output directory recording what
//! produced its artifacts.

use mmae::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use std::process::Command;

/// Provenance record written next to every command's artifacts. Rerunning
/// a command with the same configuration reproduces every numeric
/// artifact byte for byte; the wall-clock fields here are the only output
/// allowed to differ between such runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Which subcommand ran.
    pub command: String,
    /// The seed governing the command's randomness.
    pub seed: u64,
    /// `git describe` of the working tree, or "unknown" outside a repo.
    pub git: String,
    /// Echo of the effective configuration.
    pub config: serde_json::Value,
    /// Artifact paths relative to this directory, manifest excluded.
    pub outputs: Vec<String>,
    /// Total wall-clock seconds.
    pub seconds: f64,
    /// Wall-clock seconds per training epoch; empty for other commands.
    pub epoch_seconds: Vec<f64>,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::parse(format!("serializing manifest: {e}")))?;
        fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("manifest {}: {e}", path.display())))
    }
}

/// Best-effort description of the source tree; never fails the run.
pub fn git_describe() -> String {
    let out = Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output();
    match out {
        Ok(o) if o.status.success() => {
            let text = String::from_utf8_lossy(&o.stdout).trim().to_string();
            if text.is_empty() {
                "unknown".to_string()
            } else {
                text
            }
        }
        _ => "unknown".to_string(),
    }
}
