use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Record of one command invocation: what it read, what it wrote, and with
/// which settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub settings: serde_json::Value,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Input path → sha256 of its contents.
    pub inputs: BTreeMap<PathBuf, String>,
    pub artifacts: Vec<PathBuf>,
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn file_digest(path: &Path) -> Result<String> {
    let mut f =
        BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn start(command: &str, settings: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().collect(),
            settings,
            started_unix: now(),
            finished_unix: 0,
            inputs: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let d = file_digest(path)?;
        self.inputs.insert(path.to_path_buf(), d);
        Ok(())
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    /// Writes `manifest.json` into `dir`, listing itself as an artifact.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        self.artifact(&path);
        self.finished_unix = now();
        std::fs::write(&path, serde_json::to_vec_pretty(&self)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
