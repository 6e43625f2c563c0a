//! Run manifest: enough to reproduce a run and audit its inputs.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use fairgroups::Result;

#[derive(Debug, Serialize)]
pub struct ManifestInput {
    pub path: String,
    pub sha256: String,
}

/// Written as `manifest.json` in the output directory after every run.
/// Reruns with identical arguments and inputs produce byte-identical
/// manifests except for `timestamp_unix`.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub seed: u64,
    pub inputs: Vec<ManifestInput>,
    pub outputs: Vec<String>,
    pub timestamp_unix: u64,
}

impl Manifest {
    pub fn new(seed: u64) -> Self {
        Manifest {
            tool: "fairgroups",
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let mut file = File::open(path)?;
        let mut hasher = Sha256::new();
        let mut buf = [0u8; 64 * 1024];
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
        self.inputs.push(ManifestInput {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, output_dir: &Path) -> Result<PathBuf> {
        let path = output_dir.join("manifest.json");
        let mut f = File::create(&path)?;
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        f.write_all(body.as_bytes())?;
        Ok(path)
    }
}
