//! Run manifests.
//!
//! Every run writes `<subcommand>-manifest.json` before any result file, then
//! rewrites it with the SHA-256 digest of each emitted file. A reader can
//! verify that the files on disk are the ones this run produced.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub master_seed: u64,
    pub timestamp_unix: u64,
    pub artifact_version: String,
    pub outputs: BTreeMap<String, String>,
}

pub struct RunWriter {
    dir: PathBuf,
    manifest_path: PathBuf,
    manifest: RunManifest,
}

impl RunWriter {
    /// Creates the output directory and writes the manifest with an empty
    /// digest map, so a crash mid-run still leaves the parameters on disk.
    pub fn begin(
        dir: &Path,
        subcommand: &str,
        seed: u64,
        parameters: BTreeMap<String, String>,
    ) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            parameters,
            master_seed: seed,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .unwrap_or_default()
                .as_secs(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: BTreeMap::new(),
        };
        let writer = Self {
            manifest_path: dir.join(format!("{subcommand}-manifest.json")),
            dir: dir.to_path_buf(),
            manifest,
        };
        writer.flush()?;
        Ok(writer)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn manifest_path(&self) -> &Path {
        &self.manifest_path
    }

    /// Digests the named result files and rewrites the manifest.
    pub fn finish(mut self, files: &[String]) -> Result<()> {
        for name in files {
            let bytes = fs::read(self.path(name))
                .with_context(|| format!("digesting result file {name}"))?;
            self.manifest
                .outputs
                .insert(name.clone(), hex_digest(&bytes));
        }
        self.flush()
    }

    fn flush(&self) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(&self.manifest_path, json + "\n")
            .with_context(|| format!("writing {}", self.manifest_path.display()))?;
        Ok(())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
