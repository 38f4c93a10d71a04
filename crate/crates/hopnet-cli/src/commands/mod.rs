//! Subcommand implementations.
//!
//! Every run follows the same shape: resolve parameters (flag > config file >
//! default), print them and stop on --dry-run, otherwise write the manifest,
//! compute, emit result files, and seal the manifest with their digests.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use anyhow::Result;

use crate::config::FileConfig;
use crate::manifest::RunWriter;

pub mod basins;
pub mod capacity;
pub mod dream;
pub mod fields;
pub mod mc;
pub mod phase;

pub struct Ctx {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub dry_run: bool,
    pub jobs: Option<usize>,
    pub file: FileConfig,
}

impl Ctx {
    pub fn base_params(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("seed".into(), self.seed.to_string());
        map.insert(
            "jobs".into(),
            self.jobs.map_or("auto".into(), |j| j.to_string()),
        );
        map.insert("out-dir".into(), self.out_dir.display().to_string());
        map
    }
}

/// Runs one subcommand body under the manifest protocol. The body returns the
/// names of the files it wrote into the run directory.
pub fn execute(
    ctx: &Ctx,
    subcommand: &str,
    params: BTreeMap<String, String>,
    body: impl FnOnce(&RunWriter) -> Result<Vec<String>>,
) -> Result<()> {
    if ctx.dry_run {
        for (key, value) in &params {
            println!("{key} = {value}");
        }
        return Ok(());
    }
    let writer = RunWriter::begin(&ctx.out_dir, subcommand, ctx.seed, params)?;
    let files = body(&writer)?;
    let paths: Vec<PathBuf> = files.iter().map(|f| writer.path(f)).collect();
    let manifest_path = writer.manifest_path().to_path_buf();
    writer.finish(&files)?;
    for path in paths {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", manifest_path.display());
    Ok(())
}

pub fn insert(map: &mut BTreeMap<String, String>, key: &str, value: impl Display) {
    map.insert(key.to_string(), value.to_string());
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

pub fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, cell)
}

/// Boolean flags have no "explicitly absent" state on the command line, so a
/// set flag wins and the config file only fills in an unset one.
pub fn resolve_flag(cli: bool, file: &FileConfig, key: &str) -> Result<bool> {
    if cli {
        return Ok(true);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| anyhow::anyhow!("config key {key} = {raw:?}: {e}")),
        None => Ok(false),
    }
}
