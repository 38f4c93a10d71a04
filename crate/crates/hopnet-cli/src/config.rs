//! Flat key-value run configuration.
//!
//! A config file supplies defaults for any long flag; explicit flags win over
//! the file, the file wins over built-in defaults. Keys match flag names
//! (`t-grid`, `burn-in`), with underscores accepted in place of dashes.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Files may carry keys for several subcommands at once; each subcommand
    /// reads only the keys it knows.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected KEY=VALUE, got {line:?}",
                    path.display(),
                    lineno + 1
                );
            };
            entries.insert(normalize(key), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Three-way precedence for one parameter: flag > config file > default.
pub fn resolve<T>(cli: Option<T>, file: &FileConfig, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    if let Some(v) = cli {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| anyhow::anyhow!("config key {key} = {raw:?}: {e}")),
        None => Ok(default),
    }
}

/// Grid syntax: either a comma list (`0,0.1,1`) or an inclusive linear range
/// `start:stop:count`.
pub fn parse_grid(raw: &str) -> Result<Vec<f64>> {
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            bail!("range syntax is start:stop:count, got {raw:?}");
        }
        let start: f64 = parts[0].parse().context("range start")?;
        let stop: f64 = parts[1].parse().context("range stop")?;
        let count: usize = parts[2].parse().context("range count")?;
        if count == 0 {
            bail!("range count must be at least 1");
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (stop - start) / (count - 1) as f64;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| anyhow::anyhow!("grid entry {s:?}: {e}"))
        })
        .collect()
}

/// Comma list of unsigned integers, for size sweeps.
pub fn parse_usize_list(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| anyhow::anyhow!("list entry {s:?}: {e}"))
        })
        .collect()
}
