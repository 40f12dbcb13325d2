use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub seeds: Vec<u64>,
    pub wall_times: Vec<f64>,
    pub total_wall_time: f64,
    /// File name → SHA-256 hex digest.
    pub outputs: BTreeMap<String, String>,
    pub summary: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes files into the output directory and remembers their digests.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    digests: BTreeMap<String, String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            digests: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(CliError::io(&path))?;
        self.digests.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<PathBuf>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.dir.join(name);
        let csv_err = |source| CliError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::io(&path)(e.into_error()))?;
        self.write(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
            path: path.clone(),
            source,
        })?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(
        self,
        config: &RunConfig,
        seeds: Vec<u64>,
        wall_times: Vec<f64>,
        total_wall_time: f64,
        summary: serde_json::Value,
    ) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds,
            wall_times,
            total_wall_time,
            outputs: self.digests,
            summary,
        };
        let path = self.dir.join(MANIFEST_FILE);
        let mut text =
            serde_json::to_string_pretty(&manifest).map_err(|source| CliError::Json {
                path: path.clone(),
                source,
            })?;
        text.push('\n');
        fs::write(&path, text).map_err(CliError::io(&path))?;
        Ok(manifest)
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1e-300, 2.0 / 3.0, -0.0, 123456789.123] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
