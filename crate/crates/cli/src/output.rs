//! CSV tables and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::Result;

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

pub(crate) fn fmt_ber(v: f64) -> String {
    format!("{v:.6e}")
}

pub(crate) fn fmt_db(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub seed: u64,
    /// Resolved configuration; feeding it back with `--config` reproduces
    /// the CSV.
    pub config: String,
    pub csv: String,
    pub rows: usize,
    pub csv_sha256: String,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, csv_path: &Path, csv_bytes: &[u8], rows: usize) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment: cfg.experiment.to_string(),
            seed: cfg.seed,
            config: cfg.to_text(),
            csv: csv_path.display().to_string(),
            rows,
            csv_sha256: Sha256::digest(csv_bytes)
                .iter()
                .map(|b| format!("{b:02x}"))
                .collect(),
        }
    }
}

/// `results.csv` → `results.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

/// Writes the CSV and its manifest; returns the manifest path.
pub fn write_outputs(cfg: &ExperimentConfig, table: &Table, csv_path: &Path) -> Result<PathBuf> {
    let bytes = table.to_csv()?;
    std::fs::write(csv_path, &bytes)?;
    let manifest = Manifest::new(cfg, csv_path, &bytes, table.rows.len());
    let path = manifest_path(csv_path);
    let mut f = std::fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_bytes_and_columns() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n1,\"x,y\"\n");
        assert_eq!(t.column("b").unwrap(), vec!["x,y"]);
        assert!(t.column("c").is_none());
    }

    #[test]
    fn number_formats() {
        assert_eq!(fmt_ber(3.8e-3), "3.800000e-3");
        assert_eq!(fmt_db(-19.123456), "-19.1235");
        assert_eq!(fmt_db(f64::INFINITY), "inf");
    }

    #[test]
    fn manifest_location() {
        assert_eq!(
            manifest_path(Path::new("out/r.csv")),
            Path::new("out/r.manifest.json")
        );
    }
}
