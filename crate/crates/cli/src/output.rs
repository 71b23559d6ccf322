//! File emission: fixed-precision CSV, JSON, content hashes and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qls_core::{c64, Mat};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Row-major real matrix, one line per row, no header.
pub fn real_matrix_csv(m: &Mat<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_float(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Row-major complex matrix; each cell occupies two columns `re,im`.
pub fn complex_matrix_csv(m: &Mat<c64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        write_complex_row(&mut out, (0..m.ncols()).map(|j| m[(i, j)]));
    }
    out
}

fn write_complex_row(out: &mut String, cells: impl Iterator<Item = c64>) {
    let mut first = true;
    for z in cells {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{},{}", fmt_float(z.re), fmt_float(z.im));
    }
    out.push('\n');
}

/// Several complex matrices in one file; every line starts with `state,row`.
pub fn complex_bundle_csv<'a>(items: impl Iterator<Item = (usize, &'a Mat<c64>)>) -> String {
    let mut out = String::new();
    for (state, m) in items {
        for i in 0..m.nrows() {
            let _ = write!(out, "{state},{},", i + 1);
            write_complex_row(&mut out, (0..m.ncols()).map(|j| m[(i, j)]));
        }
    }
    out
}

/// Same as [`complex_bundle_csv`] for real matrices.
pub fn real_bundle_csv<'a>(items: impl Iterator<Item = (usize, &'a Mat<f64>)>) -> String {
    let mut out = String::new();
    for (state, m) in items {
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| fmt_float(m[(i, j)])).collect();
            let _ = writeln!(out, "{state},{},{}", i + 1, row.join(","));
        }
    }
    out
}

/// Table with a header line; every cell is a float.
pub fn table_csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_float).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_real_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|c| c.trim().parse::<f64>().with_context(|| format!("bad number {c:?}"))).collect())
        .collect()
}

pub fn parse_complex_csv(text: &str) -> Result<Mat<c64>> {
    let rows = parse_real_csv(text)?;
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len() / 2);
    anyhow::ensure!(rows.iter().all(|r| r.len() == 2 * ncols), "ragged complex matrix");
    Ok(Mat::from_fn(nrows, ncols, |i, j| c64::new(rows[i][2 * j], rows[i][2 * j + 1])))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Files written by one run. Dropping an unfinished set deletes them again.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<OutputFile>,
    committed: bool,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(OutputSet { dir: dir.to_path_buf(), files: Vec::new(), committed: false })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(OutputFile { path: rel.to_string(), sha256: sha256_hex(contents), bytes: contents.len() as u64 });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    /// Keeps the files and returns their listing.
    pub fn commit(mut self) -> Vec<OutputFile> {
        self.committed = true;
        std::mem::take(&mut self.files)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for f in &self.files {
                let _ = fs::remove_file(self.dir.join(&f.path));
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CellFailureRecord {
    pub phi: f64,
    pub chi: String,
    pub message: String,
}

/// Written as `manifest.json` next to the outputs it lists.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub preset: Option<String>,
    /// Fully resolved configuration, flag names as keys.
    pub config: serde_json::Value,
    pub version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<OutputFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<CellFailureRecord>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }
}
