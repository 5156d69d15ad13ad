//! CSV and JSON emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const NA: &str = "NA";

/// Shortest round-trip scientific notation; negative zero prints as zero.
pub fn num(v: f64) -> String {
    format!("{:e}", if v == 0.0 { 0.0 } else { v })
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), num)
}

pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut text = header.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
        text.push('\n');
        Self { columns: header.len(), text }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{c}");
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<PathBuf, CliError> {
        write_text(path, &self.text)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<PathBuf, CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// Companion report path: `scan.csv` becomes `scan.json`, `scan.json`
/// becomes `scan.report.json`.
pub fn report_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        out.with_extension("report.json")
    } else {
        out.with_extension("json")
    }
}
