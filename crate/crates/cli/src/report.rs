//! Plot-ready data files and a plain-text summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::experiment::ResultRecord;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("emit_report needs at least one record")]
    NonemptyRequired,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Writes `summary.txt` and one whitespace-separated `.dat` file per record
/// that carries plot data. Returns the paths written.
pub fn emit_report(records: &[ResultRecord], dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::NonemptyRequired);
    }
    fs::create_dir_all(dir).map_err(|source| ReportError::Io { path: dir.to_owned(), source })?;
    let mut written = Vec::new();
    let mut summary = String::new();
    for (i, rec) in records.iter().enumerate() {
        let verdict = serde_json::to_value(rec.verdict).expect("serializable");
        let _ = writeln!(summary, "[{}] {} {}", i, rec.kind.name(), &rec.config_digest[..12]);
        let _ = writeln!(summary, "verdict: {}", verdict.as_str().unwrap_or("?"));
        if let Some(obj) = rec.summary.as_object() {
            for (k, v) in obj {
                let _ = writeln!(summary, "  {k}: {v}");
            }
        }
        if let Some(plot) = &rec.plot {
            let name = if records.len() == 1 { format!("{}.dat", plot.name) } else { format!("{}_{i}.dat", plot.name) };
            let path = dir.join(name);
            let mut text = format!("# {}\n", plot.columns.join(" "));
            for row in &plot.rows {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                text.push_str(&cells.join(" "));
                text.push('\n');
            }
            fs::write(&path, text).map_err(|source| ReportError::Io { path: path.clone(), source })?;
            written.push(path);
        }
    }
    let path = dir.join("summary.txt");
    fs::write(&path, summary).map_err(|source| ReportError::Io { path: path.clone(), source })?;
    written.push(path);
    Ok(written)
}
