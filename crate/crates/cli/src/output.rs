use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// JSON report written next to `out`: `x.csv` gets `x.json`, a `.json`
/// output gets `x.report.json`.
pub fn report_path(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("json") => out.with_extension("report.json"),
        _ => out.with_extension("json"),
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Writes a CSV table with a header row. Values use the shortest
/// round-trip representation.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let text: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| format!("{x:?}")).collect()).collect();
    write_records(path, header, &text)
}

pub fn write_records(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
