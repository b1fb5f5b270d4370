//! CSV output: fixed headers, comma separators, LF line endings, numbers at
//! 17 significant digits (round-trip exact for doubles).

use anyhow::{Context, Result};
use std::path::Path;

/// 17-significant-digit formatting.
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes the whole file in one shot so failed jobs leave no partial CSV.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
