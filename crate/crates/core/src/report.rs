//! CSV output for experiment rows.
//!
//! Headers are the field names of the row structs in declaration order.
//! Floats are written in shortest round-trip form, so identical results
//! give identical bytes. Missing values are empty cells.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Writes `rows` as CSV with a header line.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` to `path`, creating parent directories.
pub fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(std::fs::File::create(path)?, rows)
}

/// Renders `rows` as a CSV string.
pub fn to_csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
