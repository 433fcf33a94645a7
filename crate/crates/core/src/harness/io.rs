//! CSV and manifest emission.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a CSV
//! pins down every bit of the values it was written from.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Shortest round-trip text for `x`; exponent form outside `[1e-4, 1e6)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn csv_string<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of numbers is UTF-8"))
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

/// Key/value block followed by the config echo.
pub fn manifest(subcommand: &str, config_toml: &str, wall_seconds: f64) -> String {
    format!(
        "[manifest]\nprogram = \"levy-memory\"\nversion = \"{}\"\nsubcommand = \"{subcommand}\"\nwall_time_s = {wall_seconds:.3}\n\n# config\n{config_toml}",
        env!("CARGO_PKG_VERSION")
    )
}

/// Writes `(file name, contents)` pairs into `dir`, creating it if needed.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            fs::write(&path, text)?;
            Ok(path)
        })
        .collect()
}
