//! Locating and loading matrix directories, including the bundled fixtures.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evaluation::ScoreMatrix;
use crate::matrix::DistanceMatrix;

/// Environment variable overriding the bundled fixtures directory.
pub const FIXTURES_ENV: &str = "LANGSIM_FIXTURES";

/// `$LANGSIM_FIXTURES` if set, otherwise the `fixtures/` directory shipped
/// with this crate.
pub fn fixtures_dir() -> PathBuf {
    match std::env::var_os(FIXTURES_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
    }
}

/// `*.csv` files directly inside `dir`, sorted by file name.
pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn load_matrix_dir(dir: &Path) -> Result<Vec<DistanceMatrix>> {
    csv_files(dir)?
        .iter()
        .map(|p| DistanceMatrix::load(p, None, false))
        .collect()
}

pub fn load_score_dir(dir: &Path) -> Result<Vec<ScoreMatrix>> {
    csv_files(dir)?
        .iter()
        .map(|p| ScoreMatrix::load(p))
        .collect()
}
