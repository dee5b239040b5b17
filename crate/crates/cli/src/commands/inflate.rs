//! `inflate`: expand a compact archive into the naive per-iteration files
//! and report both on-disk sizes.

use std::fs;
use std::path::{Path, PathBuf};

use posebench::traceio::{read_compact, write_naive, TraceArchive};

use crate::error::{io_err, CliError};

#[derive(Debug)]
pub struct InflateReport {
    pub naive_dir: PathBuf,
    pub file_count: usize,
    pub compact_bytes: u64,
    pub naive_bytes: u64,
}

impl InflateReport {
    /// Naive-to-compact blowup, e.g. 20 means the naive files need twenty
    /// times the storage.
    pub fn blowup(&self) -> f64 {
        self.naive_bytes as f64 / self.compact_bytes as f64
    }
}

pub fn inflate(archive_dir: &Path, out: Option<&Path>) -> Result<InflateReport, CliError> {
    let archive = TraceArchive::in_dir(archive_dir);
    let trace = read_compact(&archive)?;
    let naive_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| archive_dir.join("naive"));
    let files = write_naive(&trace, &naive_dir)?;

    let mut naive_bytes = 0;
    for path in &files {
        naive_bytes += fs::metadata(path).map_err(|e| io_err(path, e))?.len();
    }
    Ok(InflateReport {
        naive_dir,
        file_count: files.len(),
        compact_bytes: archive.total_size()?,
        naive_bytes,
    })
}
