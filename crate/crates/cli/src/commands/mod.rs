//! The five pipeline commands plus shared table and discovery helpers.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, CliError};

mod evaluate;
mod generate;
mod inflate;
mod replay;
mod report;

pub use evaluate::{evaluate, EvaluateReport};
pub use generate::{generate, GenerateReport};
pub use inflate::{inflate, InflateReport};
pub use replay::replay;
pub use report::{report, ReportPaths};

/// Writes a comma-separated table: provenance comment, one header row, then
/// data rows. Everything is plain text with `\n` separators so repeated
/// runs produce byte-identical files.
pub(crate) fn write_table(
    path: &Path,
    provenance: &str,
    header: &str,
    rows: &[String],
) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut content = String::with_capacity(rows.iter().map(|r| r.len() + 1).sum::<usize>() + 128);
    content.push_str(provenance);
    content.push('\n');
    content.push_str(header);
    content.push('\n');
    for row in rows {
        content.push_str(row);
        content.push('\n');
    }
    fs::write(path, content).map_err(|e| io_err(path, e))
}

/// Reads a table written by [`write_table`]: skips `#` comments, returns the
/// header fields and data rows.
pub(crate) fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(CliError::data(format!(
                        "{}: row has {} fields, header has {}",
                        path.display(),
                        fields.len(),
                        h.len()
                    )));
                }
                rows.push(fields);
            }
        }
    }
    let header =
        header.ok_or_else(|| CliError::data(format!("{}: missing header row", path.display())))?;
    Ok((header, rows))
}

/// Archive directories under `archives/`, sorted by name for deterministic
/// processing order.
pub(crate) fn discover_archives(archives_dir: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    let mut archives = Vec::new();
    let entries = fs::read_dir(archives_dir).map_err(|e| io_err(archives_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| io_err(archives_dir, e))?;
        let path = entry.path();
        if path.is_dir() && path.join("meta.txt").is_file() {
            let name = entry.file_name().to_string_lossy().into_owned();
            archives.push((name, path));
        }
    }
    if archives.is_empty() {
        return Err(CliError::data(format!(
            "no archives found under {}",
            archives_dir.display()
        )));
    }
    archives.sort();
    Ok(archives)
}

/// Runs `body` inside a rayon pool with the requested worker count.
pub(crate) fn with_pool<T: Send>(
    jobs: Option<usize>,
    body: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be >= 1"));
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config(format!("cannot build worker pool: {e}")))?;
    pool.install(body)
}

/// Shortest-round-trip decimal used for all numeric table fields.
pub(crate) fn fmt_f64(value: f64) -> String {
    format!("{value}")
}
