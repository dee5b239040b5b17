//! Trace serialization: the compact two-file representation and the naive
//! per-iteration files.
//!
//! A compact archive is a directory holding three files:
//!
//! * `fx.csv`: one objective vector per line, one line per evaluated
//!   individual, in evaluation order (`mu + lambda * (t_max - 1)` lines).
//! * `id.csv`: one line per iteration, `mu` comma-separated 1-based ids;
//!   an id is the line number of the member's objective vector in `fx.csv`.
//! * `meta.txt`: `key=value` lines recording m, mu, lambda, t_max, problem,
//!   algorithm, seed and the field encoding.
//!
//! The naive representation stores iteration `t`'s full population in
//! `fP_t.csv`, duplicating every survivor. Both representations share the
//! same field syntax: comma separators, newline row separators, no headers.
//! Real fields are either the shortest decimal that round-trips the value
//! (`text`) or a 12-character Base64 encoding of the big-endian IEEE-754
//! binary64 image (`base64`), which is fully reversible bit for bit.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use thiserror::Error;

use crate::error::CoreError;
use crate::objective::ObjectiveVector;
use crate::trace::{Encoding, PopulationSnapshot, RunMeta, RunTrace};

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Format {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl TraceIoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        TraceIoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(file: &Path, line: usize, message: impl Into<String>) -> Self {
        TraceIoError::Format {
            file: file.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

/// File locations of one run's compact representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceArchive {
    meta_path: PathBuf,
    fx_path: PathBuf,
    id_path: PathBuf,
}

impl TraceArchive {
    /// Standard member names inside an archive directory.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            meta_path: dir.join("meta.txt"),
            fx_path: dir.join("fx.csv"),
            id_path: dir.join("id.csv"),
        }
    }

    pub fn meta_path(&self) -> &Path {
        &self.meta_path
    }

    pub fn fx_path(&self) -> &Path {
        &self.fx_path
    }

    pub fn id_path(&self) -> &Path {
        &self.id_path
    }

    pub fn exists(&self) -> bool {
        self.meta_path.is_file() && self.fx_path.is_file() && self.id_path.is_file()
    }

    /// Total on-disk size of the three archive files.
    pub fn total_size(&self) -> Result<u64, TraceIoError> {
        let mut total = 0;
        for path in [&self.meta_path, &self.fx_path, &self.id_path] {
            total += fs::metadata(path)
                .map_err(|e| TraceIoError::io(path, e))?
                .len();
        }
        Ok(total)
    }
}

/// Encodes one real value as a text field.
pub fn encode_real(x: f64, mode: Encoding) -> String {
    match mode {
        Encoding::Text => format!("{x}"),
        Encoding::Base64 => BASE64.encode(x.to_be_bytes()),
    }
}

/// Decodes one real field; the message is wrapped with file/line context by
/// the reader.
pub fn decode_real(field: &str, mode: Encoding) -> Result<f64, String> {
    let value = match mode {
        Encoding::Text => field
            .parse::<f64>()
            .map_err(|_| format!("unparseable real field {field:?}"))?,
        Encoding::Base64 => {
            let bytes = BASE64
                .decode(field)
                .map_err(|_| format!("unparseable Base64 field {field:?}"))?;
            let image: [u8; 8] = bytes
                .try_into()
                .map_err(|_| format!("Base64 field {field:?} does not hold 8 bytes"))?;
            f64::from_be_bytes(image)
        }
    };
    if !value.is_finite() {
        return Err(format!("field {field:?} decodes to a non-finite value"));
    }
    Ok(value)
}

fn format_vector(point: &ObjectiveVector, mode: Encoding) -> String {
    let fields: Vec<String> = point
        .values()
        .iter()
        .map(|&v| encode_real(v, mode))
        .collect();
    fields.join(",")
}

fn write_file(path: &Path, content: &str) -> Result<(), TraceIoError> {
    let mut file = fs::File::create(path).map_err(|e| TraceIoError::io(path, e))?;
    file.write_all(content.as_bytes())
        .map_err(|e| TraceIoError::io(path, e))
}

/// Writes the compact representation of `trace` into `dir`.
pub fn write_compact(trace: &RunTrace, dir: &Path) -> Result<TraceArchive, TraceIoError> {
    fs::create_dir_all(dir).map_err(|e| TraceIoError::io(dir, e))?;
    let archive = TraceArchive::in_dir(dir);
    let meta = trace.meta();

    let mut fx = String::new();
    for point in trace.all_points() {
        fx.push_str(&format_vector(point, meta.encoding));
        fx.push('\n');
    }
    write_file(&archive.fx_path, &fx)?;

    let mut id = String::new();
    for row in trace.memberships() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        id.push_str(&fields.join(","));
        id.push('\n');
    }
    write_file(&archive.id_path, &id)?;

    write_file(&archive.meta_path, &render_meta(meta))?;
    Ok(archive)
}

fn render_meta(meta: &RunMeta) -> String {
    format!(
        "m={}\nmu={}\nlambda={}\nt_max={}\nproblem={}\nalgorithm={}\nseed={}\nencoding={}\n",
        meta.m,
        meta.mu,
        meta.lambda,
        meta.t_max,
        meta.problem_id,
        meta.algorithm_id,
        meta.seed,
        meta.encoding
    )
}

/// Reads a compact archive back into a validated trace.
pub fn read_compact(archive: &TraceArchive) -> Result<RunTrace, TraceIoError> {
    let meta = read_meta(&archive.meta_path)?;

    let fx_text =
        fs::read_to_string(&archive.fx_path).map_err(|e| TraceIoError::io(&archive.fx_path, e))?;
    let mut all_points = Vec::new();
    for (i, raw) in fx_text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != meta.m {
            return Err(TraceIoError::format(
                &archive.fx_path,
                line,
                format!("expected {} fields, found {}", meta.m, fields.len()),
            ));
        }
        let mut values = Vec::with_capacity(meta.m);
        for field in fields {
            let v = decode_real(field, meta.encoding)
                .map_err(|msg| TraceIoError::format(&archive.fx_path, line, msg))?;
            values.push(v);
        }
        let point = ObjectiveVector::new(values)
            .map_err(|e| TraceIoError::format(&archive.fx_path, line, e.to_string()))?;
        all_points.push(point);
    }
    if all_points.len() as u64 != meta.fe_max() {
        return Err(TraceIoError::format(
            &archive.fx_path,
            all_points.len(),
            format!(
                "expected {} objective-vector lines (mu + lambda * (t_max - 1)), found {}",
                meta.fe_max(),
                all_points.len()
            ),
        ));
    }

    let id_text =
        fs::read_to_string(&archive.id_path).map_err(|e| TraceIoError::io(&archive.id_path, e))?;
    let mut memberships = Vec::new();
    for (i, raw) in id_text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != meta.mu {
            return Err(TraceIoError::format(
                &archive.id_path,
                line,
                format!("expected {} ids, found {}", meta.mu, fields.len()),
            ));
        }
        let evaluated_by_now = meta.mu as u64 + meta.lambda as u64 * (line as u64 - 1);
        let mut row = Vec::with_capacity(meta.mu);
        for field in fields {
            let id: u64 = field.parse().map_err(|_| {
                TraceIoError::format(&archive.id_path, line, format!("unparseable id {field:?}"))
            })?;
            if id == 0 || id > all_points.len() as u64 || id > evaluated_by_now {
                return Err(TraceIoError::format(
                    &archive.id_path,
                    line,
                    format!("id {id} out of range [1, {evaluated_by_now}]"),
                ));
            }
            row.push(id as u32);
        }
        memberships.push(row);
    }
    if memberships.len() != meta.t_max {
        return Err(TraceIoError::format(
            &archive.id_path,
            memberships.len(),
            format!(
                "expected {} id lines, found {}",
                meta.t_max,
                memberships.len()
            ),
        ));
    }

    RunTrace::new(meta, all_points, memberships)
        .map_err(|e| TraceIoError::format(&archive.id_path, 0, e.to_string()))
}

fn read_meta(path: &Path) -> Result<RunMeta, TraceIoError> {
    let text = fs::read_to_string(path).map_err(|e| TraceIoError::io(path, e))?;
    let mut m = None;
    let mut mu = None;
    let mut lambda = None;
    let mut t_max = None;
    let mut problem = None;
    let mut algorithm = None;
    let mut seed = None;
    let mut encoding = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| {
            TraceIoError::format(path, line, format!("expected key=value, found {trimmed:?}"))
        })?;
        let parse_count = |slot: &mut Option<usize>| -> Result<(), TraceIoError> {
            if slot.is_some() {
                return Err(TraceIoError::format(
                    path,
                    line,
                    format!("duplicate key {key:?}"),
                ));
            }
            *slot = Some(value.parse().map_err(|_| {
                TraceIoError::format(path, line, format!("unparseable count {value:?}"))
            })?);
            Ok(())
        };
        match key {
            "m" => parse_count(&mut m)?,
            "mu" => parse_count(&mut mu)?,
            "lambda" => parse_count(&mut lambda)?,
            "t_max" => parse_count(&mut t_max)?,
            "problem" => problem = Some(value.to_string()),
            "algorithm" => algorithm = Some(value.to_string()),
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|_| {
                    TraceIoError::format(path, line, format!("unparseable seed {value:?}"))
                })?)
            }
            "encoding" => {
                encoding = Some(
                    value
                        .parse::<Encoding>()
                        .map_err(|e| TraceIoError::format(path, line, e.to_string()))?,
                )
            }
            other => {
                return Err(TraceIoError::format(
                    path,
                    line,
                    format!("unknown key {other:?}"),
                ))
            }
        }
    }
    let require = |name: &str, present: bool| -> Result<(), TraceIoError> {
        if present {
            Ok(())
        } else {
            Err(TraceIoError::format(
                path,
                0,
                format!("missing key {name:?}"),
            ))
        }
    };
    require("m", m.is_some())?;
    require("mu", mu.is_some())?;
    require("lambda", lambda.is_some())?;
    require("t_max", t_max.is_some())?;
    require("problem", problem.is_some())?;
    require("algorithm", algorithm.is_some())?;
    require("seed", seed.is_some())?;
    require("encoding", encoding.is_some())?;
    let meta = RunMeta {
        m: m.unwrap(),
        mu: mu.unwrap(),
        lambda: lambda.unwrap(),
        t_max: t_max.unwrap(),
        problem_id: problem.unwrap(),
        algorithm_id: algorithm.unwrap(),
        seed: seed.unwrap(),
        encoding: encoding.unwrap(),
    };
    meta.validate()
        .map_err(|e| TraceIoError::format(path, 0, e.to_string()))?;
    Ok(meta)
}

/// Writes the naive representation: `fP_1.csv` through `fP_tmax.csv`, each
/// holding one iteration's full population. Returns the paths in iteration
/// order.
pub fn write_naive(trace: &RunTrace, dir: &Path) -> Result<Vec<PathBuf>, TraceIoError> {
    fs::create_dir_all(dir).map_err(|e| TraceIoError::io(dir, e))?;
    let mode = trace.meta().encoding;
    let mut paths = Vec::with_capacity(trace.meta().t_max);
    for t in 1..=trace.meta().t_max {
        let snapshot = trace.snapshot(t)?;
        let mut content = String::new();
        for member in snapshot.members() {
            content.push_str(&format_vector(member, mode));
            content.push('\n');
        }
        let path = dir.join(format!("fP_{t}.csv"));
        write_file(&path, &content)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads one naive per-iteration file.
pub fn read_naive_snapshot(
    path: &Path,
    iteration: usize,
    mode: Encoding,
) -> Result<PopulationSnapshot, TraceIoError> {
    let text = fs::read_to_string(path).map_err(|e| TraceIoError::io(path, e))?;
    let mut members = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut values = Vec::new();
        for field in raw.split(',') {
            let v =
                decode_real(field, mode).map_err(|msg| TraceIoError::format(path, line, msg))?;
            values.push(v);
        }
        members.push(
            ObjectiveVector::new(values)
                .map_err(|e| TraceIoError::format(path, line, e.to_string()))?,
        );
    }
    PopulationSnapshot::new(iteration, members)
        .map_err(|e| TraceIoError::format(path, 0, e.to_string()))
}
