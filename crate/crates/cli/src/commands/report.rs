//! `report`: Friedman-style rank tables over the evaluated results, with
//! optional penalty-factor and update-range sweeps, plus marker files for
//! external plotting. All inputs must share one (alpha, delta) setting;
//! scores under different settings are not comparable and mixing them is
//! refused.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use posebench::pose::rank_column;

use crate::config::ExperimentConfig;
use crate::error::CliError;

use super::{fmt_f64, read_table, write_table};

#[derive(Debug)]
pub struct ReportPaths {
    pub rankings: Vec<PathBuf>,
    pub markers: PathBuf,
}

struct ResultRow {
    archive: String,
    dataset: String,
    criterion: String,
    fe_star: u64,
    fe_stop: u64,
    fe_max: u64,
    pose: f64,
}

fn parse_results(path: &Path) -> Result<(Vec<ResultRow>, String, String), CliError> {
    let (header, rows) = read_table(path)?;
    let expected =
        "archive,problem,m,algorithm,seed,criterion,alpha,delta,fe_star,fe_stop,fe_max,stopped,pose";
    if header.join(",") != expected {
        return Err(CliError::data(format!(
            "{}: unexpected results header {:?}",
            path.display(),
            header.join(",")
        )));
    }
    if rows.is_empty() {
        return Err(CliError::data(format!(
            "{}: no result rows",
            path.display()
        )));
    }
    let alpha = rows[0][6].clone();
    let delta = rows[0][7].clone();
    let mut parsed = Vec::with_capacity(rows.len());
    for fields in rows {
        if fields[6] != alpha || fields[7] != delta {
            return Err(CliError::config(format!(
                "results mix score parameters (alpha {} vs {}, delta {} vs {}); \
                 rankings are only meaningful for one setting at a time",
                alpha, fields[6], delta, fields[7]
            )));
        }
        let parse_u64 = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| CliError::data(format!("bad count {s:?} in results")))
        };
        let pose = fields[12]
            .parse::<f64>()
            .map_err(|_| CliError::data(format!("bad score {:?} in results", fields[12])))?;
        parsed.push(ResultRow {
            archive: fields[0].clone(),
            dataset: format!("{}_m{}_{}", fields[1], fields[2], fields[3]),
            criterion: fields[5].clone(),
            fe_star: parse_u64(&fields[8])?,
            fe_stop: parse_u64(&fields[9])?,
            fe_max: parse_u64(&fields[10])?,
            pose,
        });
    }
    Ok((parsed, alpha, delta))
}

/// Builds one rank table: per dataset column, criteria are ranked by their
/// mean score; the final column is the mean rank across datasets.
fn rank_rows(
    rows: &[ResultRow],
    score_of: impl Fn(&ResultRow) -> f64,
) -> Result<(String, Vec<String>), CliError> {
    let mut datasets: Vec<String> = rows.iter().map(|r| r.dataset.clone()).collect();
    datasets.sort();
    datasets.dedup();
    let mut criteria: Vec<String> = rows.iter().map(|r| r.criterion.clone()).collect();
    criteria.sort();
    criteria.dedup();

    let mut sums: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for row in rows {
        let c = criteria
            .binary_search(&row.criterion)
            .expect("criterion listed");
        let d = datasets
            .binary_search(&row.dataset)
            .expect("dataset listed");
        let entry = sums.entry((c, d)).or_insert((0.0, 0));
        entry.0 += score_of(row);
        entry.1 += 1;
    }

    let mut ranks_by_column = Vec::with_capacity(datasets.len());
    for (d, dataset) in datasets.iter().enumerate() {
        let mut column = Vec::with_capacity(criteria.len());
        for (c, criterion) in criteria.iter().enumerate() {
            let (sum, count) = sums.get(&(c, d)).ok_or_else(|| {
                CliError::data(format!("no results for criterion {criterion} on {dataset}"))
            })?;
            column.push(sum / *count as f64);
        }
        ranks_by_column.push(rank_column(&column));
    }

    let header = format!("criterion,{},mean_rank", datasets.join(","));
    let mut out_rows = Vec::with_capacity(criteria.len());
    for (c, criterion) in criteria.iter().enumerate() {
        let ranks: Vec<f64> = ranks_by_column.iter().map(|col| col[c]).collect();
        let mean = ranks.iter().sum::<f64>() / ranks.len() as f64;
        let cells: Vec<String> = ranks.iter().copied().map(fmt_f64).collect();
        out_rows.push(format!("{criterion},{},{}", cells.join(","), fmt_f64(mean)));
    }
    Ok((header, out_rows))
}

/// Best-so-far series of one archive as (fe, value) pairs.
fn load_bhv(bhv_dir: &Path, archive: &str) -> Result<Vec<(u64, f64)>, CliError> {
    let path = bhv_dir.join(format!("{archive}.csv"));
    let (header, rows) = read_table(&path)?;
    if header.join(",") != "t,fe,bhv" {
        return Err(CliError::data(format!(
            "{}: unexpected series header {:?}",
            path.display(),
            header.join(",")
        )));
    }
    rows.into_iter()
        .map(|fields| {
            let fe = fields[1]
                .parse::<u64>()
                .map_err(|_| CliError::data(format!("bad fe {:?} in series", fields[1])))?;
            let value = fields[2]
                .parse::<f64>()
                .map_err(|_| CliError::data(format!("bad value {:?} in series", fields[2])))?;
            Ok((fe, value))
        })
        .collect()
}

fn fe_star_for_delta(series: &[(u64, f64)], delta: f64) -> u64 {
    let mut fe_star = series.first().map(|(fe, _)| *fe).unwrap_or(0);
    for pair in series.windows(2) {
        if pair[1].1 - pair[0].1 > delta {
            fe_star = pair[1].0;
        }
    }
    fe_star
}

pub fn report(
    config: &ExperimentConfig,
    alphas: Option<&[f64]>,
    deltas: Option<&[f64]>,
) -> Result<ReportPaths, CliError> {
    let results_path = config.output_dir.join("results.csv");
    let (rows, alpha_text, _delta_text) = parse_results(&results_path)?;
    let base_alpha: f64 = alpha_text
        .parse()
        .map_err(|_| CliError::data(format!("bad alpha {alpha_text:?} in results")))?;
    let provenance = config.provenance();
    let mut rankings = Vec::new();

    let (header, table) = rank_rows(&rows, |row| row.pose)?;
    let base_path = config.output_dir.join("rankings.csv");
    write_table(&base_path, &provenance, &header, &table)?;
    rankings.push(base_path);

    if let Some(alphas) = alphas {
        for &alpha in alphas {
            if alpha.is_nan() || alpha < 1.0 {
                return Err(CliError::config(format!("alpha = {alpha} (must be >= 1)")));
            }
            let (header, table) = rank_rows(&rows, |row| {
                let distance = row.fe_star.abs_diff(row.fe_stop) as f64 / row.fe_max as f64;
                if row.fe_stop >= row.fe_star {
                    distance
                } else {
                    alpha * distance
                }
            })?;
            let path = config
                .output_dir
                .join(format!("rankings_alpha_{}.csv", fmt_f64(alpha)));
            write_table(&path, &provenance, &header, &table)?;
            rankings.push(path);
        }
    }

    if let Some(deltas) = deltas {
        // Re-derive the optimal stopping point per archive from the stored
        // best-so-far series, then rescore with the base penalty factor.
        let bhv_dir = config.output_dir.join("bhv");
        let mut archives: Vec<String> = rows.iter().map(|r| r.archive.clone()).collect();
        archives.sort();
        archives.dedup();
        let mut series = BTreeMap::new();
        for archive in &archives {
            series.insert(archive.clone(), load_bhv(&bhv_dir, archive)?);
        }
        for &delta in deltas {
            if delta.is_nan() || delta < 0.0 {
                return Err(CliError::config(format!("delta = {delta} (must be >= 0)")));
            }
            let stars: BTreeMap<&String, u64> = series
                .iter()
                .map(|(archive, series)| (archive, fe_star_for_delta(series, delta)))
                .collect();
            let (header, table) = rank_rows(&rows, |row| {
                let fe_star = stars[&row.archive];
                let distance = fe_star.abs_diff(row.fe_stop) as f64 / row.fe_max as f64;
                if row.fe_stop >= fe_star {
                    distance
                } else {
                    base_alpha * distance
                }
            })?;
            let path = config
                .output_dir
                .join(format!("rankings_delta_{}.csv", fmt_f64(delta)));
            write_table(&path, &provenance, &header, &table)?;
            rankings.push(path);
        }
    }

    // Markers for external plotting next to the stored (fe, bhv) series.
    let mut marker_rows: Vec<String> = rows
        .iter()
        .map(|row| {
            format!(
                "{},{},{},{}",
                row.archive, row.criterion, row.fe_star, row.fe_stop
            )
        })
        .collect();
    marker_rows.sort();
    let markers = config.output_dir.join("plotdata").join("markers.csv");
    write_table(
        &markers,
        &provenance,
        "archive,criterion,fe_star,fe_stop",
        &marker_rows,
    )?;

    Ok(ReportPaths { rankings, markers })
}
