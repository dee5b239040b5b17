//! `evaluate`: score every stop decision. For each archive the best-so-far
//! hypervolume series is computed once (and written out as plot data), the
//! optimal stopping point is extracted, and each criterion's decision is
//! scored. Criteria that never stopped are scored as if they had used the
//! whole budget.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;

use posebench::indicators::{best_so_far_hv, HvConfig, IndicatorSeries};
use posebench::pose::{fe_star, pose, PoseParams};
use posebench::traceio::{read_compact, TraceArchive};
use posebench::NormalizationBounds;

use crate::config::ExperimentConfig;
use crate::error::CliError;

use super::replay::bounds_for;
use super::{discover_archives, fmt_f64, read_table, with_pool, write_table};

#[derive(Debug)]
pub struct EvaluateReport {
    pub results_path: PathBuf,
    pub averages_path: PathBuf,
    pub bhv_dir: PathBuf,
    pub result_rows: usize,
    pub average_rows: usize,
}

struct ArchiveFacts {
    row_prefix: String,
    fe_star: u64,
    fe_max: u64,
}

struct Decision {
    archive: String,
    criterion: String,
    stopped: bool,
    fe_stop: Option<u64>,
}

fn parse_decisions(path: &std::path::Path) -> Result<Vec<Decision>, CliError> {
    let (header, rows) = read_table(path)?;
    let expected = "archive,problem,m,algorithm,seed,criterion,stopped,stop_iteration,fe_stop";
    if header.join(",") != expected {
        return Err(CliError::data(format!(
            "{}: unexpected decisions header {:?}",
            path.display(),
            header.join(",")
        )));
    }
    rows.into_iter()
        .map(|fields| {
            let stopped = fields[6].parse::<bool>().map_err(|_| {
                CliError::data(format!("bad stopped flag {:?} in decisions", fields[6]))
            })?;
            let fe_stop = if fields[8].is_empty() {
                None
            } else {
                Some(fields[8].parse::<u64>().map_err(|_| {
                    CliError::data(format!("bad fe_stop {:?} in decisions", fields[8]))
                })?)
            };
            if stopped && fe_stop.is_none() {
                return Err(CliError::data(format!(
                    "decision for {}/{} is stopped but has no fe_stop",
                    fields[0], fields[5]
                )));
            }
            Ok(Decision {
                archive: fields[0].clone(),
                criterion: fields[5].clone(),
                stopped,
                fe_stop,
            })
        })
        .collect()
}

pub fn evaluate(
    config: &ExperimentConfig,
    jobs: Option<usize>,
) -> Result<EvaluateReport, CliError> {
    let decisions_path = config.output_dir.join("decisions.csv");
    let decisions = parse_decisions(&decisions_path)?;
    let archives = discover_archives(&config.archives_dir())?;
    let bhv_dir = config.output_dir.join("bhv");

    // Every archive needs a decision from every configured criterion.
    for (name, _) in &archives {
        for (criterion, _) in &config.criteria {
            if !decisions
                .iter()
                .any(|d| &d.archive == name && &d.criterion == criterion)
            {
                return Err(CliError::data(format!(
                    "decisions do not cover archive {name} with criterion {criterion}; rerun replay"
                )));
            }
        }
    }

    let params_template = PoseParams::new(config.alpha, config.delta, 1)
        .map_err(|e| CliError::config(e.to_string()))?;

    let facts: BTreeMap<String, ArchiveFacts> = with_pool(jobs, || {
        archives
            .par_iter()
            .map(|(name, dir)| {
                let trace = read_compact(&TraceArchive::in_dir(dir))?;
                let meta = trace.meta();
                let bounds = bounds_for(meta, config.normalize)?
                    .unwrap_or_else(|| NormalizationBounds::unit(meta.m));
                let bhv = best_so_far_hv(&trace, &HvConfig::with_bounds(bounds))?;
                write_bhv_series(config, &bhv_dir, name, meta, &bhv)?;
                let star = fe_star(&bhv, meta, config.delta)?;
                let facts = ArchiveFacts {
                    row_prefix: format!(
                        "{name},{},{},{},{}",
                        meta.problem_id, meta.m, meta.algorithm_id, meta.seed
                    ),
                    fe_star: star,
                    fe_max: meta.fe_max(),
                };
                Ok((name.clone(), facts))
            })
            .collect::<Result<BTreeMap<_, _>, CliError>>()
    })?;

    let mut rows = Vec::with_capacity(decisions.len());
    let mut groups: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for decision in &decisions {
        let facts = facts.get(&decision.archive).ok_or_else(|| {
            CliError::data(format!(
                "decisions reference unknown archive {}",
                decision.archive
            ))
        })?;
        let fe_stop = decision.fe_stop.unwrap_or(facts.fe_max);
        let params = PoseParams {
            fe_max: facts.fe_max,
            ..params_template.clone()
        };
        let value = pose(facts.fe_star, fe_stop, &params)?;
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            facts.row_prefix,
            decision.criterion,
            fmt_f64(config.alpha),
            fmt_f64(config.delta),
            facts.fe_star,
            fe_stop,
            facts.fe_max,
            decision.stopped,
            fmt_f64(value),
        ));

        // Group key: problem, m, algorithm (the prefix without the seed)
        // plus the criterion.
        let mut parts = facts.row_prefix.split(',');
        let _archive = parts.next();
        let dataset: Vec<&str> = parts.collect();
        let group = format!(
            "{},{},{},{}",
            dataset[0], dataset[1], dataset[2], decision.criterion
        );
        let entry = groups.entry(group).or_insert((0.0, 0));
        entry.0 += value;
        entry.1 += 1;
    }
    rows.sort();

    let results_path = config.output_dir.join("results.csv");
    write_table(
        &results_path,
        &config.provenance(),
        "archive,problem,m,algorithm,seed,criterion,alpha,delta,fe_star,fe_stop,fe_max,stopped,pose",
        &rows,
    )?;

    let average_rows: Vec<String> = groups
        .iter()
        .map(|(group, (sum, count))| {
            format!(
                "{group},{},{},{count},{}",
                fmt_f64(config.alpha),
                fmt_f64(config.delta),
                fmt_f64(sum / *count as f64)
            )
        })
        .collect();
    let averages_path = config.output_dir.join("averages.csv");
    write_table(
        &averages_path,
        &config.provenance(),
        "problem,m,algorithm,criterion,alpha,delta,runs,mean_pose",
        &average_rows,
    )?;

    Ok(EvaluateReport {
        results_path,
        averages_path,
        bhv_dir,
        result_rows: rows.len(),
        average_rows: average_rows.len(),
    })
}

fn write_bhv_series(
    config: &ExperimentConfig,
    bhv_dir: &std::path::Path,
    name: &str,
    meta: &posebench::RunMeta,
    bhv: &IndicatorSeries,
) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(bhv.len());
    for t in 1..=bhv.len() {
        let fe = meta.fe_of_iteration(t)?;
        rows.push(format!("{t},{fe},{}", fmt_f64(bhv.get(t))));
    }
    write_table(
        &bhv_dir.join(format!("{name}.csv")),
        &config.provenance(),
        "t,fe,bhv",
        &rows,
    )
}
