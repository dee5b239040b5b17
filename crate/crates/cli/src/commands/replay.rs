//! `replay`: feed stored traces to every configured criterion and record
//! the stop decisions. Archives are read-only throughout.

use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use posebench::criteria::replay_trace;
use posebench::problems::{ProblemId, ProblemSpec};
use posebench::traceio::{read_compact, TraceArchive};
use posebench::NormalizationBounds;

use crate::config::ExperimentConfig;
use crate::error::CliError;

use super::{discover_archives, with_pool, write_table};

pub(crate) fn bounds_for(
    meta: &posebench::RunMeta,
    normalize: bool,
) -> Result<Option<NormalizationBounds>, CliError> {
    if !normalize {
        return Ok(None);
    }
    let id = ProblemId::from_str(&meta.problem_id).map_err(|_| {
        CliError::data(format!(
            "archive problem {:?} is unknown; set experiment.normalize = false to replay raw traces",
            meta.problem_id
        ))
    })?;
    let spec =
        ProblemSpec::with_default_n(id, meta.m).map_err(|e| CliError::data(e.to_string()))?;
    let bounds = spec
        .reference_bounds()
        .map_err(|e| CliError::data(e.to_string()))?;
    Ok(Some(bounds))
}

pub fn replay(config: &ExperimentConfig, jobs: Option<usize>) -> Result<PathBuf, CliError> {
    let archives = discover_archives(&config.archives_dir())?;

    let mut rows: Vec<String> = with_pool(jobs, || {
        archives
            .par_iter()
            .map(|(name, dir)| {
                let trace = read_compact(&TraceArchive::in_dir(dir))?;
                let meta = trace.meta();
                let bounds = bounds_for(meta, config.normalize)?;
                let mut rows = Vec::with_capacity(config.criteria.len());
                for (label, criterion_config) in &config.criteria {
                    let mut criterion = criterion_config.build(meta)?;
                    let decision = replay_trace(&trace, bounds.as_ref(), criterion.as_mut())?;
                    let (stop_iteration, fe_stop) = match decision.stopped {
                        true => (
                            decision.stop_iteration.unwrap_or_default().to_string(),
                            decision.fe_stop.unwrap_or_default().to_string(),
                        ),
                        false => (String::new(), String::new()),
                    };
                    rows.push(format!(
                        "{name},{},{},{},{},{label},{},{stop_iteration},{fe_stop}",
                        meta.problem_id, meta.m, meta.algorithm_id, meta.seed, decision.stopped,
                    ));
                }
                Ok(rows)
            })
            .collect::<Result<Vec<Vec<String>>, CliError>>()
            .map(|nested| nested.into_iter().flatten().collect())
    })?;
    rows.sort();

    let decisions_path = config.output_dir.join("decisions.csv");
    write_table(
        &decisions_path,
        &config.provenance(),
        "archive,problem,m,algorithm,seed,criterion,stopped,stop_iteration,fe_stop",
        &rows,
    )?;
    Ok(decisions_path)
}
