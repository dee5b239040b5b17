//! Scoring of stopping criteria: the distance between the evaluation count
//! where a criterion stopped and the run's empirically optimal stopping
//! point, normalized by the evaluation budget, with early stops penalized.
//! Also provides Friedman-style average ranks for cross-problem comparison.

use thiserror::Error;

use crate::error::CoreError;
use crate::indicators::IndicatorSeries;
use crate::trace::RunMeta;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseError {
    #[error("invalid score parameters: {0}")]
    InvalidParams(String),

    #[error("invalid score input: {0}")]
    InvalidInput(String),

    #[error("best-so-far series decreases at iteration {t}")]
    DecreasingSeries { t: usize },

    #[error("series has {found} values, expected t_max = {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("rank table must be rectangular and nonempty (row {row})")]
    RaggedTable { row: usize },

    #[error("rank table has a missing value at row {row}, column {col}")]
    MissingCell { row: usize, col: usize },

    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Score parameters: the early-stop penalty factor, the best-so-far update
/// range, and the run's evaluation budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseParams {
    pub alpha: f64,
    pub delta: f64,
    pub fe_max: u64,
}

impl PoseParams {
    pub fn new(alpha: f64, delta: f64, fe_max: u64) -> Result<Self, PoseError> {
        let params = Self {
            alpha,
            delta,
            fe_max,
        };
        params.validate()?;
        Ok(params)
    }

    /// The recommended base case: `alpha = 2`, `delta = 0`.
    pub fn recommended(fe_max: u64) -> Self {
        Self {
            alpha: 2.0,
            delta: 0.0,
            fe_max,
        }
    }

    pub fn validate(&self) -> Result<(), PoseError> {
        if self.alpha.is_nan() || self.alpha < 1.0 {
            return Err(PoseError::InvalidParams(format!(
                "alpha = {} (must be >= 1)",
                self.alpha
            )));
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(PoseError::InvalidParams(format!(
                "delta = {} (must be >= 0)",
                self.delta
            )));
        }
        if self.fe_max == 0 {
            return Err(PoseError::InvalidParams("fe_max must be positive".into()));
        }
        Ok(())
    }
}

/// One scored run.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseResult {
    pub fe_star: u64,
    pub fe_stop: u64,
    pub value: f64,
    pub params: PoseParams,
}

/// The optimal stopping point of a run: the evaluation count at the last
/// iteration whose best-so-far value improved by more than `delta`. When no
/// iteration after the first improves that much, the initial population
/// (`mu` evaluations) is the last update.
pub fn fe_star(bhv: &IndicatorSeries, meta: &RunMeta, delta: f64) -> Result<u64, PoseError> {
    if delta.is_nan() || delta < 0.0 {
        return Err(PoseError::InvalidParams(format!(
            "delta = {delta} (must be >= 0)"
        )));
    }
    if bhv.len() != meta.t_max {
        return Err(PoseError::LengthMismatch {
            expected: meta.t_max,
            found: bhv.len(),
        });
    }
    let mut last_update = None;
    for t in 2..=bhv.len() {
        let step = bhv.get(t) - bhv.get(t - 1);
        if step < 0.0 {
            return Err(PoseError::DecreasingSeries { t });
        }
        if step > delta {
            last_update = Some(t);
        }
    }
    match last_update {
        Some(t) => Ok(meta.fe_of_iteration(t)?),
        None => Ok(meta.mu as u64),
    }
}

/// The score itself: `|fe_star - fe_stop| / fe_max`, multiplied by `alpha`
/// when the stop came early. Zero exactly when the criterion stopped at the
/// optimal point.
pub fn pose(fe_star: u64, fe_stop: u64, params: &PoseParams) -> Result<f64, PoseError> {
    params.validate()?;
    if fe_stop == 0 || fe_stop > params.fe_max {
        return Err(PoseError::InvalidInput(format!(
            "fe_stop = {fe_stop} outside (0, {}]",
            params.fe_max
        )));
    }
    if fe_star == 0 || fe_star > params.fe_max {
        return Err(PoseError::InvalidInput(format!(
            "fe_star = {fe_star} outside (0, {}]",
            params.fe_max
        )));
    }
    let distance = fe_star.abs_diff(fe_stop) as f64 / params.fe_max as f64;
    Ok(if fe_stop >= fe_star {
        distance
    } else {
        params.alpha * distance
    })
}

/// Scores one run end to end.
pub fn score(
    bhv: &IndicatorSeries,
    meta: &RunMeta,
    fe_stop: u64,
    params: &PoseParams,
) -> Result<PoseResult, PoseError> {
    let star = fe_star(bhv, meta, params.delta)?;
    let value = pose(star, fe_stop, params)?;
    Ok(PoseResult {
        fe_star: star,
        fe_stop,
        value,
        params: params.clone(),
    })
}

/// Ascending ranks of one score column (rank 1 is best); tied values share
/// the mean of their ranks.
pub fn rank_column(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i+1 ..= j+1 are tied; everyone gets their mean.
        let mean_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &row in &order[i..=j] {
            ranks[row] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Friedman-style mean ranks. `table[criterion][problem]` holds average
/// scores; each problem column ranks the criteria ascending (rank 1 is
/// best) with ties sharing the mean of their ranks. Returns each
/// criterion's mean rank across problems.
pub fn average_ranks(table: &[Vec<f64>]) -> Result<Vec<f64>, PoseError> {
    if table.is_empty() || table[0].is_empty() {
        return Err(PoseError::RaggedTable { row: 0 });
    }
    let columns = table[0].len();
    for (row, values) in table.iter().enumerate() {
        if values.len() != columns {
            return Err(PoseError::RaggedTable { row });
        }
        for (col, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(PoseError::MissingCell { row, col });
            }
        }
    }
    let criteria = table.len();
    let mut rank_sums = vec![0.0; criteria];
    for col in 0..columns {
        let column: Vec<f64> = table.iter().map(|row| row[col]).collect();
        for (row, rank) in rank_column(&column).into_iter().enumerate() {
            rank_sums[row] += rank;
        }
    }
    Ok(rank_sums
        .into_iter()
        .map(|sum| sum / columns as f64)
        .collect())
}
