//! Online stopping criteria behind one observer interface.
//!
//! A criterion consumes population snapshots in strictly increasing
//! iteration order and reports, after each snapshot, whether it would have
//! stopped the search. Decisions depend only on the snapshots seen so far,
//! so replaying a stored trace reproduces a live run exactly. Once a
//! criterion stops it stays stopped; later snapshots return the latched
//! decision.
//!
//! Criteria expect objectives normalized into `[0, 1]^m` (the replay driver
//! applies the problem's ideal/nadir bounds). Passing raw objectives is
//! allowed for black-box use; grid- and reference-point-based criteria then
//! interpret the raw scale directly.

use thiserror::Error;

use crate::error::CoreError;
use crate::indicators::IndicatorError;
use crate::objective::NormalizationBounds;
use crate::trace::{PopulationSnapshot, RunMeta, RunTrace};

mod eps_progress;
mod esc;
mod isc;
mod mgbm;
mod ocd;

pub use eps_progress::{eps_box_dominates, EpsBoxArchive, EpsParams, EpsProgress};
pub use esc::{cell_distribution, jensen_shannon, Esc, EscMode, EscParams};
pub use isc::{Isc, IscParams};
pub use mgbm::{mdr, KalmanFilter, Mgbm, MgbmParams};
pub use ocd::{significant_trend, variance_below_limit, Ocd, OcdIndicator, OcdParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriterionError {
    #[error("snapshots must arrive in order: expected iteration {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },

    #[error("population must be nonempty")]
    EmptyPopulation,

    #[error("invalid criterion parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Indicator(#[from] IndicatorError),
}

/// A criterion's verdict after an iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopDecision {
    pub stopped: bool,
    pub stop_iteration: Option<usize>,
    pub fe_stop: Option<u64>,
}

impl StopDecision {
    pub fn not_stopped() -> Self {
        Self {
            stopped: false,
            stop_iteration: None,
            fe_stop: None,
        }
    }

    pub fn stopped_at(iteration: usize, fe_stop: u64) -> Self {
        Self {
            stopped: true,
            stop_iteration: Some(iteration),
            fe_stop: Some(fe_stop),
        }
    }
}

/// Single-stream observer over one run's snapshots.
pub trait StoppingCriterion: Send {
    fn name(&self) -> &str;

    /// Feeds the next snapshot; snapshots must arrive as t = 1, 2, 3, ...
    fn observe(&mut self, snapshot: &PopulationSnapshot) -> Result<StopDecision, CriterionError>;
}

/// Shared sequencing, latching, and evaluation-count accounting.
#[derive(Debug, Clone)]
pub(crate) struct Sequencer {
    mu: u64,
    lambda: u64,
    expected_t: usize,
    latched: Option<StopDecision>,
}

pub(crate) enum Admit {
    /// Already stopped earlier; return the latched decision unchanged.
    Latched(StopDecision),
    Proceed,
}

impl Sequencer {
    pub(crate) fn new(meta: &RunMeta) -> Self {
        Self {
            mu: meta.mu as u64,
            lambda: meta.lambda as u64,
            expected_t: 1,
            latched: None,
        }
    }

    pub(crate) fn admit(&mut self, snapshot: &PopulationSnapshot) -> Result<Admit, CriterionError> {
        if let Some(decision) = &self.latched {
            return Ok(Admit::Latched(decision.clone()));
        }
        if snapshot.iteration() != self.expected_t {
            return Err(CriterionError::OutOfOrder {
                expected: self.expected_t,
                got: snapshot.iteration(),
            });
        }
        self.expected_t += 1;
        Ok(Admit::Proceed)
    }

    pub(crate) fn conclude(&mut self, t: usize, stop: bool) -> StopDecision {
        if stop {
            let fe = self.mu + self.lambda * (t as u64 - 1);
            let decision = StopDecision::stopped_at(t, fe);
            self.latched = Some(decision.clone());
            decision
        } else {
            StopDecision::not_stopped()
        }
    }
}

/// Configuration of one criterion instance, buildable per run.
#[derive(Debug, Clone, PartialEq)]
pub enum CriterionConfig {
    Ocd(OcdParams),
    Mgbm(MgbmParams),
    Esc(EscParams),
    EpsProgress(EpsParams),
    Isc(IscParams),
}

impl CriterionConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            CriterionConfig::Ocd(_) => "ocd",
            CriterionConfig::Mgbm(_) => "mgbm",
            CriterionConfig::Esc(_) => "esc",
            CriterionConfig::EpsProgress(_) => "epssc",
            CriterionConfig::Isc(_) => "isc",
        }
    }

    /// Instantiates the criterion for one run.
    pub fn build(&self, meta: &RunMeta) -> Result<Box<dyn StoppingCriterion>, CriterionError> {
        Ok(match self {
            CriterionConfig::Ocd(params) => Box::new(Ocd::new(params.clone(), meta)?),
            CriterionConfig::Mgbm(params) => Box::new(Mgbm::new(params.clone(), meta)?),
            CriterionConfig::Esc(params) => Box::new(Esc::new(params.clone(), meta)?),
            CriterionConfig::EpsProgress(params) => {
                Box::new(EpsProgress::new(params.clone(), meta)?)
            }
            CriterionConfig::Isc(params) => Box::new(Isc::new(params.clone(), meta)?),
        })
    }

    /// The five criteria with their default parameters.
    pub fn default_suite() -> Vec<CriterionConfig> {
        vec![
            CriterionConfig::Ocd(OcdParams::default()),
            CriterionConfig::Mgbm(MgbmParams::default()),
            CriterionConfig::Esc(EscParams::default()),
            CriterionConfig::EpsProgress(EpsParams::default()),
            CriterionConfig::Isc(IscParams::default()),
        ]
    }
}

/// Replays a stored trace through one criterion: snapshots are reconstructed
/// in iteration order, normalized when bounds are given, and fed to the
/// observer until it stops or the trace ends. The trace is never modified.
pub fn replay_trace(
    trace: &RunTrace,
    bounds: Option<&NormalizationBounds>,
    criterion: &mut dyn StoppingCriterion,
) -> Result<StopDecision, CriterionError> {
    let mut last = StopDecision::not_stopped();
    for t in 1..=trace.meta().t_max {
        let snapshot = trace.snapshot(t)?;
        let snapshot = match bounds {
            Some(b) => snapshot.normalized(b)?,
            None => snapshot,
        };
        last = criterion.observe(&snapshot)?;
        if last.stopped {
            return Ok(last);
        }
    }
    Ok(last)
}
