//! MGBM: the mutual domination rate between consecutive populations,
//! smoothed by a scalar random-walk Kalman filter; stop when the posterior
//! estimate falls below a threshold.

use crate::objective::{slice_dominates, ObjectiveVector};
use crate::trace::{PopulationSnapshot, RunMeta};

use super::{Admit, CriterionError, Sequencer, StopDecision, StoppingCriterion};

#[derive(Debug, Clone, PartialEq)]
pub struct MgbmParams {
    /// Posterior threshold below which the search stops.
    pub i_min: f64,
    /// Measurement noise variance.
    pub r: f64,
    /// Process noise variance.
    pub q: f64,
    /// Initial state estimate.
    pub x0: f64,
    /// Initial estimate covariance.
    pub p0: f64,
}

impl Default for MgbmParams {
    fn default() -> Self {
        Self {
            i_min: 0.12,
            r: 0.1,
            q: 1e-5,
            x0: 1.0,
            p0: 1.0,
        }
    }
}

impl MgbmParams {
    fn validate(&self) -> Result<(), CriterionError> {
        if self.i_min < 0.0 {
            return Err(CriterionError::InvalidParams(
                "mgbm i_min must be >= 0".into(),
            ));
        }
        if self.r <= 0.0 {
            return Err(CriterionError::InvalidParams("mgbm r must be > 0".into()));
        }
        if self.q < 0.0 {
            return Err(CriterionError::InvalidParams("mgbm q must be >= 0".into()));
        }
        if self.p0 <= 0.0 {
            return Err(CriterionError::InvalidParams("mgbm p0 must be > 0".into()));
        }
        Ok(())
    }
}

/// Mutual domination rate between the previous and current population:
/// the fraction of the previous population dominated by the current one,
/// minus the reverse fraction. Lies in `[-1, 1]`; 0 for identical
/// populations, 1 when the new population fully supersedes the old.
pub fn mdr(prev: &[ObjectiveVector], cur: &[ObjectiveVector]) -> Result<f64, CriterionError> {
    if prev.is_empty() || cur.is_empty() {
        return Err(CriterionError::EmptyPopulation);
    }
    let m = prev[0].len();
    for p in prev.iter().chain(cur) {
        crate::objective::check_dims(m, p.len()).map_err(CriterionError::Core)?;
    }
    let dominated_count = |of: &[ObjectiveVector], by: &[ObjectiveVector]| {
        of.iter()
            .filter(|p| by.iter().any(|q| slice_dominates(q.values(), p.values())))
            .count() as f64
    };
    Ok(dominated_count(prev, cur) / prev.len() as f64
        - dominated_count(cur, prev) / cur.len() as f64)
}

/// Scalar random-walk Kalman filter.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanFilter {
    estimate: f64,
    variance: f64,
    r: f64,
    q: f64,
}

impl KalmanFilter {
    pub fn new(x0: f64, p0: f64, r: f64, q: f64) -> Self {
        Self {
            estimate: x0,
            variance: p0,
            r,
            q,
        }
    }

    /// Predict-update step for one measurement; returns the posterior
    /// estimate.
    pub fn update(&mut self, z: f64) -> f64 {
        let predicted = self.variance + self.q;
        let gain = predicted / (predicted + self.r);
        self.estimate += gain * (z - self.estimate);
        self.variance = (1.0 - gain) * predicted;
        self.estimate
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

pub struct Mgbm {
    params: MgbmParams,
    seq: Sequencer,
    filter: KalmanFilter,
    prev: Option<PopulationSnapshot>,
}

impl Mgbm {
    pub fn new(params: MgbmParams, meta: &RunMeta) -> Result<Self, CriterionError> {
        params.validate()?;
        let filter = KalmanFilter::new(params.x0, params.p0, params.r, params.q);
        Ok(Self {
            params,
            seq: Sequencer::new(meta),
            filter,
            prev: None,
        })
    }
}

impl StoppingCriterion for Mgbm {
    fn name(&self) -> &str {
        "mgbm"
    }

    fn observe(&mut self, snapshot: &PopulationSnapshot) -> Result<StopDecision, CriterionError> {
        if let Admit::Latched(decision) = self.seq.admit(snapshot)? {
            return Ok(decision);
        }
        let t = snapshot.iteration();
        let mut stop = false;
        if let Some(prev) = &self.prev {
            let z = mdr(prev.members(), snapshot.members())?;
            let posterior = self.filter.update(z);
            stop = posterior < self.params.i_min;
        }
        self.prev = Some(snapshot.clone());
        Ok(self.seq.conclude(t, stop))
    }
}
