//! Indicator-based stopping criterion: stop once the best-so-far
//! hypervolume goes unimproved for a fixed number of consecutive iterations.

use crate::indicators::{hypervolume, HvConfig};
use crate::trace::{PopulationSnapshot, RunMeta};

use super::{Admit, CriterionError, Sequencer, StopDecision, StoppingCriterion};

#[derive(Debug, Clone, PartialEq)]
pub struct IscParams {
    /// Consecutive iterations without a best-so-far update before stopping.
    pub patience: usize,
}

impl Default for IscParams {
    fn default() -> Self {
        Self { patience: 50 }
    }
}

pub struct Isc {
    params: IscParams,
    seq: Sequencer,
    hv_cfg: HvConfig,
    best: f64,
    stagnant: usize,
}

impl Isc {
    pub fn new(params: IscParams, meta: &RunMeta) -> Result<Self, CriterionError> {
        if params.patience < 1 {
            return Err(CriterionError::InvalidParams(
                "isc patience must be >= 1".into(),
            ));
        }
        Ok(Self {
            params,
            seq: Sequencer::new(meta),
            hv_cfg: HvConfig::normalized(meta.m),
            best: f64::NEG_INFINITY,
            stagnant: 0,
        })
    }
}

impl StoppingCriterion for Isc {
    fn name(&self) -> &str {
        "isc"
    }

    fn observe(&mut self, snapshot: &PopulationSnapshot) -> Result<StopDecision, CriterionError> {
        if let Admit::Latched(decision) = self.seq.admit(snapshot)? {
            return Ok(decision);
        }
        let t = snapshot.iteration();
        let hv = hypervolume(snapshot.members(), &self.hv_cfg)?;
        if hv > self.best {
            self.best = hv;
            self.stagnant = 0;
        } else {
            self.stagnant += 1;
        }
        let stop = self.stagnant >= self.params.patience;
        Ok(self.seq.conclude(t, stop))
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{meta, snapshot};
    use super::*;

    /// Constant populations give a constant hypervolume, so the criterion
    /// fires after exactly `patience` non-updates.
    #[test]
    fn fires_after_patience_non_updates() {
        let m = meta(2, 1, 10);
        let mut isc = Isc::new(IscParams { patience: 3 }, &m).unwrap();
        let members = [[0.5, 0.5], [0.3, 0.7]];
        for t in 1..=3 {
            assert!(!isc.observe(&snapshot(t, &members)).unwrap().stopped);
        }
        let d = isc.observe(&snapshot(4, &members)).unwrap();
        assert!(d.stopped);
        assert_eq!(d.stop_iteration, Some(4));
    }

    #[test]
    fn improvement_resets_the_counter() {
        let m = meta(2, 1, 10);
        let mut isc = Isc::new(IscParams { patience: 2 }, &m).unwrap();
        assert!(
            !isc.observe(&snapshot(1, &[[0.9, 0.9], [0.8, 0.8]]))
                .unwrap()
                .stopped
        );
        assert!(
            !isc.observe(&snapshot(2, &[[0.9, 0.9], [0.8, 0.8]]))
                .unwrap()
                .stopped
        );
        // An improved population rescues the run at the brink.
        assert!(
            !isc.observe(&snapshot(3, &[[0.5, 0.5], [0.8, 0.8]]))
                .unwrap()
                .stopped
        );
        assert!(
            !isc.observe(&snapshot(4, &[[0.5, 0.5], [0.8, 0.8]]))
                .unwrap()
                .stopped
        );
        let d = isc
            .observe(&snapshot(5, &[[0.5, 0.5], [0.8, 0.8]]))
            .unwrap();
        assert!(d.stopped);
    }

    #[test]
    fn never_fires_when_always_improving() {
        let m = meta(2, 1, 40);
        let mut isc = Isc::new(IscParams { patience: 2 }, &m).unwrap();
        for t in 1..=40usize {
            let v = 0.9 - 0.02 * t as f64;
            let d = isc
                .observe(&snapshot(t, &[[v, v], [v + 0.01, v - 0.01]]))
                .unwrap();
            assert!(!d.stopped);
        }
    }
}
