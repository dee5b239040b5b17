//! Epsilon-progress stopping criterion: an archive maintained under
//! epsilon-box dominance counts insertions into previously unoccupied boxes;
//! the search stops once the counter stalls for a run of iterations.

use crate::objective::ObjectiveVector;
use crate::trace::{PopulationSnapshot, RunMeta};

use super::{Admit, CriterionError, Sequencer, StopDecision, StoppingCriterion};

#[derive(Debug, Clone, PartialEq)]
pub struct EpsParams {
    /// Box side length in (normalized) objective space.
    pub epsilon: f64,
    /// Consecutive iterations without progress before stopping.
    pub patience: usize,
}

impl Default for EpsParams {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            patience: 50,
        }
    }
}

impl EpsParams {
    fn validate(&self) -> Result<(), CriterionError> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(CriterionError::InvalidParams("epsilon must be > 0".into()));
        }
        if self.patience < 1 {
            return Err(CriterionError::InvalidParams(
                "epssc patience must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn box_index(point: &[f64], epsilon: f64) -> Vec<i64> {
    point
        .iter()
        .map(|&v| (v / epsilon).floor() as i64)
        .collect()
}

fn corner_distance(point: &[f64], index: &[i64], epsilon: f64) -> f64 {
    point
        .iter()
        .zip(index)
        .map(|(&v, &i)| {
            let d = v - i as f64 * epsilon;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Epsilon-box dominance: `u` beats `v` if its box Pareto-dominates `v`'s
/// box, or both share a box and `u` lies strictly closer to the box corner.
pub fn eps_box_dominates(u: &ObjectiveVector, v: &ObjectiveVector, epsilon: f64) -> bool {
    let bu = box_index(u.values(), epsilon);
    let bv = box_index(v.values(), epsilon);
    if bu == bv {
        return corner_distance(u.values(), &bu, epsilon)
            < corner_distance(v.values(), &bv, epsilon);
    }
    let mut strict = false;
    for (a, b) in bu.iter().zip(&bv) {
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

/// A non-dominated archive under epsilon-box dominance.
#[derive(Debug, Clone)]
pub struct EpsBoxArchive {
    epsilon: f64,
    entries: Vec<ObjectiveVector>,
    boxes: Vec<Vec<i64>>,
}

impl EpsBoxArchive {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            entries: Vec::new(),
            boxes: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[ObjectiveVector] {
        &self.entries
    }

    /// Offers a point to the archive. Dominated offers are rejected;
    /// accepted points evict every entry they dominate. Returns true when
    /// the point was accepted into a box no current entry occupied, which
    /// is what counts as epsilon-progress.
    pub fn offer(&mut self, point: &ObjectiveVector) -> bool {
        // A value already archived is not a new solution; re-offers happen
        // constantly when whole populations are replayed.
        if self.entries.contains(point) {
            return false;
        }
        if self
            .entries
            .iter()
            .any(|entry| eps_box_dominates(entry, point, self.epsilon))
        {
            return false;
        }
        let incoming = box_index(point.values(), self.epsilon);
        let box_occupied = self.boxes.contains(&incoming);
        let mut i = 0;
        while i < self.entries.len() {
            if eps_box_dominates(point, &self.entries[i], self.epsilon) {
                self.entries.swap_remove(i);
                self.boxes.swap_remove(i);
            } else {
                i += 1;
            }
        }
        self.entries.push(point.clone());
        self.boxes.push(incoming);
        !box_occupied
    }
}

pub struct EpsProgress {
    params: EpsParams,
    seq: Sequencer,
    archive: EpsBoxArchive,
    progress: u64,
    stalled: usize,
}

impl EpsProgress {
    pub fn new(params: EpsParams, meta: &RunMeta) -> Result<Self, CriterionError> {
        params.validate()?;
        let archive = EpsBoxArchive::new(params.epsilon);
        Ok(Self {
            params,
            seq: Sequencer::new(meta),
            archive,
            progress: 0,
            stalled: 0,
        })
    }
}

impl StoppingCriterion for EpsProgress {
    fn name(&self) -> &str {
        "epssc"
    }

    fn observe(&mut self, snapshot: &PopulationSnapshot) -> Result<StopDecision, CriterionError> {
        if let Admit::Latched(decision) = self.seq.admit(snapshot)? {
            return Ok(decision);
        }
        let t = snapshot.iteration();
        let before = self.progress;
        // Offer the whole population: members already archived (or beaten)
        // at an earlier iteration can never count as fresh progress again.
        for member in snapshot.members() {
            if self.archive.offer(member) {
                self.progress += 1;
            }
        }
        if self.progress == before {
            self.stalled += 1;
        } else {
            self.stalled = 0;
        }
        let stop = self.stalled >= self.params.patience;
        Ok(self.seq.conclude(t, stop))
    }
}
