//! Entropy-based stopping criterion: populations are histogrammed over a
//! grid of `cells_per_objective ^ m` cells, consecutive distributions are
//! compared by Jensen-Shannon divergence, and the search stops once the
//! dissimilarity stays unchanged (or, in threshold mode, stays negligible)
//! for a run of iterations.

use std::collections::HashMap;

use crate::objective::ObjectiveVector;
use crate::trace::{PopulationSnapshot, RunMeta};

use super::{Admit, CriterionError, Sequencer, StopDecision, StoppingCriterion};

/// How "the dissimilarity remains unchanged" is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EscMode {
    /// Successive divergences differ by at most `diss_tol`.
    #[default]
    Stability,
    /// The divergence itself stays at or below `diss_tol`.
    Threshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscParams {
    /// Cells per objective; the grid has `cells_per_objective ^ m` cells.
    pub cells_per_objective: usize,
    /// Consecutive stable iterations before stopping.
    pub patience: usize,
    /// Stability tolerance on the divergence.
    pub diss_tol: f64,
    pub mode: EscMode,
}

impl Default for EscParams {
    fn default() -> Self {
        Self {
            cells_per_objective: 10,
            patience: 30,
            diss_tol: 1e-6,
            mode: EscMode::Stability,
        }
    }
}

impl EscParams {
    fn validate(&self) -> Result<(), CriterionError> {
        if self.cells_per_objective < 2 {
            return Err(CriterionError::InvalidParams(
                "esc cells_per_objective must be >= 2".into(),
            ));
        }
        if self.patience < 1 {
            return Err(CriterionError::InvalidParams(
                "esc patience must be >= 1".into(),
            ));
        }
        if self.diss_tol < 0.0 {
            return Err(CriterionError::InvalidParams(
                "esc diss_tol must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Fraction of members per occupied grid cell. Cells cover `[0, 1]` per
/// objective; out-of-range values are clipped into the boundary cells.
pub fn cell_distribution(
    members: &[ObjectiveVector],
    cells_per_objective: usize,
) -> HashMap<Vec<u32>, f64> {
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    for member in members {
        let cell: Vec<u32> = member
            .values()
            .iter()
            .map(|&v| {
                let index = (v * cells_per_objective as f64).floor() as i64;
                index.clamp(0, cells_per_objective as i64 - 1) as u32
            })
            .collect();
        *counts.entry(cell).or_insert(0) += 1;
    }
    let total = members.len() as f64;
    counts
        .into_iter()
        .map(|(cell, k)| (cell, k as f64 / total))
        .collect()
}

/// Jensen-Shannon divergence (natural log) between two cell distributions;
/// bounded by `ln 2`, zero exactly for equal distributions.
pub fn jensen_shannon(p: &HashMap<Vec<u32>, f64>, q: &HashMap<Vec<u32>, f64>) -> f64 {
    let half_kl = |from: &HashMap<Vec<u32>, f64>, other: &HashMap<Vec<u32>, f64>| {
        from.iter()
            .map(|(cell, &mass)| {
                let mix = 0.5 * (mass + other.get(cell).copied().unwrap_or(0.0));
                mass * (mass / mix).ln()
            })
            .sum::<f64>()
    };
    0.5 * half_kl(p, q) + 0.5 * half_kl(q, p)
}

pub struct Esc {
    params: EscParams,
    seq: Sequencer,
    prev_distribution: Option<HashMap<Vec<u32>, f64>>,
    prev_divergence: Option<f64>,
    stable: usize,
}

impl Esc {
    pub fn new(params: EscParams, meta: &RunMeta) -> Result<Self, CriterionError> {
        params.validate()?;
        let _ = meta.m;
        Ok(Self {
            params,
            seq: Sequencer::new(meta),
            prev_distribution: None,
            prev_divergence: None,
            stable: 0,
        })
    }
}

impl StoppingCriterion for Esc {
    fn name(&self) -> &str {
        "esc"
    }

    fn observe(&mut self, snapshot: &PopulationSnapshot) -> Result<StopDecision, CriterionError> {
        if let Admit::Latched(decision) = self.seq.admit(snapshot)? {
            return Ok(decision);
        }
        let t = snapshot.iteration();
        let distribution = cell_distribution(snapshot.members(), self.params.cells_per_objective);
        let mut stop = false;
        if let Some(prev) = &self.prev_distribution {
            let divergence = jensen_shannon(prev, &distribution);
            let stable_now = match self.params.mode {
                EscMode::Stability => self
                    .prev_divergence
                    .map(|last| (divergence - last).abs() <= self.params.diss_tol)
                    .unwrap_or(false),
                EscMode::Threshold => divergence <= self.params.diss_tol,
            };
            if stable_now {
                self.stable += 1;
            } else {
                self.stable = 0;
            }
            self.prev_divergence = Some(divergence);
            stop = self.stable >= self.params.patience;
        }
        self.prev_distribution = Some(distribution);
        Ok(self.seq.conclude(t, stop))
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::{meta, snapshot};
    use super::*;
    use approx::assert_relative_eq;

    fn dist(entries: &[(&[u32], f64)]) -> HashMap<Vec<u32>, f64> {
        entries
            .iter()
            .map(|(cell, mass)| (cell.to_vec(), *mass))
            .collect()
    }

    #[test]
    fn identical_distributions_have_zero_divergence() {
        let p = dist(&[(&[0, 0], 0.5), (&[1, 1], 0.5)]);
        assert_eq!(jensen_shannon(&p, &p), 0.0);
    }

    #[test]
    fn disjoint_supports_reach_ln_two() {
        let p = dist(&[(&[0, 0], 1.0)]);
        let q = dist(&[(&[1, 1], 1.0)]);
        assert_relative_eq!(jensen_shannon(&p, &q), 2.0f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn two_cell_example_matches_closed_form() {
        // mu = 4: cells {a: 2, b: 2} vs {a: 3, b: 1}.
        let p = dist(&[(&[0, 0], 0.5), (&[0, 1], 0.5)]);
        let q = dist(&[(&[0, 0], 0.75), (&[0, 1], 0.25)]);
        let expected = 0.5 * (0.5 * (0.5f64 / 0.625).ln() + 0.5 * (0.5f64 / 0.375).ln())
            + 0.5 * (0.75 * (0.75f64 / 0.625).ln() + 0.25 * (0.25f64 / 0.375).ln());
        assert_relative_eq!(jensen_shannon(&p, &q), expected, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_points_clip_into_boundary_cells() {
        let members = vec![
            ObjectiveVector::new(vec![-0.3, 0.5]).unwrap(),
            ObjectiveVector::new(vec![1.7, 0.5]).unwrap(),
        ];
        let d = cell_distribution(&members, 4);
        assert_eq!(d.get(&vec![0, 2]).copied(), Some(0.5));
        assert_eq!(d.get(&vec![3, 2]).copied(), Some(0.5));
    }

    #[test]
    fn stable_divergence_stops_after_patience() {
        let m = meta(2, 1, 50);
        let mut esc = Esc::new(
            EscParams {
                patience: 4,
                ..EscParams::default()
            },
            &m,
        )
        .unwrap();
        // A frozen population keeps D_t = 0, which is perfectly stable. The
        // first divergence exists at t=2 and the first comparison at t=3.
        let members = [[0.15, 0.85], [0.85, 0.15]];
        let mut stopped = None;
        for t in 1..=50 {
            let d = esc.observe(&snapshot(t, &members)).unwrap();
            if d.stopped {
                stopped = d.stop_iteration;
                break;
            }
        }
        assert_eq!(stopped, Some(6));
    }

    #[test]
    fn oscillating_distributions_never_stabilize() {
        let m = meta(2, 1, 60);
        let mut esc = Esc::new(
            EscParams {
                patience: 3,
                diss_tol: 1e-3,
                ..EscParams::default()
            },
            &m,
        )
        .unwrap();
        // Cycle A, A, B: the divergence sequence 0, ln 2, ln 2, 0, ... never
        // stays within tolerance three iterations in a row.
        let a = [[0.05, 0.05], [0.08, 0.05]];
        let b = [[0.05, 0.95], [0.95, 0.05]];
        for t in 1..=60usize {
            let members = if t % 3 == 0 { b } else { a };
            let d = esc.observe(&snapshot(t, &members)).unwrap();
            assert!(!d.stopped, "stopped unexpectedly at t={t}");
        }
    }

    #[test]
    fn threshold_mode_requires_small_divergence() {
        let m = meta(2, 1, 50);
        let mut esc = Esc::new(
            EscParams {
                patience: 2,
                diss_tol: 0.0,
                mode: EscMode::Threshold,
                ..Default::default()
            },
            &m,
        )
        .unwrap();
        let members = [[0.2, 0.8], [0.8, 0.2]];
        let mut stopped = None;
        for t in 1..=50 {
            let d = esc.observe(&snapshot(t, &members)).unwrap();
            if d.stopped {
                stopped = d.stop_iteration;
                break;
            }
        }
        // D_t = 0 from t=2 on; two qualifying iterations fire at t=3.
        assert_eq!(stopped, Some(3));
    }
}
