//! The run-trace data model: every evaluated objective vector in evaluation
//! order plus per-iteration population membership.
//!
//! A trace with population size `mu`, offspring count `lambda`, and `t_max`
//! iterations holds exactly `mu + lambda * (t_max - 1)` objective vectors.
//! Membership rows hold 1-based indices into that list, and row `t` may only
//! reference individuals evaluated by iteration `t`. Traces are immutable
//! after construction and may be shared freely across threads.

use std::fmt;
use std::str::FromStr;

use crate::error::CoreError;
use crate::objective::{check_dims, nondominated_subset, NormalizationBounds, ObjectiveVector};

/// On-disk representation of real values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// Shortest decimal representation that round-trips the value.
    Text,
    /// 12-character Base64 field over the big-endian IEEE-754 binary64 image.
    Base64,
}

impl Encoding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Encoding::Text => "text",
            Encoding::Base64 => "base64",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoding {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        match s {
            "text" => Ok(Encoding::Text),
            "base64" => Ok(Encoding::Base64),
            other => Err(CoreError::InvalidMeta(format!(
                "unknown encoding {other:?} (expected \"text\" or \"base64\")"
            ))),
        }
    }
}

/// Static facts about one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub m: usize,
    pub mu: usize,
    pub lambda: usize,
    pub t_max: usize,
    pub problem_id: String,
    pub algorithm_id: String,
    pub seed: u64,
    pub encoding: Encoding,
}

impl RunMeta {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.m < 2 {
            return Err(CoreError::InvalidMeta(format!(
                "m = {} (must be >= 2)",
                self.m
            )));
        }
        if self.mu < 2 {
            return Err(CoreError::InvalidMeta(format!(
                "mu = {} (must be >= 2)",
                self.mu
            )));
        }
        if self.lambda < 1 {
            return Err(CoreError::InvalidMeta("lambda must be >= 1".into()));
        }
        if self.t_max < 1 {
            return Err(CoreError::InvalidMeta("t_max must be >= 1".into()));
        }
        Ok(())
    }

    /// Total number of function evaluations recorded by the trace.
    pub fn fe_max(&self) -> u64 {
        self.mu as u64 + self.lambda as u64 * (self.t_max as u64 - 1)
    }

    /// Function evaluations consumed once iteration `t` is complete:
    /// `mu + lambda * (t - 1)`.
    pub fn fe_of_iteration(&self, t: usize) -> Result<u64, CoreError> {
        if t < 1 || t > self.t_max {
            return Err(CoreError::IterationOutOfRange {
                t,
                t_max: self.t_max,
            });
        }
        Ok(self.mu as u64 + self.lambda as u64 * (t as u64 - 1))
    }
}

/// The objective-vector set of one iteration's population.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSnapshot {
    iteration: usize,
    members: Vec<ObjectiveVector>,
}

impl PopulationSnapshot {
    pub fn new(iteration: usize, members: Vec<ObjectiveVector>) -> Result<Self, CoreError> {
        if iteration < 1 {
            return Err(CoreError::ZeroIteration);
        }
        if members.is_empty() {
            return Err(CoreError::EmptySnapshot);
        }
        let m = members[0].len();
        for member in &members {
            check_dims(m, member.len())?;
        }
        Ok(Self { iteration, members })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn members(&self) -> &[ObjectiveVector] {
        &self.members
    }

    /// Number of objectives.
    pub fn dimension(&self) -> usize {
        self.members[0].len()
    }

    /// Returns the snapshot with every member normalized by `bounds`.
    pub fn normalized(&self, bounds: &NormalizationBounds) -> Result<Self, CoreError> {
        let members = self
            .members
            .iter()
            .map(|p| bounds.normalize(p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            iteration: self.iteration,
            members,
        })
    }
}

/// Ordered record of every evaluated individual plus per-iteration membership.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    meta: RunMeta,
    all_points: Vec<ObjectiveVector>,
    memberships: Vec<Vec<u32>>,
}

impl RunTrace {
    /// Validates every structural invariant before accepting the trace.
    pub fn new(
        meta: RunMeta,
        all_points: Vec<ObjectiveVector>,
        memberships: Vec<Vec<u32>>,
    ) -> Result<Self, CoreError> {
        meta.validate()?;
        let expected_points = meta.fe_max();
        if all_points.len() as u64 != expected_points {
            return Err(CoreError::InvalidTrace(format!(
                "expected {} evaluated points (mu + lambda * (t_max - 1)), found {}",
                expected_points,
                all_points.len()
            )));
        }
        if expected_points > u32::MAX as u64 {
            return Err(CoreError::InvalidTrace(format!(
                "trace too large: {expected_points} points exceed the id range"
            )));
        }
        for (i, p) in all_points.iter().enumerate() {
            if p.len() != meta.m {
                return Err(CoreError::InvalidTrace(format!(
                    "point {} has {} objectives, expected {}",
                    i + 1,
                    p.len(),
                    meta.m
                )));
            }
        }
        if memberships.len() != meta.t_max {
            return Err(CoreError::InvalidTrace(format!(
                "expected {} membership rows, found {}",
                meta.t_max,
                memberships.len()
            )));
        }
        for (row_index, row) in memberships.iter().enumerate() {
            let t = row_index + 1;
            if row.len() != meta.mu {
                return Err(CoreError::InvalidTrace(format!(
                    "membership row {t} holds {} ids, expected mu = {}",
                    row.len(),
                    meta.mu
                )));
            }
            let highest_evaluated = meta.fe_of_iteration(t).expect("t in range");
            for &id in row {
                if id == 0 || id as u64 > highest_evaluated {
                    return Err(CoreError::InvalidTrace(format!(
                        "membership row {t} references id {id}, valid range is [1, {highest_evaluated}]"
                    )));
                }
            }
        }
        Ok(Self {
            meta,
            all_points,
            memberships,
        })
    }

    pub fn meta(&self) -> &RunMeta {
        &self.meta
    }

    /// Every evaluated objective vector, in evaluation order.
    pub fn all_points(&self) -> &[ObjectiveVector] {
        &self.all_points
    }

    /// Membership rows of 1-based ids into [`Self::all_points`].
    pub fn memberships(&self) -> &[Vec<u32>] {
        &self.memberships
    }

    /// Reconstructs the population of iteration `t`, in membership-row order.
    pub fn snapshot(&self, t: usize) -> Result<PopulationSnapshot, CoreError> {
        if t < 1 || t > self.meta.t_max {
            return Err(CoreError::IterationOutOfRange {
                t,
                t_max: self.meta.t_max,
            });
        }
        let members = self.memberships[t - 1]
            .iter()
            .map(|&id| self.all_points[id as usize - 1].clone())
            .collect();
        PopulationSnapshot::new(t, members)
    }

    /// Reconstructs the unbounded external archive at iteration `t`: the
    /// non-dominated subset of the first `mu + lambda * (t - 1)` evaluations.
    pub fn unbounded_archive(&self, t: usize) -> Result<Vec<ObjectiveVector>, CoreError> {
        let evaluated = self.meta.fe_of_iteration(t)? as usize;
        nondominated_subset(&self.all_points[..evaluated])
    }
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // fixture data happens to sit near pi
mod tests {
    use super::*;

    fn ov(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    pub(crate) fn meta(mu: usize, lambda: usize, t_max: usize) -> RunMeta {
        RunMeta {
            m: 2,
            mu,
            lambda,
            t_max,
            problem_id: "dtlz2".into(),
            algorithm_id: "nsga2".into(),
            seed: 7,
            encoding: Encoding::Text,
        }
    }

    /// The six-point, three-iteration fixture used throughout the suite.
    fn fixture() -> RunTrace {
        let points = vec![
            ov(&[1.78, 2.53]),
            ov(&[3.14, 2.91]),
            ov(&[0.26, 4.55]),
            ov(&[2.88, 0.98]),
            ov(&[1.27, 2.55]),
            ov(&[1.45, 2.39]),
        ];
        let memberships = vec![vec![1, 2, 3, 4], vec![1, 2, 5, 4], vec![6, 2, 5, 4]];
        RunTrace::new(meta(4, 1, 3), points, memberships).unwrap()
    }

    #[test]
    fn fe_of_iteration_examples() {
        let big = meta(100, 100, 1000);
        assert_eq!(big.fe_of_iteration(1).unwrap(), 100);
        assert_eq!(big.fe_of_iteration(1000).unwrap(), 100_000);
        let steady = meta(100, 1, 3);
        assert_eq!(steady.fe_of_iteration(3).unwrap(), 102);
        assert!(matches!(
            big.fe_of_iteration(0),
            Err(CoreError::IterationOutOfRange { .. })
        ));
        assert!(matches!(
            big.fe_of_iteration(1001),
            Err(CoreError::IterationOutOfRange { .. })
        ));
    }

    #[test]
    fn fe_of_iteration_strictly_increasing() {
        let m = meta(7, 3, 50);
        let mut last = 0;
        for t in 1..=50 {
            let fe = m.fe_of_iteration(t).unwrap();
            assert!(fe > last);
            last = fe;
        }
    }

    #[test]
    fn snapshot_follows_membership_rows() {
        let trace = fixture();
        let s2 = trace.snapshot(2).unwrap();
        assert_eq!(
            s2.members(),
            &[
                ov(&[1.78, 2.53]),
                ov(&[3.14, 2.91]),
                ov(&[1.27, 2.55]),
                ov(&[2.88, 0.98])
            ]
        );
        let s3 = trace.snapshot(3).unwrap();
        assert_eq!(
            s3.members(),
            &[
                ov(&[1.45, 2.39]),
                ov(&[3.14, 2.91]),
                ov(&[1.27, 2.55]),
                ov(&[2.88, 0.98])
            ]
        );
        assert!(matches!(
            trace.snapshot(0),
            Err(CoreError::IterationOutOfRange { .. })
        ));
        assert!(matches!(
            trace.snapshot(4),
            Err(CoreError::IterationOutOfRange { .. })
        ));
    }

    #[test]
    fn unbounded_archive_matches_pairwise_filter() {
        let trace = fixture();
        // t=1: non-dominated subset of the first four points.
        let a1 = trace.unbounded_archive(1).unwrap();
        assert_eq!(a1.len(), 3);
        assert!(!a1.contains(&ov(&[3.14, 2.91])));

        // t=3: all six points considered.
        let mut a3 = trace.unbounded_archive(3).unwrap();
        a3.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(
            a3,
            vec![
                ov(&[0.26, 4.55]),
                ov(&[1.27, 2.55]),
                ov(&[1.45, 2.39]),
                ov(&[2.88, 0.98])
            ]
        );
    }

    #[test]
    fn trace_validation_rejects_bad_shapes() {
        let points: Vec<_> = (0..6).map(|i| ov(&[i as f64, i as f64])).collect();

        // Wrong point count.
        assert!(matches!(
            RunTrace::new(
                meta(4, 1, 3),
                points[..5].to_vec(),
                vec![vec![1, 2, 3, 4]; 3]
            ),
            Err(CoreError::InvalidTrace(_))
        ));

        // Row references an individual not yet evaluated at t=1.
        assert!(matches!(
            RunTrace::new(
                meta(4, 1, 3),
                points.clone(),
                vec![vec![1, 2, 3, 5], vec![1, 2, 3, 4], vec![1, 2, 3, 4]],
            ),
            Err(CoreError::InvalidTrace(_))
        ));

        // Zero id.
        assert!(matches!(
            RunTrace::new(
                meta(4, 1, 3),
                points.clone(),
                vec![vec![0, 2, 3, 4], vec![1, 2, 3, 4], vec![1, 2, 3, 4]],
            ),
            Err(CoreError::InvalidTrace(_))
        ));

        // Short membership row.
        assert!(matches!(
            RunTrace::new(
                meta(4, 1, 3),
                points,
                vec![vec![1, 2, 3], vec![1, 2, 3, 4], vec![1, 2, 3, 4]],
            ),
            Err(CoreError::InvalidTrace(_))
        ));
    }

    #[test]
    fn meta_invariants_enforced() {
        let mut bad = meta(4, 1, 3);
        bad.m = 1;
        assert!(bad.validate().is_err());
        let mut bad = meta(4, 1, 3);
        bad.mu = 1;
        assert!(bad.validate().is_err());
        let mut bad = meta(4, 1, 3);
        bad.lambda = 0;
        assert!(bad.validate().is_err());
        let mut bad = meta(4, 1, 3);
        bad.t_max = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn snapshot_normalization() {
        let trace = fixture();
        let bounds = NormalizationBounds::new(ov(&[0.0, 0.0]), ov(&[4.0, 5.0])).unwrap();
        let normalized = trace.snapshot(1).unwrap().normalized(&bounds).unwrap();
        assert_eq!(normalized.members()[0], ov(&[1.78 / 4.0, 2.53 / 5.0]));
        assert_eq!(normalized.iteration(), 1);
    }
}
