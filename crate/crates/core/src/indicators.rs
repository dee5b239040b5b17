//! Quality indicators: exact hypervolume, additive epsilon, and R2, plus
//! per-iteration and best-so-far series over a run trace.
//!
//! Hypervolume is computed exactly by a dimension-sweep recursion over the
//! last objective, with a dedicated `O(n log n)` sweep for two objectives.
//! Points are normalized with the configured bounds before measuring, and
//! only points weakly dominating the reference point contribute; everything
//! else is clipped out rather than rejected, since early populations
//! legitimately fall beyond the nadir.

use thiserror::Error;

use crate::error::CoreError;
use crate::objective::{slice_dominates, NormalizationBounds, ObjectiveVector};
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndicatorError {
    #[error("indicator requires a nonempty point set")]
    EmptySet,

    #[error("R2 requires a nonempty weight set")]
    EmptyWeights,

    #[error("weight vector {index} is invalid: {message}")]
    BadWeight { index: usize, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Reference point and normalization bounds for hypervolume measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct HvConfig {
    reference_point: ObjectiveVector,
    bounds: NormalizationBounds,
}

impl HvConfig {
    pub fn new(
        reference_point: ObjectiveVector,
        bounds: NormalizationBounds,
    ) -> Result<Self, IndicatorError> {
        crate::objective::check_dims(reference_point.len(), bounds.dimension())
            .map_err(IndicatorError::Core)?;
        Ok(Self {
            reference_point,
            bounds,
        })
    }

    /// The conventional setup: objectives mapped into `[0, 1]^m` by `bounds`,
    /// reference point at `(1.1, ..., 1.1)`.
    pub fn with_bounds(bounds: NormalizationBounds) -> Self {
        let m = bounds.dimension();
        Self {
            reference_point: ObjectiveVector::new(vec![1.1; m]).expect("m >= 1"),
            bounds,
        }
    }

    /// For data that is already normalized: identity bounds, reference 1.1.
    pub fn normalized(m: usize) -> Self {
        Self::with_bounds(NormalizationBounds::unit(m))
    }

    pub fn reference_point(&self) -> &ObjectiveVector {
        &self.reference_point
    }

    pub fn bounds(&self) -> &NormalizationBounds {
        &self.bounds
    }
}

/// Per-iteration indicator values, indexed by iteration `t >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    values: Vec<f64>,
}

impl IndicatorSeries {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at iteration `t` (1-based).
    pub fn get(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// Running maximum of the series.
    pub fn running_max(&self) -> IndicatorSeries {
        let mut best = f64::NEG_INFINITY;
        let values = self
            .values
            .iter()
            .map(|&v| {
                best = best.max(v);
                best
            })
            .collect();
        IndicatorSeries::from_values(values)
    }
}

/// Exact hypervolume of `points` with respect to `cfg`.
///
/// Returns 0 when no point strictly dominates the reference point; that is
/// an ordinary value, not an error.
pub fn hypervolume(points: &[ObjectiveVector], cfg: &HvConfig) -> Result<f64, IndicatorError> {
    if points.is_empty() {
        return Err(IndicatorError::EmptySet);
    }
    let reference = cfg.reference_point().values();
    let mut contributing: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        let normalized = cfg.bounds().normalize(p).map_err(IndicatorError::Core)?;
        let values = normalized.values();
        if values.iter().zip(reference).all(|(v, r)| v <= r) {
            contributing.push(values.to_vec());
        }
    }
    Ok(measure(contributing, reference))
}

/// Lebesgue measure of the union of boxes `[p, reference]`.
fn measure(points: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    match reference.len() {
        1 => {
            let min = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            reference[0] - min
        }
        2 => measure_2d(points, reference),
        _ => measure_sweep(points, reference),
    }
}

/// Staircase sweep for two objectives.
fn measure_2d(mut points: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut hv = 0.0;
    let mut ceiling = reference[1];
    for p in &points {
        if p[1] < ceiling {
            hv += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    hv
}

/// Dimension sweep: slice the measured region along the last objective and
/// recurse on the projections of the points active in each slab.
fn measure_sweep(mut points: Vec<Vec<f64>>, reference: &[f64]) -> f64 {
    let last = reference.len() - 1;
    points.sort_by(|a, b| a[last].total_cmp(&b[last]));

    let mut hv = 0.0;
    let mut active: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    let mut i = 0;
    while i < points.len() {
        let height = points[i][last];
        while i < points.len() && points[i][last] == height {
            active.push(points[i][..last].to_vec());
            i += 1;
        }
        let next_height = if i < points.len() {
            points[i][last]
        } else {
            reference[last]
        };
        if next_height > height {
            let slab = nondominated(&active);
            hv += measure(slab, &reference[..last]) * (next_height - height);
        }
    }
    hv
}

fn nondominated(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && (slice_dominates(q, p) || (q == p && j < i)) {
                continue 'outer;
            }
        }
        kept.push(p.clone());
    }
    kept
}

/// Hypervolume of every population snapshot, in iteration order.
pub fn population_hv_series(
    trace: &RunTrace,
    cfg: &HvConfig,
) -> Result<IndicatorSeries, IndicatorError> {
    let mut values = Vec::with_capacity(trace.meta().t_max);
    for t in 1..=trace.meta().t_max {
        let snapshot = trace.snapshot(t).map_err(IndicatorError::Core)?;
        values.push(hypervolume(snapshot.members(), cfg)?);
    }
    Ok(IndicatorSeries::from_values(values))
}

/// Best-so-far hypervolume: the running maximum of the per-iteration series,
/// non-decreasing by construction even though the raw series is not.
pub fn best_so_far_hv(trace: &RunTrace, cfg: &HvConfig) -> Result<IndicatorSeries, IndicatorError> {
    Ok(population_hv_series(trace, cfg)?.running_max())
}

/// Additive epsilon indicator of `approximation` against `reference_set`:
/// the smallest shift that makes the approximation weakly dominate every
/// reference member.
pub fn additive_epsilon(
    approximation: &[ObjectiveVector],
    reference_set: &[ObjectiveVector],
) -> Result<f64, IndicatorError> {
    if approximation.is_empty() || reference_set.is_empty() {
        return Err(IndicatorError::EmptySet);
    }
    let m = approximation[0].len();
    for p in approximation.iter().chain(reference_set) {
        crate::objective::check_dims(m, p.len()).map_err(IndicatorError::Core)?;
    }
    let mut value = f64::NEG_INFINITY;
    for r in reference_set {
        let mut closest = f64::INFINITY;
        for a in approximation {
            let mut shift = f64::NEG_INFINITY;
            for i in 0..m {
                shift = shift.max(a[i] - r[i]);
            }
            closest = closest.min(shift);
        }
        value = value.max(closest);
    }
    Ok(value)
}

/// R2 indicator with Tchebycheff utility and the origin of the normalized
/// space as the utopian point: the mean over `weights` of the best weighted
/// distance any member achieves.
pub fn r2(approximation: &[ObjectiveVector], weights: &[Vec<f64>]) -> Result<f64, IndicatorError> {
    if approximation.is_empty() {
        return Err(IndicatorError::EmptySet);
    }
    if weights.is_empty() {
        return Err(IndicatorError::EmptyWeights);
    }
    let m = approximation[0].len();
    for (index, w) in weights.iter().enumerate() {
        if w.len() != m {
            return Err(IndicatorError::BadWeight {
                index,
                message: format!("has {} components, expected {m}", w.len()),
            });
        }
        if w.iter().any(|&v| v < 0.0) {
            return Err(IndicatorError::BadWeight {
                index,
                message: "negative component".into(),
            });
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(IndicatorError::BadWeight {
                index,
                message: format!("components sum to {sum}, expected 1"),
            });
        }
    }
    let mut total = 0.0;
    for w in weights {
        let mut best = f64::INFINITY;
        for a in approximation {
            let mut utility = f64::NEG_INFINITY;
            for i in 0..m {
                utility = utility.max(w[i] * a[i].abs());
            }
            best = best.min(utility);
        }
        total += best;
    }
    Ok(total / weights.len() as f64)
}

/// All weight vectors of the simplex-lattice design with `divisions`
/// subdivisions: components are multiples of `1 / divisions` summing to 1.
pub fn simplex_lattice_weights(m: usize, divisions: usize) -> Vec<Vec<f64>> {
    assert!(m >= 1 && divisions >= 1);
    let mut out = Vec::new();
    let mut current = vec![0usize; m];
    fill_lattice(&mut out, &mut current, 0, divisions, divisions);
    out
}

fn fill_lattice(
    out: &mut Vec<Vec<f64>>,
    current: &mut Vec<usize>,
    position: usize,
    remaining: usize,
    divisions: usize,
) {
    if position == current.len() - 1 {
        current[position] = remaining;
        out.push(
            current
                .iter()
                .map(|&k| k as f64 / divisions as f64)
                .collect(),
        );
        return;
    }
    for k in 0..=remaining {
        current[position] = k;
        fill_lattice(out, current, position + 1, remaining - k, divisions);
    }
}

/// Smallest division count whose simplex lattice holds at least
/// `target_count` weight vectors.
pub fn lattice_divisions_for(m: usize, target_count: usize) -> usize {
    let mut divisions = 1usize;
    loop {
        // C(divisions + m - 1, m - 1), kept in u128 to avoid overflow.
        let mut count: u128 = 1;
        for i in 1..m {
            count = count * (divisions + i) as u128 / i as u128;
        }
        if count >= target_count as u128 || divisions > 10_000 {
            return divisions;
        }
        divisions += 1;
    }
}
