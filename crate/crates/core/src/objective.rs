//! Objective vectors, Pareto dominance, and objective-space normalization.
//!
//! All objectives are minimized. Vectors are finite by construction, so
//! value equality is total and safe for set-style operations.

use std::ops::Index;

use crate::error::CoreError;

/// A point in objective space (minimization, finite coordinates).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector {
    values: Vec<f64>,
}

// No NaN can be constructed, so `PartialEq` is reflexive here.
impl Eq for ObjectiveVector {}

impl ObjectiveVector {
    /// Builds a vector, rejecting empty input and non-finite coordinates.
    pub fn new(values: Vec<f64>) -> Result<Self, CoreError> {
        if values.is_empty() {
            return Err(CoreError::EmptyVector);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteValue { index });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of objectives.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    /// Pareto dominance: no worse in every objective, strictly better in one.
    pub fn dominates(&self, other: &Self) -> Result<bool, CoreError> {
        check_dims(self.len(), other.len())?;
        Ok(slice_dominates(&self.values, &other.values))
    }

    /// Weak dominance: no worse in every objective.
    pub fn weakly_dominates(&self, other: &Self) -> Result<bool, CoreError> {
        check_dims(self.len(), other.len())?;
        Ok(slice_weakly_dominates(&self.values, &other.values))
    }
}

impl Index<usize> for ObjectiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<(), CoreError> {
    if left == right {
        Ok(())
    } else {
        Err(CoreError::DimensionMismatch { left, right })
    }
}

/// Dominance on raw slices; callers must have validated equal lengths.
pub(crate) fn slice_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

pub(crate) fn slice_weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Returns the members not dominated by any other member.
///
/// Duplicated vectors are legal input (elitist survivors); duplicates that
/// survive are kept once, in first-occurrence order. An empty input yields
/// an empty output.
pub fn nondominated_subset(points: &[ObjectiveVector]) -> Result<Vec<ObjectiveVector>, CoreError> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let m = points[0].len();
    for p in points {
        check_dims(m, p.len())?;
    }
    let mut kept: Vec<ObjectiveVector> = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && slice_dominates(q.values(), p.values()) {
                continue 'outer;
            }
        }
        if !kept.contains(p) {
            kept.push(p.clone());
        }
    }
    Ok(kept)
}

/// Ideal and nadir points used to map objectives into `[0, 1]^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationBounds {
    ideal: ObjectiveVector,
    nadir: ObjectiveVector,
}

impl NormalizationBounds {
    /// Requires `ideal[i] < nadir[i]` in every coordinate.
    pub fn new(ideal: ObjectiveVector, nadir: ObjectiveVector) -> Result<Self, CoreError> {
        check_dims(ideal.len(), nadir.len())?;
        for i in 0..ideal.len() {
            if ideal[i] >= nadir[i] {
                return Err(CoreError::DegenerateBounds { index: i });
            }
        }
        Ok(Self { ideal, nadir })
    }

    /// Identity bounds for data that is already normalized.
    pub fn unit(m: usize) -> Self {
        Self {
            ideal: ObjectiveVector::new(vec![0.0; m]).expect("m >= 1"),
            nadir: ObjectiveVector::new(vec![1.0; m]).expect("m >= 1"),
        }
    }

    pub fn ideal(&self) -> &ObjectiveVector {
        &self.ideal
    }

    pub fn nadir(&self) -> &ObjectiveVector {
        &self.nadir
    }

    pub fn dimension(&self) -> usize {
        self.ideal.len()
    }

    /// Affine map `(p - ideal) / (nadir - ideal)`, coordinate-wise.
    ///
    /// Values beyond the nadir map above 1 and are deliberately not clipped;
    /// consumers decide how to treat them.
    pub fn normalize(&self, p: &ObjectiveVector) -> Result<ObjectiveVector, CoreError> {
        check_dims(self.dimension(), p.len())?;
        let values = (0..p.len())
            .map(|i| (p[i] - self.ideal[i]) / (self.nadir[i] - self.ideal[i]))
            .collect();
        ObjectiveVector::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(ov(&[1.0, 2.0]).dominates(&ov(&[2.0, 2.0])).unwrap());
        assert!(!ov(&[1.0, 2.0]).dominates(&ov(&[2.0, 1.0])).unwrap());
        assert!(!ov(&[1.0, 1.0]).dominates(&ov(&[1.0, 1.0])).unwrap());
    }

    #[test]
    fn weak_dominance_examples() {
        assert!(ov(&[1.0, 1.0]).weakly_dominates(&ov(&[1.0, 1.0])).unwrap());
        assert!(ov(&[1.0, 2.0]).weakly_dominates(&ov(&[2.0, 2.0])).unwrap());
        assert!(!ov(&[2.0, 1.0]).weakly_dominates(&ov(&[1.0, 2.0])).unwrap());
    }

    #[test]
    fn dominance_implies_weak_dominance() {
        let a = ov(&[0.5, 3.0]);
        let b = ov(&[0.5, 4.0]);
        assert!(a.dominates(&b).unwrap());
        assert!(a.weakly_dominates(&b).unwrap());
        assert!(!b.dominates(&a).unwrap()); // antisymmetry
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = ov(&[1.0, 2.0])
            .dominates(&ov(&[1.0, 2.0, 3.0]))
            .unwrap_err();
        assert_eq!(err, CoreError::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(matches!(
            ObjectiveVector::new(vec![1.0, f64::NAN]),
            Err(CoreError::NonFiniteValue { index: 1 })
        ));
        assert!(matches!(
            ObjectiveVector::new(vec![f64::INFINITY]),
            Err(CoreError::NonFiniteValue { index: 0 })
        ));
        assert_eq!(ObjectiveVector::new(vec![]), Err(CoreError::EmptyVector));
    }

    #[test]
    fn nondominated_subset_examples() {
        let set = vec![ov(&[1.0, 2.0]), ov(&[2.0, 1.0]), ov(&[2.0, 2.0])];
        let nd = nondominated_subset(&set).unwrap();
        assert_eq!(nd, vec![ov(&[1.0, 2.0]), ov(&[2.0, 1.0])]);

        let singleton = vec![ov(&[0.0, 0.0])];
        assert_eq!(nondominated_subset(&singleton).unwrap(), singleton);

        assert!(nondominated_subset(&[]).unwrap().is_empty());
    }

    #[test]
    fn nondominated_subset_keeps_surviving_duplicates_once() {
        let set = vec![ov(&[1.0, 1.0]), ov(&[1.0, 1.0]), ov(&[3.0, 3.0])];
        let nd = nondominated_subset(&set).unwrap();
        assert_eq!(nd, vec![ov(&[1.0, 1.0])]);
    }

    #[test]
    fn normalize_examples() {
        let bounds = NormalizationBounds::new(ov(&[0.0, 0.0]), ov(&[2.0, 4.0])).unwrap();
        assert_eq!(bounds.normalize(&ov(&[0.0, 0.0])).unwrap(), ov(&[0.0, 0.0]));
        assert_eq!(bounds.normalize(&ov(&[2.0, 4.0])).unwrap(), ov(&[1.0, 1.0]));
        assert_eq!(
            bounds.normalize(&ov(&[1.0, 1.0])).unwrap(),
            ov(&[0.5, 0.25])
        );
    }

    #[test]
    fn normalize_does_not_clip() {
        let bounds = NormalizationBounds::new(ov(&[0.0]), ov(&[1.0])).unwrap();
        let out = bounds.normalize(&ov(&[1.05])).unwrap();
        assert!(out[0] > 1.0);
    }

    #[test]
    fn degenerate_bounds_rejected() {
        let err = NormalizationBounds::new(ov(&[0.0, 1.0]), ov(&[1.0, 1.0])).unwrap_err();
        assert_eq!(err, CoreError::DegenerateBounds { index: 1 });
    }
}
