//! Scalable box-constrained test problems (DTLZ1-7 and convex DTLZ2) with
//! evaluation, decision-space defaults, and ideal/nadir points for
//! objective normalization.
//!
//! Problems without a closed-form nadir (DTLZ5/6/7, CDTLZ2) use bounds
//! precomputed by dense Pareto-front sampling; the data ships in
//! `data/bounds.csv` and is regenerated by the `sample-bounds` tool.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::error::CoreError;
use crate::objective::{NormalizationBounds, ObjectiveVector};

/// Bounds for problems whose nadir has no closed form, produced by
/// `sample-bounds` and checked in as repository data.
const BOUNDS_DATA: &str = include_str!("../data/bounds.csv");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("unknown problem id {0:?}")]
    UnknownProblem(String),

    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    #[error("decision vector has {found} variables, expected {expected}")]
    WrongDimension { expected: usize, found: usize },

    #[error("decision variable {index} = {value} outside the box [0, 1]")]
    OutOfBounds { index: usize, value: f64 },

    #[error("no precomputed front bounds for {problem} with m = {m}; regenerate data/bounds.csv with the sample-bounds tool")]
    MissingBounds { problem: ProblemId, m: usize },

    #[error("bad bounds data at line {line}: {message}")]
    BadBoundsData { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
    Dtlz5,
    Dtlz6,
    Dtlz7,
    CDtlz2,
}

impl ProblemId {
    pub const ALL: [ProblemId; 8] = [
        ProblemId::Dtlz1,
        ProblemId::Dtlz2,
        ProblemId::Dtlz3,
        ProblemId::Dtlz4,
        ProblemId::Dtlz5,
        ProblemId::Dtlz6,
        ProblemId::Dtlz7,
        ProblemId::CDtlz2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::Dtlz1 => "dtlz1",
            ProblemId::Dtlz2 => "dtlz2",
            ProblemId::Dtlz3 => "dtlz3",
            ProblemId::Dtlz4 => "dtlz4",
            ProblemId::Dtlz5 => "dtlz5",
            ProblemId::Dtlz6 => "dtlz6",
            ProblemId::Dtlz7 => "dtlz7",
            ProblemId::CDtlz2 => "cdtlz2",
        }
    }

    /// Conventional number of distance variables.
    pub fn default_k(&self) -> usize {
        match self {
            ProblemId::Dtlz1 => 5,
            ProblemId::Dtlz7 => 20,
            _ => 10,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, ProblemError> {
        match s {
            "dtlz1" => Ok(ProblemId::Dtlz1),
            "dtlz2" => Ok(ProblemId::Dtlz2),
            "dtlz3" => Ok(ProblemId::Dtlz3),
            "dtlz4" => Ok(ProblemId::Dtlz4),
            "dtlz5" => Ok(ProblemId::Dtlz5),
            "dtlz6" => Ok(ProblemId::Dtlz6),
            "dtlz7" => Ok(ProblemId::Dtlz7),
            "cdtlz2" => Ok(ProblemId::CDtlz2),
            other => Err(ProblemError::UnknownProblem(other.to_string())),
        }
    }
}

/// A fully specified problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub m: usize,
    pub n: usize,
}

impl ProblemSpec {
    pub fn new(id: ProblemId, m: usize, n: usize) -> Result<Self, ProblemError> {
        if m < 2 {
            return Err(ProblemError::InvalidSpec(format!("m = {m} (must be >= 2)")));
        }
        if n < m {
            return Err(ProblemError::InvalidSpec(format!(
                "n = {n} (must be >= m = {m})"
            )));
        }
        Ok(Self { id, m, n })
    }

    /// Uses the conventional `n = m + k - 1` decision-space size.
    pub fn with_default_n(id: ProblemId, m: usize) -> Result<Self, ProblemError> {
        if m < 2 {
            return Err(ProblemError::InvalidSpec(format!("m = {m} (must be >= 2)")));
        }
        Self::new(id, m, m + id.default_k() - 1)
    }

    /// Number of distance variables.
    pub fn k(&self) -> usize {
        self.n - self.m + 1
    }

    /// Evaluates the objective vector at `x in [0, 1]^n`.
    pub fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector, ProblemError> {
        if x.len() != self.n {
            return Err(ProblemError::WrongDimension {
                expected: self.n,
                found: x.len(),
            });
        }
        for (index, &value) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ProblemError::OutOfBounds { index, value });
            }
        }
        let m = self.m;
        let (position, distance) = x.split_at(m - 1);
        let f = match self.id {
            ProblemId::Dtlz1 => linear_objectives(position, g_rastrigin(distance), m),
            ProblemId::Dtlz2 => spherical_objectives(position, g_sphere(distance), m),
            ProblemId::Dtlz3 => spherical_objectives(position, g_rastrigin(distance), m),
            ProblemId::Dtlz4 => {
                let warped: Vec<f64> = position.iter().map(|v| v.powi(100)).collect();
                spherical_objectives(&warped, g_sphere(distance), m)
            }
            ProblemId::Dtlz5 => degenerate_objectives(position, g_sphere(distance), m),
            ProblemId::Dtlz6 => {
                let g = distance.iter().map(|v| v.powf(0.1)).sum();
                degenerate_objectives(position, g, m)
            }
            ProblemId::Dtlz7 => disconnected_objectives(position, distance, m),
            ProblemId::CDtlz2 => {
                let mut f = spherical_objectives(position, g_sphere(distance), m);
                for v in f.iter_mut().take(m - 1) {
                    *v = v.powi(4);
                }
                f[m - 1] = f[m - 1].powi(2);
                f
            }
        };
        Ok(ObjectiveVector::new(f)?)
    }

    /// True ideal/nadir points of the Pareto front, analytic where known and
    /// sampled data otherwise.
    pub fn reference_bounds(&self) -> Result<NormalizationBounds, ProblemError> {
        let analytic = |nadir: f64| {
            let ideal = ObjectiveVector::new(vec![0.0; self.m])?;
            let nadir = ObjectiveVector::new(vec![nadir; self.m])?;
            Ok(NormalizationBounds::new(ideal, nadir)?)
        };
        match self.id {
            ProblemId::Dtlz1 => analytic(0.5),
            ProblemId::Dtlz2 | ProblemId::Dtlz3 | ProblemId::Dtlz4 => analytic(1.0),
            _ => {
                let table = sampled_bounds_table()?;
                table
                    .get(&(self.id, self.m))
                    .cloned()
                    .ok_or(ProblemError::MissingBounds {
                        problem: self.id,
                        m: self.m,
                    })
            }
        }
    }
}

fn g_rastrigin(distance: &[f64]) -> f64 {
    let sum: f64 = distance
        .iter()
        .map(|&v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
        .sum();
    100.0 * (distance.len() as f64 + sum)
}

fn g_sphere(distance: &[f64]) -> f64 {
    distance.iter().map(|&v| (v - 0.5).powi(2)).sum()
}

/// `f_i = 0.5 * (1 + g) * x_1 ... x_{m-1-i} * (1 - x_{m-i})`.
fn linear_objectives(position: &[f64], g: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let mut v = 0.5 * (1.0 + g);
            for &x in &position[..m - 1 - i] {
                v *= x;
            }
            if i > 0 {
                v *= 1.0 - position[m - 1 - i];
            }
            v
        })
        .collect()
}

/// Product-of-cosines objectives over angle fractions in `[0, 1]`.
fn spherical_objectives(theta: &[f64], g: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let mut v = 1.0 + g;
            for &a in &theta[..m - 1 - i] {
                v *= (a * FRAC_PI_2).cos();
            }
            if i > 0 {
                v *= (theta[m - 1 - i] * FRAC_PI_2).sin();
            }
            v
        })
        .collect()
}

/// DTLZ5/6 meridian: every angle after the first is pulled towards 1/2.
fn degenerate_objectives(position: &[f64], g: f64, m: usize) -> Vec<f64> {
    let theta: Vec<f64> = position
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == 0 {
                x
            } else {
                (1.0 + 2.0 * g * x) / (2.0 * (1.0 + g))
            }
        })
        .collect();
    spherical_objectives(&theta, g, m)
}

fn disconnected_objectives(position: &[f64], distance: &[f64], m: usize) -> Vec<f64> {
    let g = 1.0 + 9.0 / distance.len() as f64 * distance.iter().sum::<f64>();
    let mut f: Vec<f64> = position.to_vec();
    let h = m as f64
        - f.iter()
            .map(|&fi| fi / (1.0 + g) * (1.0 + (3.0 * PI * fi).sin()))
            .sum::<f64>();
    f.push((1.0 + g) * h);
    f
}

type BoundsTable = HashMap<(ProblemId, usize), NormalizationBounds>;

fn sampled_bounds_table() -> Result<&'static BoundsTable, ProblemError> {
    static TABLE: OnceLock<Result<BoundsTable, ProblemError>> = OnceLock::new();
    TABLE
        .get_or_init(|| parse_bounds_data(BOUNDS_DATA))
        .as_ref()
        .map_err(|e| e.clone())
}

fn parse_bounds_data(
    data: &str,
) -> Result<HashMap<(ProblemId, usize), NormalizationBounds>, ProblemError> {
    let mut table = HashMap::new();
    for (i, raw) in data.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() < 2 {
            return Err(ProblemError::BadBoundsData {
                line,
                message: "expected problem_id,m,ideal...,nadir...".into(),
            });
        }
        let id = ProblemId::from_str(fields[0]).map_err(|e| ProblemError::BadBoundsData {
            line,
            message: e.to_string(),
        })?;
        let m: usize = fields[1].parse().map_err(|_| ProblemError::BadBoundsData {
            line,
            message: format!("bad objective count {:?}", fields[1]),
        })?;
        if fields.len() != 2 + 2 * m {
            return Err(ProblemError::BadBoundsData {
                line,
                message: format!(
                    "expected {} value fields, found {}",
                    2 * m,
                    fields.len() - 2
                ),
            });
        }
        let mut values = Vec::with_capacity(2 * m);
        for field in &fields[2..] {
            let v: f64 = field.parse().map_err(|_| ProblemError::BadBoundsData {
                line,
                message: format!("unparseable value {field:?}"),
            })?;
            values.push(v);
        }
        let ideal = ObjectiveVector::new(values[..m].to_vec())?;
        let nadir = ObjectiveVector::new(values[m..].to_vec())?;
        table.insert((id, m), NormalizationBounds::new(ideal, nadir)?);
    }
    Ok(table)
}

/// Dense Pareto-front sampling used to precompute bounds data.
pub mod sampling {
    use super::*;

    /// Componentwise extremes of a dense Pareto-front sample.
    ///
    /// At least `min_samples` front points are generated on a deterministic
    /// grid, so repeated runs produce identical data files. DTLZ7's front
    /// factors into independent per-coordinate fronts, which is exploited
    /// to keep high-`m` sampling exact; every other supported front is
    /// mutually non-dominated at the distance-variable optimum, so the
    /// extremes are read off directly.
    pub fn sampled_front_bounds(
        spec: &ProblemSpec,
        min_samples: usize,
    ) -> Result<NormalizationBounds, ProblemError> {
        match spec.id {
            ProblemId::Dtlz7 => dtlz7_bounds(spec, min_samples),
            ProblemId::Dtlz5 | ProblemId::Dtlz6 => curve_bounds(spec, min_samples),
            _ => surface_bounds(spec, min_samples),
        }
    }

    fn optimal_distance_value(id: ProblemId) -> f64 {
        match id {
            ProblemId::Dtlz6 | ProblemId::Dtlz7 => 0.0,
            _ => 0.5,
        }
    }

    fn extremes_to_bounds(
        m: usize,
        points: impl Iterator<Item = ObjectiveVector>,
    ) -> Result<NormalizationBounds, ProblemError> {
        let mut ideal = vec![f64::INFINITY; m];
        let mut nadir = vec![f64::NEG_INFINITY; m];
        for p in points {
            for i in 0..m {
                ideal[i] = ideal[i].min(p[i]);
                nadir[i] = nadir[i].max(p[i]);
            }
        }
        Ok(NormalizationBounds::new(
            ObjectiveVector::new(ideal)?,
            ObjectiveVector::new(nadir)?,
        )?)
    }

    /// DTLZ5/6: with the distance variables at their optimum, the front is a
    /// curve parameterized by the first position variable alone, and its
    /// points are mutually non-dominated.
    fn curve_bounds(
        spec: &ProblemSpec,
        min_samples: usize,
    ) -> Result<NormalizationBounds, ProblemError> {
        let fill = optimal_distance_value(spec.id);
        let steps = min_samples.max(2);
        let points = (0..steps).map(|i| {
            let mut x = vec![fill; spec.n];
            x[0] = i as f64 / (steps - 1) as f64;
            for v in x.iter_mut().take(spec.m - 1).skip(1) {
                // The remaining position variables have no effect when g = 0.
                *v = 0.5;
            }
            spec.evaluate(&x).expect("grid point in bounds")
        });
        extremes_to_bounds(spec.m, points)
    }

    /// Fronts that are mutually non-dominated surfaces (simplex, sphere, and
    /// monotone transforms of the sphere): grid the position variables.
    fn surface_bounds(
        spec: &ProblemSpec,
        min_samples: usize,
    ) -> Result<NormalizationBounds, ProblemError> {
        let dims = spec.m - 1;
        let per_dim = ((min_samples as f64).powf(1.0 / dims as f64).ceil() as usize).max(2);
        let fill = optimal_distance_value(spec.id);
        let total = per_dim.pow(dims as u32);
        let points = (0..total).map(|mut index| {
            let mut x = vec![fill; spec.n];
            for slot in x.iter_mut().take(dims) {
                *slot = (index % per_dim) as f64 / (per_dim - 1) as f64;
                index /= per_dim;
            }
            spec.evaluate(&x).expect("grid point in bounds")
        });
        extremes_to_bounds(spec.m, points)
    }

    /// DTLZ7: a front point is non-dominated exactly when each position
    /// coordinate is non-dominated in the two-dimensional trade-off between
    /// the coordinate value and its contribution to the last objective, so
    /// the front is the product of identical per-coordinate fronts.
    fn dtlz7_bounds(
        spec: &ProblemSpec,
        min_samples: usize,
    ) -> Result<NormalizationBounds, ProblemError> {
        let m = spec.m as f64;
        let steps = min_samples.max(2);
        // Contribution of one position coordinate to the last objective,
        // with the distance variables at their optimum (g = 1).
        let u = |x: f64| x / 2.0 * (1.0 + (3.0 * PI * x).sin());

        let mut best_u = f64::NEG_INFINITY;
        let mut coord_max = 0.0_f64;
        let mut u_max = f64::NEG_INFINITY;
        for i in 0..steps {
            let x = i as f64 / (steps - 1) as f64;
            let ux = u(x);
            if ux > best_u {
                // Non-dominated in (x, -u): strictly better contribution
                // than every smaller coordinate value.
                best_u = ux;
                coord_max = coord_max.max(x);
                u_max = u_max.max(ux);
            }
        }

        let mut ideal = vec![0.0; spec.m];
        let mut nadir = vec![coord_max; spec.m];
        // x = 0 contributes u = 0 and is always on the coordinate front.
        ideal[spec.m - 1] = 2.0 * (m - (m - 1.0) * u_max);
        nadir[spec.m - 1] = 2.0 * m;
        Ok(NormalizationBounds::new(
            ObjectiveVector::new(ideal)?,
            ObjectiveVector::new(nadir)?,
        )?)
    }
}
