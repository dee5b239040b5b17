//! File-based benchmarking toolkit for stopping criteria in evolutionary
//! multi-objective optimization.
//!
//! The crate generates optimizer run traces, stores them in a compact
//! two-file representation (all evaluated objective vectors once, plus
//! per-iteration membership ids), replays them through online stopping
//! criteria, and scores each criterion against the empirically optimal
//! stopping point of the run.

pub mod criteria;
pub mod error;
pub mod indicators;
pub mod objective;
pub mod optimizer;
pub mod pose;
pub mod problems;
pub mod trace;
pub mod traceio;

pub use error::CoreError;
pub use objective::{nondominated_subset, NormalizationBounds, ObjectiveVector};
pub use trace::{Encoding, PopulationSnapshot, RunMeta, RunTrace};
