//! Batch front-end tying trace generation, storage, replay, scoring, and
//! reporting into reproducible experiments. The binary (`posebench`) is a
//! thin wrapper over [`commands`]; tests drive the same functions
//! in-process.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
