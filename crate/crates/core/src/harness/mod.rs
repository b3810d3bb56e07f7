//! Configuration parsing, seeded experiments and report files.

mod config;
mod experiments;
pub mod svg;

pub use config::*;
pub use experiments::{csv_field, run_experiment, trailing_average, Artifact, HarnessError, Report, Status};
