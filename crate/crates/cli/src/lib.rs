//! Experiment harness for the `holoquant` command-line tool.
//!
//! Each experiment loads a grayscale image, symmetrizes it, attaches seeded random
//! phase and writes plot-ready CSV, JSON and PGM files to the output directory.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{ConfigFile, Experiment, ExperimentConfig, Overrides, TargetScale};
pub use experiment::run_experiment;
