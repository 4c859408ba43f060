//! Experiment harness for the `risgroup` command-line tool: configuration,
//! sweep drivers reproducing the rate and optimum curves, dataset output
//! and the self-test suite.

pub mod config;
pub mod experiments;
pub mod output;
pub mod selftest;

pub use config::{ConstantsMode, ExperimentConfig, Format, Settings, SweepSpec, SweepVar};
pub use output::{Cell, Table};
