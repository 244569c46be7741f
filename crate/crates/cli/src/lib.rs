//! Experiment orchestration for the `relyap` command-line tool: JSON
//! configuration, single runs, `γ` sweeps, convergence studies and CSV output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, GammaSpec};
pub use error::{CliError, Result};
