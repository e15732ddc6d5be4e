//! Configuration, staged execution and output layout of the `scriptswitch`
//! command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod predict;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use error::{CliError, ErrorKind};
pub use pipeline::{Runner, Stage, StageStatus};
