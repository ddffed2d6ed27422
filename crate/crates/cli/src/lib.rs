//! Configuration, persistence and orchestration behind the `smcf` binary.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use checkpoint::Checkpoint;
pub use config::RunConfig;
pub use error::{CliError, CliResult, FailureKind};
