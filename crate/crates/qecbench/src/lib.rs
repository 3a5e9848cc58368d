//! Configuration, parallel orchestration and result files for
//! `qecbench-core` experiments.

pub mod config;
pub mod output;
pub mod parallel;

pub use config::{ConfigError, RunConfig};
pub use output::{run_and_emit, RunError, RunManifest};
