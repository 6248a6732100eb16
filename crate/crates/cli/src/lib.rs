//! Scenario runner for reasonlab: builds a system from a JSON scenario, runs
//! the requested checks and dynamics, and produces a JSON report.
//!
//! Exit codes: 0 when every requested check passes, 1 when at least one
//! fails, 2 on configuration or execution errors.

pub mod demos;
pub mod instance;
pub mod report;
pub mod run;
pub mod scenario;

pub use demos::{Demo, DEMOS};
pub use report::{CheckOutcome, Phase, Report};
pub use run::{parse_seed, run_file, run_scenario, seed_from_env, RunOptions, SEED_ENV};
pub use scenario::{Check, Scenario, SystemSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot instantiate system: {0}")]
    Instantiation(String),
    #[error("execution failed: {0}")]
    Execution(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub const EXIT_CODE: i32 = 2;
}
