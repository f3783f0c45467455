//! Scenario files, the end-to-end runner, reproduction suites and result
//! persistence.

use std::path::PathBuf;

use thiserror::Error;

use crate::buffer::BufferError;
use crate::counting::CountingError;
use crate::qstate::QstateError;
use crate::tomography::TomographyError;

mod output;
mod run;
mod scenario;
mod suites;

pub use output::{config_run_id, write_comparison, write_results};
pub use run::{
    run_any, run_divider, run_scenario, RunData, RunOptions, RunResult, FLAG_MISSING_LEAK,
    FLAG_NEGLIGIBLE_SINGLES, FLAG_UNEXPECTED_LEAK,
};
pub use scenario::{
    CountingSpec, NoiseProfile, NoiseSpec, Scenario, DEFAULT_GHOST_FLOOR, DEFAULT_PROFILE,
    DEFAULT_SEED, SCHEMA_VERSION,
};
pub use suites::{
    compare_table1, divider_scenario, parse_values, run_divider_suite, run_suite,
    run_table1_suite, sweep_scenarios, table1_rows, ComparisonRow, Table1Report, Table1Row,
    LOSS_TOLERANCE_DB, TIME_TOLERANCE,
};

/// Module error raised while running a scenario.
#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Buffer(#[from] BufferError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Qstate(#[from] QstateError),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown noise profile `{0}`")]
    UnknownProfile(String),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("scenario `{scenario}`: {error}")]
    Scenario { scenario: String, error: StageError },
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: std::io::Error },
}

impl HarnessError {
    pub fn scenario(name: &str, source: impl Into<StageError>) -> Self {
        Self::Scenario {
            scenario: name.to_string(),
            error: source.into(),
        }
    }
}
