//! Polarization analyzers and coincidence counting over the 16 tomography settings.

mod analyzer;
mod dataset;
mod simulate;

pub(crate) use analyzer::design_singular_values;
pub use analyzer::{
    design_matrix, hwp, joint_projector, projector, qwp, standard_16_settings, AnalyzerSetting,
    JointSetting, Polarization,
};
pub use dataset::{read_dataset_csv, write_dataset_csv};
pub use simulate::{
    expected_coincidence_rate, expected_dataset, simulate_dataset, simulate_dataset_with,
    CountRecord, CountingConfig,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CountingError {
    #[error("invalid counting configuration: {0}")]
    Config(String),
    #[error("dataset I/O: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error(transparent)]
    Buffer(#[from] crate::buffer::BufferError),
}
