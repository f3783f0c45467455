//! Maximum-likelihood state reconstruction and entanglement-assisted process
//! tomography from the 16-setting coincidence data.

mod bfgs;
mod eapt;
mod metrics;
mod mle;

pub use bfgs::{minimize, BfgsOutcome};
pub use eapt::{reconstruct_chi_eapt, reconstruct_chi_with_reference};
pub use metrics::{report_metrics, Metrics};
pub use mle::{
    factor_to_state, fit_state, neg_log_likelihood, reconstruct_state, MleConfig, MleFit,
    N_PARAMS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomographyError {
    #[error("need at least 16 count records, got {0}")]
    TooFewRecords(usize),
    #[error("all accidental-subtracted counts are zero")]
    InsufficientData,
    #[error("measurement settings are not tomographically complete (condition number {0:e})")]
    DesignSingular(f64),
    #[error("reference state is not faithful enough to invert (condition number {0:e})")]
    ReferenceSingular(f64),
    #[error("invalid MLE configuration: {0}")]
    Config(String),
    #[error(transparent)]
    State(#[from] crate::qstate::QstateError),
}
