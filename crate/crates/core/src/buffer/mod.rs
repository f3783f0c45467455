//! Fiber-loop buffer: 2×2 switch state machine, RF scheduling, loss budget,
//! the 1×2-switch multiplier/divider topology, and the decoherence channel a
//! stored photon picks up.

mod components;
mod divider;
mod noise;
mod timeline;

pub use components::{
    BufferTopology, DividerConfig, FiberLoop, RfPattern, SwitchSpec, TopologyVariant,
};
pub use divider::{divider_schedule, DividerOutcome, DividerRoute};
pub use noise::{channel_for_timeline, pmd_phase_damping, NoiseConfig};
pub use timeline::{
    buffer_time, insertion_loss_db, rf_pattern_for, simulate_timeline, unit_t_from_loop,
    EventKind, PhotonTimeline, TimelineEvent,
};

use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Group index of standard single-mode fiber at 1550 nm used throughout.
pub const DEFAULT_GROUP_INDEX: f64 = 1.468;
/// Relative mismatch tolerated between the RF ON window and the loop round trip.
pub const RF_TIMING_TOLERANCE: f64 = 0.02;
/// Off/on integer-multiple tolerance for an RF pattern.
pub const RF_MULTIPLE_TOLERANCE: f64 = 1e-3;
/// Commensurability tolerance between divider paths and the RF unit.
pub const DIVIDER_TOLERANCE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BufferError {
    #[error("{0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("scheduling error: {0}")]
    Scheduling(String),
    #[error("switch capability exceeded: {0}")]
    SwitchCapability(String),
    #[error("timeline has no RETRIEVE event")]
    NoRetrieval,
    #[error(transparent)]
    Channel(#[from] crate::qstate::QstateError),
}

/// Transmission probability for a loss in dB: `10^(-dB/10)`.
pub fn loss_to_survival(loss_db: f64) -> Result<f64, BufferError> {
    if !(loss_db >= 0.0) {
        return Err(BufferError::Domain(format!("loss must be >= 0 dB, got {loss_db}")));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_examples() {
        assert_eq!(loss_to_survival(0.0).unwrap(), 1.0);
        assert!((loss_to_survival(3.48).unwrap() - 0.4487).abs() < 1e-4);
        assert!((loss_to_survival(10.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(loss_to_survival(-1.0), Err(BufferError::Domain(_))));
    }
}
