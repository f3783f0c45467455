use serde::{Deserialize, Serialize};

use crate::qstate::{bell_state, process_fidelity, state_fidelity, ChiMatrix, TwoQubitState};
use crate::scalar::Real;

/// Figures of merit for one reconstructed state and process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(rename = "F")]
    pub state_fidelity: f64,
    #[serde(rename = "F_chi")]
    pub process_fidelity: f64,
    pub purity: f64,
    pub chi_diag: [f64; 4],
    pub concurrence: f64,
    /// Reserved for bootstrap error bars.
    pub error_bars: Option<serde_json::Value>,
}

/// Fidelity against |ψ∘⟩, process fidelity against the identity, purity and χ diagonal.
pub fn report_metrics<T: Real>(rho: &TwoQubitState<T>, chi: &ChiMatrix<T>) -> Metrics {
    let target = bell_state::<T>();
    let f = state_fidelity(rho, &target).expect("Bell target is pure");
    Metrics {
        state_fidelity: f.as_f64(),
        process_fidelity: process_fidelity(chi, &ChiMatrix::identity()).as_f64(),
        purity: rho.purity().as_f64(),
        chi_diag: chi.diagonal().map(Real::as_f64),
        concurrence: rho.concurrence().as_f64(),
        error_bars: None,
    }
}
