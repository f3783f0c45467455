//! Simulation of a switched fiber-loop buffer storing one photon of a
//! polarization-entangled pair: switch timing and loss accounting,
//! decoherence channels, coincidence counting, maximum-likelihood state
//! tomography and entanglement-assisted process tomography.
//!
//! The quantum algebra, counting and tomography layers are generic over the
//! scalar type ([`Real`], implemented for `f32` and `f64`). Timing, loss
//! budgets and the experiment harness work in SI units with `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod buffer;
pub mod counting;
pub mod harness;
pub mod qstate;
pub mod scalar;
pub mod tomography;

pub use scalar::Real;

pub type DensityMatrix = qstate::TwoQubitState<f64>;
pub type Channel = qstate::QubitChannel<f64>;
pub type Chi = qstate::ChiMatrix<f64>;

pub type DensityMatrixF32 = qstate::TwoQubitState<f32>;
pub type ChannelF32 = qstate::QubitChannel<f32>;
pub type ChiF32 = qstate::ChiMatrix<f32>;
