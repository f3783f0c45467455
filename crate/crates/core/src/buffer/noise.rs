use serde::{Deserialize, Serialize};

use super::{loss_to_survival, BufferError, FiberLoop, PhotonTimeline};
use crate::qstate::QubitChannel;
use crate::scalar::Real;

/// Switch-actuation error probabilities, applied once per cross-state pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub bit_flip_per_cross: f64,
    pub phase_flip_per_cross: f64,
    pub bit_phase_flip_per_cross: f64,
    pub amplitude_damping_per_cross: f64,
}

/// Phase-damping parameter for a Gaussian birefringent phase of standard
/// deviation `sigma`: coherences shrink by `exp(-σ²/2) = √(1-λ)`.
pub fn pmd_phase_damping(sigma_rad: f64) -> f64 {
    1.0 - (-sigma_rad * sigma_rad).exp()
}

/// Decoherence seen by the buffered idler: loss, PMD dephasing over the
/// propagated length, then switch-actuation errors for every cross pass.
pub fn channel_for_timeline<T: Real>(
    tl: &PhotonTimeline,
    fiber: &FiberLoop,
    noise: &NoiseConfig,
) -> Result<QubitChannel<T>, BufferError> {
    let retrieve = tl.retrieve().ok_or(BufferError::NoRetrieval)?;
    let mut ch = QubitChannel::<T>::identity();

    let eta = loss_to_survival(retrieve.accumulated_loss_db)?;
    if eta < 1.0 {
        ch = ch.then(&QubitChannel::loss(T::lit(eta))?);
    }

    let sigma = fiber.pmd_dephasing_per_km * tl.propagated_length_m / 1e3;
    if sigma > 0.0 {
        ch = ch.then(&QubitChannel::phase_damping(T::lit(pmd_phase_damping(sigma)))?);
    }

    let per_cross = [
        (noise.bit_flip_per_cross, 1),
        (noise.phase_flip_per_cross, 3),
        (noise.bit_phase_flip_per_cross, 2),
    ];
    for _ in 0..tl.cross_passes {
        for &(p, k) in &per_cross {
            if p > 0.0 {
                ch = ch.then(&QubitChannel::pauli_flip(k, T::lit(p))?);
            }
        }
        if noise.amplitude_damping_per_cross > 0.0 {
            ch = ch.then(&QubitChannel::amplitude_damping(T::lit(
                noise.amplitude_damping_per_cross,
            ))?);
        }
    }
    Ok(ch.pruned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::{simulate_timeline, BufferTopology, RfPattern, SwitchSpec};
    use crate::qstate::{channel_to_chi, max_abs_diff, Mat2};
    use crate::scalar::cr;
    use nalgebra::Matrix2;

    fn lossless_switch() -> SwitchSpec {
        SwitchSpec {
            loss_cross_db: 0.0,
            loss_straight_db: 0.0,
            ..SwitchSpec::default()
        }
    }

    fn timeline(fiber: &FiberLoop, sw: &SwitchSpec) -> PhotonTimeline {
        let p = RfPattern::from_rate(19e3, 2).unwrap();
        simulate_timeline(&p, fiber, &BufferTopology::loop_ports_2_4(), sw).unwrap()
    }

    #[test]
    fn lossless_noiseless_is_identity() {
        let mut fiber = FiberLoop::smf28_km(5.4);
        fiber.attenuation_db_per_km = 0.0;
        let ch: QubitChannel<f64> =
            channel_for_timeline(&timeline(&fiber, &lossless_switch()), &fiber, &NoiseConfig::default())
                .unwrap();
        assert_eq!(ch.kraus_ops().len(), 1);
        assert!(max_abs_diff(&ch.kraus_ops()[0], &Mat2::identity()) <= 1e-15);
    }

    #[test]
    fn three_db_loss_is_scalar_kraus() {
        let fiber = FiberLoop::smf28_km(5.4);
        let sw = SwitchSpec {
            loss_cross_db: 1.5,
            loss_straight_db: 0.0,
            ..SwitchSpec::default()
        };
        let mut fiber0 = fiber.clone();
        fiber0.attenuation_db_per_km = 0.0;
        let tl = timeline(&fiber0, &sw);
        assert!((tl.exit_loss_db() - 3.0).abs() < 1e-12);
        let ch: QubitChannel<f64> = channel_for_timeline(&tl, &fiber0, &NoiseConfig::default()).unwrap();
        assert_eq!(ch.kraus_ops().len(), 1);
        let k = ch.kraus_ops()[0];
        assert!((k[(0, 0)].re - 0.501f64.sqrt()).abs() < 1e-3);
        assert!((k[(0, 0)] - k[(1, 1)]).norm() < 1e-15);
    }

    #[test]
    fn pmd_only_gives_phase_damping_kraus() {
        let mut fiber = FiberLoop::smf28_km(5.4);
        fiber.attenuation_db_per_km = 0.0;
        // choose σ so that λ = 0.1 over the 10.8 km propagated
        let sigma = (-(0.9f64).ln()).sqrt();
        fiber.pmd_dephasing_per_km = sigma / 10.8;
        let tl = timeline(&fiber, &lossless_switch());
        let ch: QubitChannel<f64> = channel_for_timeline(&tl, &fiber, &NoiseConfig::default()).unwrap();
        let z = cr(0.0);
        let k0 = Matrix2::new(cr(1.0), z, z, cr(0.9f64.sqrt()));
        let k1 = Matrix2::new(z, z, z, cr(0.1f64.sqrt()));
        assert_eq!(ch.kraus_ops().len(), 2);
        assert!(max_abs_diff(&ch.kraus_ops()[0], &k0) < 1e-12);
        assert!(max_abs_diff(&ch.kraus_ops()[1], &k1) < 1e-12);
        let chi = channel_to_chi(&ch).unwrap();
        let p = (1.0 - 0.9f64.sqrt()) / 2.0;
        assert!((chi.diagonal()[3] - p).abs() < 1e-12);
    }

    #[test]
    fn switch_noise_per_cross_pass() {
        let fiber = FiberLoop::smf28_km(5.4);
        let noise = NoiseConfig {
            bit_flip_per_cross: 0.01,
            ..NoiseConfig::default()
        };
        let tl = timeline(&fiber, &SwitchSpec::default());
        let ch: QubitChannel<f64> = channel_for_timeline(&tl, &fiber, &noise).unwrap();
        let chi = channel_to_chi(&ch).unwrap();
        // two independent flips: p_total = 2p(1-p)
        assert!((chi.diagonal()[1] - 2.0 * 0.01 * 0.99).abs() < 1e-12);
    }

    #[test]
    fn leaked_timeline_has_no_channel() {
        let p = RfPattern::from_rate(55.8e3, 2).unwrap();
        let fiber = FiberLoop::smf28_km(1.85);
        let tl = simulate_timeline(&p, &fiber, &BufferTopology::loop_ports_2_4(), &SwitchSpec::default())
            .unwrap();
        assert_eq!(
            channel_for_timeline::<f64>(&tl, &fiber, &NoiseConfig::default()),
            Err(BufferError::NoRetrieval)
        );
    }
}
