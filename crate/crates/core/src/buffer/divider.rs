use serde::Serialize;

use super::timeline::{check_switch, walk_loop};
use super::{
    unit_t_from_loop, BufferError, BufferTopology, EventKind, FiberLoop, PhotonTimeline, RfPattern,
    SwitchSpec, TimelineEvent, TopologyVariant, DIVIDER_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum DividerRoute {
    /// Straight through the 2×2 switch without entering a loop.
    Bypass,
    /// Path whose round trip matches the RF ON window: stored for N trips.
    Multiple { path: usize },
    /// Path shorter than the ON window by an integer factor: leaves after one trip.
    Divided { path: usize },
    /// Photon on a short path that enters at the tail of the ON window and
    /// recirculates through the whole OFF window.
    Ghost { path: usize },
}

/// One reachable output of the multiplier/divider buffer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DividerOutcome {
    pub route: DividerRoute,
    pub timeline: PhotonTimeline,
    /// Integer ratio between the RF ON window and this path's round trip.
    pub divisor: u32,
    /// Fraction of photons arriving during the ON window that take this route.
    pub phase_fraction: f64,
}

impl DividerOutcome {
    pub fn buffer_time_s(&self) -> f64 {
        self.timeline.total_buffer_time_s
    }

    pub fn survival(&self) -> f64 {
        10f64.powf(-self.timeline.exit_loss_db() / 10.0)
    }

    /// Relative output weight: phase fraction × transmission.
    pub fn weight(&self) -> f64 {
        self.phase_fraction * self.survival()
    }
}

fn bypass(sw: &SwitchSpec) -> PhotonTimeline {
    let ev = |kind| TimelineEvent {
        time_s: 0.0,
        kind,
        accumulated_loss_db: sw.loss_straight_db,
    };
    PhotonTimeline {
        events: vec![ev(EventKind::Inject), ev(EventKind::Retrieve)],
        total_buffer_time_s: 0.0,
        round_trips: 0,
        cross_passes: 0,
        propagated_length_m: 0.0,
    }
}

/// Enumerates every route through the multiplier/divider topology under one RF pattern.
///
/// A path whose round trip equals the ON window is stored for the pattern's N
/// trips. A path that is `D` times shorter than the ON window returns while
/// the switch is still in the cross state and exits after one trip; photons
/// injected during the last round trip of the ON window instead return during
/// OFF and circulate `(N-1)·D + 1` times before the next cross transition.
pub fn divider_schedule(
    topo: &BufferTopology,
    pattern: &RfPattern,
    sw: &SwitchSpec,
) -> Result<Vec<DividerOutcome>, BufferError> {
    sw.validate()?;
    topo.validate()?;
    let divider = match (&topo.divider, topo.variant) {
        (Some(d), TopologyVariant::MultiplierDivider) => d,
        _ => {
            return Err(BufferError::Config(
                "divider schedule requires a MULTIPLIER_DIVIDER topology".into(),
            ))
        }
    };
    if pattern.is_dc() {
        return Err(BufferError::Config("divider schedule needs an RF-driven pattern".into()));
    }
    check_switch(pattern, sw)?;
    let rate = pattern.repetition_rate_hz();
    if divider.selector_rate_hz >= rate {
        return Err(BufferError::Config(format!(
            "1x2 selectors ({} Hz) must switch slower than the loop clock ({rate:.1} Hz)",
            divider.selector_rate_hz
        )));
    }
    if rate > topo.leak_threshold() {
        return Err(BufferError::Config(format!(
            "loop clock {rate:.1} Hz above leak threshold {:.1} Hz",
            topo.leak_threshold()
        )));
    }

    let n_trips = pattern.n_trips();
    let extra: f64 = divider.per_pass_losses_db().iter().sum();
    let mut out = vec![DividerOutcome {
        route: DividerRoute::Bypass,
        timeline: bypass(sw),
        divisor: 0,
        phase_fraction: 1.0,
    }];
    for (path, fiber) in divider.paths.iter().enumerate() {
        out.extend(path_outcomes(path, fiber, pattern, n_trips, sw, extra)?);
    }
    Ok(out)
}

fn path_outcomes(
    path: usize,
    fiber: &FiberLoop,
    pattern: &RfPattern,
    n_trips: u32,
    sw: &SwitchSpec,
    extra: f64,
) -> Result<Vec<DividerOutcome>, BufferError> {
    let ratio = pattern.on_duration_s / unit_t_from_loop(fiber);
    let divisor = ratio.round();
    if divisor < 1.0 || (ratio - divisor).abs() > DIVIDER_TOLERANCE * divisor {
        return Err(BufferError::Config(format!(
            "path {path} ({} m) is not commensurate with the RF ON window (ratio {ratio:.4})",
            fiber.length_m
        )));
    }
    let divisor = divisor as u32;
    if divisor == 1 {
        return Ok(vec![DividerOutcome {
            route: DividerRoute::Multiple { path },
            timeline: walk_loop(n_trips, fiber, sw, extra, false, EventKind::Retrieve),
            divisor,
            phase_fraction: 1.0,
        }]);
    }
    let d = f64::from(divisor);
    let ghost_trips = (n_trips - 1) * divisor + 1;
    Ok(vec![
        DividerOutcome {
            route: DividerRoute::Divided { path },
            timeline: walk_loop(1, fiber, sw, extra, false, EventKind::Retrieve),
            divisor,
            phase_fraction: (d - 1.0) / d,
        },
        DividerOutcome {
            route: DividerRoute::Ghost { path },
            timeline: walk_loop(ghost_trips, fiber, sw, extra, false, EventKind::GhostExit),
            divisor,
            phase_fraction: 1.0 / d,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::{insertion_loss_db, DividerConfig};

    fn fig5() -> (BufferTopology, RfPattern) {
        let topo = BufferTopology::multiplier_divider(DividerConfig::new(vec![
            FiberLoop::ull_km(4.0),
            FiberLoop::ull_km(1.0),
        ]));
        (topo, RfPattern::from_rate(25.6e3, 2).unwrap())
    }

    fn find(out: &[DividerOutcome], route: DividerRoute) -> &DividerOutcome {
        out.iter().find(|o| o.route == route).unwrap()
    }

    #[test]
    fn three_buffer_times_and_ghost() {
        let (topo, p) = fig5();
        let out = divider_schedule(&topo, &p, &SwitchSpec::default()).unwrap();
        assert_eq!(out.len(), 4);
        for o in &out {
            o.timeline.validate().unwrap();
        }
        assert_eq!(find(&out, DividerRoute::Bypass).buffer_time_s(), 0.0);
        let long = find(&out, DividerRoute::Multiple { path: 0 }).buffer_time_s();
        assert!(((long - 39.1e-6) / 39.1e-6).abs() < 0.01);
        let short = find(&out, DividerRoute::Divided { path: 1 });
        assert!(((short.buffer_time_s() - 4.9e-6) / 4.9e-6).abs() < 0.01);
        assert_eq!(short.divisor, 4);
        let ratio = long / short.buffer_time_s();
        assert!((7.9..=8.1).contains(&ratio), "{ratio}");
        let ghost = find(&out, DividerRoute::Ghost { path: 1 });
        assert_eq!(ghost.timeline.round_trips, 5);
        assert!(ghost.timeline.count(EventKind::Recirculate) >= 4);
        assert!(((ghost.buffer_time_s() - 5.0 * 4.9e-6) / 24.5e-6).abs() < 0.01);
        assert_eq!(ghost.timeline.exit().kind, EventKind::GhostExit);
    }

    #[test]
    fn losses_include_selector_switches() {
        let (topo, p) = fig5();
        let sw = SwitchSpec::default();
        let out = divider_schedule(&topo, &p, &sw).unwrap();
        let long = find(&out, DividerRoute::Multiple { path: 0 });
        let closed = insertion_loss_db(2, &FiberLoop::ull_km(4.0), &sw, &[0.01; 4]).unwrap();
        assert!((long.timeline.exit_loss_db() - closed).abs() < 1e-12);
        let ghost = find(&out, DividerRoute::Ghost { path: 1 });
        let closed = insertion_loss_db(5, &FiberLoop::ull_km(1.0), &sw, &[0.01; 10]).unwrap();
        assert!((ghost.timeline.exit_loss_db() - closed).abs() < 1e-12);
    }

    #[test]
    fn incommensurate_path_is_rejected() {
        let topo = BufferTopology::multiplier_divider(DividerConfig::new(vec![FiberLoop::ull_km(1.5)]));
        let p = RfPattern::from_rate(25.6e3, 2).unwrap();
        assert!(matches!(
            divider_schedule(&topo, &p, &SwitchSpec::default()),
            Err(BufferError::Config(_))
        ));
    }

    #[test]
    fn requires_divider_topology() {
        let p = RfPattern::from_rate(25.6e3, 2).unwrap();
        assert!(divider_schedule(&BufferTopology::loop_ports_2_4(), &p, &SwitchSpec::default()).is_err());
    }
}
