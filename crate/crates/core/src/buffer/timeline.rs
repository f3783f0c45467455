use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use super::{
    BufferError, BufferTopology, FiberLoop, RfPattern, SwitchSpec, TopologyVariant,
    RF_TIMING_TOLERANCE, SPEED_OF_LIGHT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Inject,
    Recirculate,
    Leak,
    Retrieve,
    GhostExit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineEvent {
    #[serde(serialize_with = "scientific")]
    pub time_s: f64,
    pub kind: EventKind,
    pub accumulated_loss_db: f64,
}

/// Ordered switch/loop events for one photon, times relative to injection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonTimeline {
    pub events: Vec<TimelineEvent>,
    #[serde(serialize_with = "scientific")]
    pub total_buffer_time_s: f64,
    /// Loop traversals before the photon leaves; 0 for a bypass.
    pub round_trips: u32,
    /// Passes through the 2×2 switch in the cross state.
    pub cross_passes: u32,
    pub propagated_length_m: f64,
}

fn scientific<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format!("{x:e}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

impl PhotonTimeline {
    pub fn retrieve(&self) -> Option<&TimelineEvent> {
        self.events.iter().find(|e| e.kind == EventKind::Retrieve)
    }

    pub fn leaked(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::Leak)
    }

    /// The event at which the photon leaves the buffer.
    pub fn exit(&self) -> &TimelineEvent {
        self.events.last().expect("timeline has an INJECT event")
    }

    /// Loss at the exit event.
    pub fn exit_loss_db(&self) -> f64 {
        self.exit().accumulated_loss_db
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Checks ordering and event-multiplicity invariants.
    pub fn validate(&self) -> Result<(), BufferError> {
        let bad = |msg: &str| Err(BufferError::Scheduling(format!("malformed timeline: {msg}")));
        if self.count(EventKind::Inject) != 1 || self.events[0].kind != EventKind::Inject {
            return bad("exactly one leading INJECT required");
        }
        if self.count(EventKind::Retrieve) > 1 {
            return bad("more than one RETRIEVE");
        }
        for w in self.events.windows(2) {
            // a zero-delay bypass retrieves at the injection instant
            let strictly = w[1].time_s > w[0].time_s;
            let bypass = self.round_trips == 0 && w[1].time_s == w[0].time_s;
            if !(strictly || bypass) {
                return bad("event times not increasing");
            }
        }
        let terminal = self.count(EventKind::Leak)
            + self.count(EventKind::Retrieve)
            + self.count(EventKind::GhostExit);
        if terminal != 1 || self.events.last().map(|e| e.kind) == Some(EventKind::Recirculate) {
            return bad("exactly one terminal LEAK, RETRIEVE or GHOST_EXIT event required");
        }
        Ok(())
    }
}

/// `n_trips · L · n_r / c`.
pub fn buffer_time(n_trips: u32, fiber: &FiberLoop) -> Result<f64, BufferError> {
    if n_trips < 1 {
        return Err(BufferError::Domain("n_trips must be >= 1".into()));
    }
    Ok(f64::from(n_trips) * fiber.length_m * fiber.group_index / SPEED_OF_LIGHT)
}

/// One round-trip time of the loop, the RF unit delay T.
pub fn unit_t_from_loop(fiber: &FiberLoop) -> f64 {
    fiber.length_m * fiber.group_index / SPEED_OF_LIGHT
}

/// ON for one round trip, OFF for `n_trips - 1`.
pub fn rf_pattern_for(n_trips: u32, fiber: &FiberLoop) -> Result<RfPattern, BufferError> {
    if n_trips < 1 {
        return Err(BufferError::Domain("n_trips must be >= 1".into()));
    }
    let t = unit_t_from_loop(fiber);
    RfPattern::new(t, t * f64::from(n_trips - 1))
}

/// Closed-form loss: two cross passes, `n-1` straight passes, fiber, and extra elements.
pub fn insertion_loss_db(
    n_trips: u32,
    fiber: &FiberLoop,
    sw: &SwitchSpec,
    extra_switch_losses_db: &[f64],
) -> Result<f64, BufferError> {
    if n_trips < 1 {
        return Err(BufferError::Domain("n_trips must be >= 1".into()));
    }
    let n = f64::from(n_trips);
    Ok(2.0 * sw.loss_cross_db
        + (n - 1.0) * sw.loss_straight_db
        + fiber.attenuation_db_per_km * n * fiber.length_km()
        + extra_switch_losses_db.iter().sum::<f64>())
}

/// Switch feasibility checks shared by every RF-driven route.
pub(super) fn check_switch(pattern: &RfPattern, sw: &SwitchSpec) -> Result<(), BufferError> {
    if pattern.is_dc() {
        return Ok(());
    }
    let rate = pattern.repetition_rate_hz();
    if rate > sw.max_rep_rate_hz {
        return Err(BufferError::SwitchCapability(format!(
            "RF rate {rate:.1} Hz exceeds switch maximum {:.1} Hz",
            sw.max_rep_rate_hz
        )));
    }
    if pattern.on_duration_s < 2.0 * sw.rise_fall_time_s {
        return Err(BufferError::SwitchCapability(format!(
            "ON window {:e} s shorter than rise + fall time",
            pattern.on_duration_s
        )));
    }
    Ok(())
}

/// Walks a photon injected at the start of an ON window through `n` loop passes.
/// Each pass adds fiber loss plus `extra_per_pass_db`.
pub(super) fn walk_loop(
    n_trips: u32,
    fiber: &FiberLoop,
    sw: &SwitchSpec,
    extra_per_pass_db: f64,
    leak: bool,
    final_kind: EventKind,
) -> PhotonTimeline {
    let t = unit_t_from_loop(fiber);
    let pass = fiber.pass_loss_db() + extra_per_pass_db;
    let mut loss = sw.loss_cross_db;
    let mut events = vec![TimelineEvent {
        time_s: 0.0,
        kind: EventKind::Inject,
        accumulated_loss_db: loss,
    }];
    let mut trips = 0;
    for k in 1..=n_trips {
        trips = k;
        loss += pass;
        let time_s = f64::from(k) * t;
        if leak && k == 1 {
            // leaks out of port 3 while the switch is nominally straight
            loss += sw.loss_straight_db;
            events.push(TimelineEvent {
                time_s,
                kind: EventKind::Leak,
                accumulated_loss_db: loss,
            });
            break;
        }
        if k == n_trips {
            loss += sw.loss_cross_db;
            events.push(TimelineEvent {
                time_s,
                kind: final_kind,
                accumulated_loss_db: loss,
            });
        } else {
            loss += sw.loss_straight_db;
            events.push(TimelineEvent {
                time_s,
                kind: EventKind::Recirculate,
                accumulated_loss_db: loss,
            });
        }
    }
    let exit = events.last().map(|e| e.time_s).unwrap_or(0.0);
    PhotonTimeline {
        cross_passes: if events.last().map(|e| e.kind) == Some(EventKind::Leak) { 1 } else { 2 },
        events,
        total_buffer_time_s: exit,
        round_trips: trips,
        propagated_length_m: f64::from(trips) * fiber.length_m,
    }
}

/// Event sequence for one photon stored under an RF pattern.
pub fn simulate_timeline(
    pattern: &RfPattern,
    fiber: &FiberLoop,
    topo: &BufferTopology,
    sw: &SwitchSpec,
) -> Result<PhotonTimeline, BufferError> {
    sw.validate()?;
    fiber.validate()?;
    topo.validate()?;
    if topo.variant == TopologyVariant::LoopPorts23 && !sw.v_pi_calibrated {
        return Err(BufferError::Config(
            "LOOP_PORTS_2_3 requires a V_pi-calibrated switch".into(),
        ));
    }
    check_switch(pattern, sw)?;

    let round_trip = unit_t_from_loop(fiber);
    let on = pattern.on_duration_s;
    if on < round_trip * (1.0 - RF_TIMING_TOLERANCE) {
        return Err(BufferError::Scheduling(format!(
            "ON window {on:e} s shorter than loop round trip {round_trip:e} s"
        )));
    }
    if !pattern.is_dc() && on > round_trip * (1.0 + RF_TIMING_TOLERANCE) {
        return Err(BufferError::Scheduling(format!(
            "ON window {on:e} s longer than loop round trip {round_trip:e} s; \
             the photon would exit after one pass"
        )));
    }

    let n_trips = if pattern.is_dc() { 1 } else { pattern.n_trips() };
    let extra = topo
        .divider
        .as_ref()
        .map(|d| d.per_pass_losses_db().iter().sum())
        .unwrap_or(0.0);
    let leak = !pattern.is_dc() && n_trips >= 2 && pattern.repetition_rate_hz() > topo.leak_threshold();
    Ok(walk_loop(n_trips, fiber, sw, extra, leak, EventKind::Retrieve))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn within(actual: f64, expect: f64, rel: f64) -> bool {
        ((actual - expect) / expect).abs() <= rel
    }

    #[test]
    fn buffer_time_examples() {
        assert!(within(buffer_time(2, &FiberLoop::smf28_km(5.4)).unwrap(), 52e-6, 0.03));
        assert!(within(buffer_time(3, &FiberLoop::smf28_km(3.0)).unwrap(), 44e-6, 0.03));
        assert!(within(buffer_time(2, &FiberLoop::smf28_km(1.3)).unwrap(), 12.7e-6, 0.01));
        assert!(buffer_time(1, &FiberLoop::smf28_km(1e-12)).unwrap() < 1e-17);
        assert!(matches!(buffer_time(0, &FiberLoop::smf28_km(1.0)), Err(BufferError::Domain(_))));
    }

    #[test]
    fn unit_delay_examples() {
        assert!(within(unit_t_from_loop(&FiberLoop::smf28_km(1.3)), 6.4e-6, 0.01));
        assert!(within(unit_t_from_loop(&FiberLoop::smf28_km(4.0)), 19.57e-6, 0.01));
        // 1 m * 1.468 / c
        assert!(within(unit_t_from_loop(&FiberLoop::smf28_km(0.001)), 4.9e-9, 0.01));
    }

    #[test]
    fn rf_pattern_examples() {
        let p = rf_pattern_for(3, &FiberLoop::smf28_km(3.0)).unwrap();
        assert!(within(p.repetition_rate_hz(), 22.7e3, 0.01));
        let p = rf_pattern_for(2, &FiberLoop::smf28_km(5.4)).unwrap();
        assert!(within(p.repetition_rate_hz(), 19e3, 0.03));
        let p = rf_pattern_for(1, &FiberLoop::smf28_km(2.0)).unwrap();
        assert_eq!(p.off_duration_s, 0.0);
    }

    #[test]
    fn insertion_loss_examples() {
        let sw = SwitchSpec::default();
        let il = |n, f: FiberLoop| insertion_loss_db(n, &f, &sw, &[]).unwrap();
        assert!((il(1, FiberLoop::smf28_km(5.4)) - 3.48).abs() < 1e-9);
        assert!((il(2, FiberLoop::smf28_km(5.4)) - 5.56).abs() < 1e-9);
        assert!((il(3, FiberLoop::smf28_km(3.0)) - 6.20).abs() < 1e-9);
        assert!((il(2, FiberLoop::ull_km(4.0)) - 4.60).abs() < 1e-9);
    }

    #[test]
    fn retrieve_at_19khz() {
        let fiber = FiberLoop::smf28_km(5.4);
        let p = RfPattern::from_rate(19e3, 2).unwrap();
        let tl = simulate_timeline(&p, &fiber, &BufferTopology::loop_ports_2_4(), &SwitchSpec::default())
            .unwrap();
        tl.validate().unwrap();
        let r = tl.retrieve().unwrap();
        assert!(within(r.time_s, 52e-6, 0.03));
        assert!(!tl.leaked());
        assert_eq!(tl.count(EventKind::Recirculate), 1);
        let closed = insertion_loss_db(2, &fiber, &SwitchSpec::default(), &[]).unwrap();
        assert!((r.accumulated_loss_db - closed).abs() < 1e-12);
    }

    #[test]
    fn leak_at_55_8khz_on_ports_2_4() {
        let p = RfPattern::from_rate(55.8e3, 2).unwrap();
        let tl = simulate_timeline(
            &p,
            &FiberLoop::smf28_km(1.85),
            &BufferTopology::loop_ports_2_4(),
            &SwitchSpec::default(),
        )
        .unwrap();
        tl.validate().unwrap();
        assert!(tl.leaked());
        assert!(tl.retrieve().is_none());
    }

    #[test]
    fn retrieve_at_78khz_on_ports_2_3() {
        let p = RfPattern::from_rate(78e3, 2).unwrap();
        let sw = SwitchSpec {
            v_pi_calibrated: true,
            ..SwitchSpec::default()
        };
        let tl = simulate_timeline(&p, &FiberLoop::smf28_km(1.3), &BufferTopology::loop_ports_2_3(), &sw)
            .unwrap();
        assert!(within(tl.retrieve().unwrap().time_s, 12.7e-6, 0.01));
        // uncalibrated switch cannot use this wiring
        assert!(simulate_timeline(
            &p,
            &FiberLoop::smf28_km(1.3),
            &BufferTopology::loop_ports_2_3(),
            &SwitchSpec::default()
        )
        .is_err());
    }

    #[test]
    fn scheduling_errors() {
        let fiber = FiberLoop::smf28_km(5.4);
        let topo = BufferTopology::loop_ports_2_4();
        let sw = SwitchSpec::default();
        let short = RfPattern::from_rate(25e3, 2).unwrap();
        assert!(matches!(
            simulate_timeline(&short, &fiber, &topo, &sw),
            Err(BufferError::Scheduling(_))
        ));
        let fast = RfPattern::from_rate(150e3, 2).unwrap();
        assert!(matches!(
            simulate_timeline(&fast, &FiberLoop::smf28_km(0.68), &topo, &sw),
            Err(BufferError::SwitchCapability(_))
        ));
    }

    #[test]
    fn dc_traveling_buffer_ignores_rate_limits() {
        let fiber = FiberLoop::smf28_km(0.002);
        let p = rf_pattern_for(1, &fiber).unwrap();
        let tl = simulate_timeline(&p, &fiber, &BufferTopology::loop_ports_2_4(), &SwitchSpec::default())
            .unwrap();
        assert!(within(tl.total_buffer_time_s, 9.7e-9, 0.02));
        assert_eq!(tl.round_trips, 1);
    }

    #[test]
    fn json_uses_scientific_times() {
        let fiber = FiberLoop::smf28_km(5.4);
        let p = RfPattern::from_rate(19e3, 2).unwrap();
        let tl = simulate_timeline(&p, &fiber, &BufferTopology::loop_ports_2_4(), &SwitchSpec::default())
            .unwrap();
        let text = serde_json::to_string(&tl).unwrap();
        assert!(text.contains(r#""time_s":0e0"#), "{text}");
        assert!(text.contains(r#""kind":"RECIRCULATE""#));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["total_buffer_time_s"].as_f64().unwrap() > 5e-5);
    }
}
