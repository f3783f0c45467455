use std::collections::BTreeMap;

use serde::Serialize;

use super::{HarnessError, NoiseProfile, Scenario, StageError};
use crate::buffer::{
    channel_for_timeline, divider_schedule, rf_pattern_for, simulate_timeline, DividerOutcome,
    DividerRoute, FiberLoop, PhotonTimeline, RfPattern, TopologyVariant,
};
use crate::counting::{simulate_dataset, CountRecord};
use crate::qstate::{apply_channel_idler, bell_state, ChiMatrix, TwoQubitState};
use crate::tomography::{
    reconstruct_chi_with_reference, reconstruct_state, report_metrics, Metrics, MleConfig,
};

/// Seed offset separating the source-calibration dataset from the buffered one.
const REFERENCE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

pub const FLAG_NEGLIGIBLE_SINGLES: &str = "negligible_single_counts";
pub const FLAG_UNEXPECTED_LEAK: &str = "unexpected_leak";
pub const FLAG_MISSING_LEAK: &str = "expected_leak_not_observed";

/// Knobs applied on top of every scenario of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    /// Replaces each scenario's seed when set.
    pub seed: Option<u64>,
    /// Multiplies every integration time.
    pub counts_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            counts_scale: 1.0,
        }
    }
}

impl RunOptions {
    fn validate(&self) -> Result<(), HarnessError> {
        if !(self.counts_scale > 0.0 && self.counts_scale.is_finite()) {
            return Err(HarnessError::Invalid("counts_scale must be > 0".into()));
        }
        Ok(())
    }
}

/// Reconstructed objects behind a result, kept in memory for the artifact writer.
#[derive(Debug, Clone, PartialEq)]
pub struct RunData {
    pub dataset: Vec<CountRecord>,
    pub rho: TwoQubitState<f64>,
    pub chi: ChiMatrix<f64>,
}

/// Outcome of one scenario (or one divider route).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub scenario: String,
    pub buffer_time_s: f64,
    pub insertion_loss_db: f64,
    pub leaked: bool,
    pub timeline: PhotonTimeline,
    /// Absent when the photon was not retrieved.
    pub metrics: Option<Metrics>,
    pub flags: Vec<String>,
    /// Artifact name to path, relative to the run directory.
    pub artifacts: BTreeMap<String, String>,
    #[serde(skip)]
    pub data: Option<RunData>,
}

impl RunResult {
    fn from_timeline(scenario: String, timeline: PhotonTimeline) -> Self {
        Self {
            scenario,
            buffer_time_s: timeline.total_buffer_time_s,
            insertion_loss_db: timeline.exit_loss_db(),
            leaked: timeline.leaked(),
            timeline,
            metrics: None,
            flags: Vec::new(),
            artifacts: BTreeMap::new(),
            data: None,
        }
    }

    /// Leak outcome disagrees with the scenario's expectation.
    pub fn is_unexpected(&self) -> bool {
        self.flags
            .iter()
            .any(|f| f == FLAG_UNEXPECTED_LEAK || f == FLAG_MISSING_LEAK)
    }
}

fn stage<E: Into<StageError>>(name: &str) -> impl FnOnce(E) -> HarnessError + '_ {
    move |e| HarnessError::scenario(name, e)
}

/// Source state, calibration reference and measurement settings of a scenario.
struct Measurement<'a> {
    scenario: &'a Scenario,
    noise: NoiseProfile,
    seed: u64,
    integration_time_s: f64,
}

impl<'a> Measurement<'a> {
    fn new(s: &'a Scenario, opts: &RunOptions) -> Result<Self, HarnessError> {
        opts.validate()?;
        s.validate()?;
        Ok(Self {
            scenario: s,
            noise: s.noise.resolve()?,
            seed: opts.seed.unwrap_or(s.seed),
            integration_time_s: s.counting.integration_time_s * opts.counts_scale,
        })
    }

    fn name(&self) -> &str {
        &self.scenario.name
    }

    fn source(&self) -> TwoQubitState<f64> {
        bell_state::<f64>().with_white_noise(self.noise.source_white_noise)
    }

    fn mle(&self) -> MleConfig {
        MleConfig {
            seed: self.seed,
            ..MleConfig::default()
        }
    }

    fn with_pmd(&self, fiber: &FiberLoop) -> FiberLoop {
        fiber.clone().with_pmd(self.noise.pmd_dephasing_per_km)
    }

    /// Tomography of the unbuffered source, used as the EAPT input state.
    fn reference(&self, source: &TwoQubitState<f64>) -> Result<TwoQubitState<f64>, HarnessError> {
        let cfg = self
            .scenario
            .counting
            .config(self.noise.accidental_rate, self.seed ^ REFERENCE_SEED_SALT);
        let data = simulate_dataset(source, &cfg, self.integration_time_s).map_err(stage(self.name()))?;
        reconstruct_state(&data, &self.mle()).map_err(stage(self.name()))
    }

    /// Sends the idler through the buffer channel, counts, and reconstructs ρ and χ.
    fn measure(
        &self,
        timeline: &PhotonTimeline,
        fiber: &FiberLoop,
        source: &TwoQubitState<f64>,
        reference: &TwoQubitState<f64>,
    ) -> Result<(Metrics, RunData), HarnessError> {
        let name = self.name();
        let channel = channel_for_timeline::<f64>(timeline, fiber, &self.noise.switch).map_err(stage(name))?;
        let out = apply_channel_idler(source, &channel).map_err(stage(name))?;
        let mut cfg = self.scenario.counting.config(self.noise.accidental_rate, self.seed);
        cfg.idler_arm_loss_db += timeline.exit_loss_db();
        let dataset = simulate_dataset(&out.state, &cfg, self.integration_time_s).map_err(stage(name))?;
        let rho = reconstruct_state(&dataset, &self.mle()).map_err(stage(name))?;
        let chi = reconstruct_chi_with_reference(&rho, reference).map_err(stage(name))?;
        Ok((report_metrics(&rho, &chi), RunData { dataset, rho, chi }))
    }
}

fn pattern_for(s: &Scenario, fiber: Option<&FiberLoop>) -> Result<RfPattern, HarnessError> {
    let pattern = match (s.rf_rate_hz, fiber) {
        (Some(rate), _) => RfPattern::from_rate(rate, s.n_trips),
        (None, Some(f)) => rf_pattern_for(s.n_trips, f),
        (None, None) => {
            return Err(HarnessError::Invalid(format!(
                "scenario `{}` needs rf_rate_hz for the divider topology",
                s.name
            )))
        }
    };
    pattern.map_err(stage(&s.name))
}

/// Runs one loop-buffer scenario end to end: Bell source → buffer timeline →
/// decoherence channel → counting → MLE → EAPT → metrics.
///
/// A leaked photon yields a result with `leaked` set and no metrics.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<RunResult, HarnessError> {
    let m = Measurement::new(s, opts)?;
    if s.topology.variant == TopologyVariant::MultiplierDivider {
        return Err(HarnessError::Invalid(format!(
            "scenario `{}` uses MULTIPLIER_DIVIDER; run it with run_divider",
            s.name
        )));
    }
    let fiber = m.with_pmd(s.fiber.as_ref().expect("validated"));
    let pattern = pattern_for(s, Some(&fiber))?;
    let timeline =
        simulate_timeline(&pattern, &fiber, &s.topology, &s.switch_spec).map_err(stage(&s.name))?;
    let mut result = RunResult::from_timeline(s.name.clone(), timeline);

    match (result.leaked, s.expected_leak) {
        (true, false) => result.flags.push(FLAG_UNEXPECTED_LEAK.into()),
        (false, true) => result.flags.push(FLAG_MISSING_LEAK.into()),
        _ => {}
    }
    if result.leaked {
        return Ok(result);
    }
    let source = m.source();
    let reference = m.reference(&source)?;
    let (metrics, data) = m.measure(&result.timeline, &fiber, &source, &reference)?;
    result.metrics = Some(metrics);
    result.data = Some(data);
    Ok(result)
}

fn route_name(base: &str, route: DividerRoute) -> String {
    match route {
        DividerRoute::Bypass => format!("{base}.bypass"),
        DividerRoute::Multiple { path } => format!("{base}.multiple_path{path}"),
        DividerRoute::Divided { path } => format!("{base}.divided_path{path}"),
        DividerRoute::Ghost { path } => format!("{base}.ghost_path{path}"),
    }
}

/// Every route of a MULTIPLIER_DIVIDER scenario, with fidelities for the
/// retrievable ones. A ghost exit whose weight relative to the divided
/// output of the same path falls below `ghost_floor` is flagged as
/// negligible single counts.
pub fn run_divider(s: &Scenario, opts: &RunOptions) -> Result<Vec<RunResult>, HarnessError> {
    let m = Measurement::new(s, opts)?;
    let divider = match (&s.topology.divider, s.topology.variant) {
        (Some(d), TopologyVariant::MultiplierDivider) => d,
        _ => {
            return Err(HarnessError::Invalid(format!(
                "scenario `{}` is not a MULTIPLIER_DIVIDER topology",
                s.name
            )))
        }
    };
    let pattern = pattern_for(s, None)?;
    let outcomes = divider_schedule(&s.topology, &pattern, &s.switch_spec).map_err(stage(&s.name))?;
    let source = m.source();
    let reference = m.reference(&source)?;

    let divided_weight = |path: usize| {
        outcomes
            .iter()
            .find(|o| o.route == DividerRoute::Divided { path })
            .map(DividerOutcome::weight)
    };
    let mut results = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let mut r = RunResult::from_timeline(route_name(&s.name, o.route), o.timeline.clone());
        match o.route {
            DividerRoute::Ghost { path } => {
                let relative = divided_weight(path).map(|w| o.weight() / w).unwrap_or(0.0);
                if relative < s.ghost_floor {
                    r.flags.push(FLAG_NEGLIGIBLE_SINGLES.into());
                }
            }
            route => {
                let fiber = match route {
                    DividerRoute::Multiple { path } | DividerRoute::Divided { path } => {
                        m.with_pmd(&divider.paths[path])
                    }
                    _ => m.with_pmd(&divider.paths[0]),
                };
                let (metrics, data) = m.measure(&o.timeline, &fiber, &source, &reference)?;
                r.metrics = Some(metrics);
                r.data = Some(data);
            }
        }
        results.push(r);
    }
    Ok(results)
}

/// Dispatches on the topology: loop scenarios give one result, divider scenarios one per route.
pub fn run_any(s: &Scenario, opts: &RunOptions) -> Result<Vec<RunResult>, HarnessError> {
    if s.topology.variant == TopologyVariant::MultiplierDivider {
        run_divider(s, opts)
    } else {
        run_scenario(s, opts).map(|r| vec![r])
    }
}
