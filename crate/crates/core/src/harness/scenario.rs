use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::buffer::{BufferTopology, FiberLoop, NoiseConfig, SwitchSpec, TopologyVariant};
use crate::counting::CountingConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_PROFILE: &str = "paper-2023";
pub const DEFAULT_SEED: u64 = 42;
/// Ghost-to-divided weight ratio below which a ghost exit is reported as
/// negligible single counts.
pub const DEFAULT_GHOST_FLOOR: f64 = 0.2;

/// Calibrated decoherence constants shared by every scenario of a run.
///
/// `paper-2023` sets the source white-noise weight for a back-to-back
/// fidelity near 0.965 and a PMD dephasing rate that gives 0.94 after
/// 10.8 km of propagation. Switch-actuation errors are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseProfile {
    pub name: String,
    /// Gaussian birefringent phase spread per km of propagation, radians.
    pub pmd_dephasing_per_km: f64,
    /// Weight of I/4 mixed into the source Bell state.
    pub source_white_noise: f64,
    pub switch: NoiseConfig,
    /// Flat accidental coincidence rate, per second.
    pub accidental_rate: f64,
}

impl NoiseProfile {
    pub fn named(name: &str) -> Result<Self, HarnessError> {
        match name {
            "paper-2023" => Ok(Self {
                name: name.into(),
                pmd_dephasing_per_km: 0.0288,
                source_white_noise: 0.0467,
                switch: NoiseConfig::default(),
                accidental_rate: 50.0,
            }),
            "none" => Ok(Self {
                name: name.into(),
                pmd_dephasing_per_km: 0.0,
                source_white_noise: 0.0,
                switch: NoiseConfig::default(),
                accidental_rate: 0.0,
            }),
            other => Err(HarnessError::UnknownProfile(other.into())),
        }
    }
}

/// Named profile plus per-scenario overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub profile: String,
    pub pmd_dephasing_per_km: Option<f64>,
    pub source_white_noise: Option<f64>,
    pub bit_flip_per_cross: Option<f64>,
    pub phase_flip_per_cross: Option<f64>,
    pub bit_phase_flip_per_cross: Option<f64>,
    pub amplitude_damping_per_cross: Option<f64>,
    pub accidental_rate: Option<f64>,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::profile(DEFAULT_PROFILE)
    }
}

impl NoiseSpec {
    pub fn profile(name: &str) -> Self {
        Self {
            profile: name.into(),
            pmd_dephasing_per_km: None,
            source_white_noise: None,
            bit_flip_per_cross: None,
            phase_flip_per_cross: None,
            bit_phase_flip_per_cross: None,
            amplitude_damping_per_cross: None,
            accidental_rate: None,
        }
    }

    pub fn resolve(&self) -> Result<NoiseProfile, HarnessError> {
        let mut p = NoiseProfile::named(&self.profile)?;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.pmd_dephasing_per_km, self.pmd_dephasing_per_km);
        set(&mut p.source_white_noise, self.source_white_noise);
        set(&mut p.switch.bit_flip_per_cross, self.bit_flip_per_cross);
        set(&mut p.switch.phase_flip_per_cross, self.phase_flip_per_cross);
        set(&mut p.switch.bit_phase_flip_per_cross, self.bit_phase_flip_per_cross);
        set(&mut p.switch.amplitude_damping_per_cross, self.amplitude_damping_per_cross);
        set(&mut p.accidental_rate, self.accidental_rate);

        let probs = [
            ("source_white_noise", p.source_white_noise),
            ("bit_flip_per_cross", p.switch.bit_flip_per_cross),
            ("phase_flip_per_cross", p.switch.phase_flip_per_cross),
            ("bit_phase_flip_per_cross", p.switch.bit_phase_flip_per_cross),
            ("amplitude_damping_per_cross", p.switch.amplitude_damping_per_cross),
        ];
        for (field, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return Err(HarnessError::Invalid(format!("{field} = {v} is outside [0, 1]")));
            }
        }
        if !(p.pmd_dephasing_per_km >= 0.0 && p.pmd_dephasing_per_km.is_finite()) {
            return Err(HarnessError::Invalid("pmd_dephasing_per_km must be >= 0".into()));
        }
        if !(p.accidental_rate >= 0.0 && p.accidental_rate.is_finite()) {
            return Err(HarnessError::Invalid("accidental_rate must be >= 0".into()));
        }
        Ok(p)
    }
}

/// Source and detector settings of a scenario. The RNG seed and accidental
/// rate come from the scenario seed and noise profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountingSpec {
    pub pair_rate: f64,
    pub signal_arm_loss_db: f64,
    pub idler_arm_loss_db: f64,
    pub detector_gate_rate: f64,
    /// Integration time per analyzer setting, before `counts_scale`.
    pub integration_time_s: f64,
}

impl Default for CountingSpec {
    fn default() -> Self {
        let c = CountingConfig::default();
        Self {
            pair_rate: c.pair_rate,
            signal_arm_loss_db: c.signal_arm_loss_db,
            idler_arm_loss_db: c.idler_arm_loss_db,
            detector_gate_rate: c.detector_gate_rate,
            integration_time_s: 60.0,
        }
    }
}

impl CountingSpec {
    pub fn config(&self, accidental_rate: f64, seed: u64) -> CountingConfig {
        CountingConfig {
            pair_rate: self.pair_rate,
            signal_arm_loss_db: self.signal_arm_loss_db,
            idler_arm_loss_db: self.idler_arm_loss_db,
            accidental_rate,
            detector_gate_rate: self.detector_gate_rate,
            rng_seed: seed,
        }
    }
}

/// One experiment: a buffer configuration, its noise and the measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub topology: BufferTopology,
    /// Storage loop; unused by MULTIPLIER_DIVIDER, whose paths live in the topology.
    #[serde(rename = "loop", default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<FiberLoop>,
    pub n_trips: u32,
    /// RF repetition rate; derived from the loop round trip when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf_rate_hz: Option<f64>,
    #[serde(rename = "switch", default)]
    pub switch_spec: SwitchSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub counting: CountingSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub expected_leak: bool,
    #[serde(default = "default_ghost_floor")]
    pub ghost_floor: f64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_ghost_floor() -> f64 {
    DEFAULT_GHOST_FLOOR
}

impl Scenario {
    /// Scenario with default switch, noise and counting settings.
    pub fn new(name: &str, topology: BufferTopology, fiber: Option<FiberLoop>, n_trips: u32) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            topology,
            fiber,
            n_trips,
            rf_rate_hz: None,
            switch_spec: SwitchSpec::default(),
            noise: NoiseSpec::default(),
            counting: CountingSpec::default(),
            seed: DEFAULT_SEED,
            expected_leak: false,
            ghost_floor: DEFAULT_GHOST_FLOOR,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Schema(self.schema_version));
        }
        let valid_name = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || "-_.=+".contains(ch));
        if !valid_name {
            return Err(HarnessError::Invalid(format!(
                "scenario name `{}` must be non-empty and use only [A-Za-z0-9-_.=+]",
                self.name
            )));
        }
        if self.n_trips < 1 {
            return Err(HarnessError::Invalid("n_trips must be >= 1".into()));
        }
        if let Some(rate) = self.rf_rate_hz {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(HarnessError::Invalid("rf_rate_hz must be > 0".into()));
            }
        }
        let divider = self.topology.variant == TopologyVariant::MultiplierDivider;
        if !divider && self.fiber.is_none() {
            return Err(HarnessError::Invalid(format!(
                "scenario `{}` needs a `loop` for this topology",
                self.name
            )));
        }
        let loops = self.fiber.iter().chain(self.topology.divider.iter().flat_map(|d| &d.paths));
        if loops.into_iter().any(|f| f.pmd_dephasing_per_km != 0.0) {
            return Err(HarnessError::Invalid(
                "set PMD through noise.pmd_dephasing_per_km, not on the fiber".into(),
            ));
        }
        if !(self.counting.integration_time_s > 0.0) {
            return Err(HarnessError::Invalid("integration_time_s must be > 0".into()));
        }
        if !(self.ghost_floor >= 0.0) {
            return Err(HarnessError::Invalid("ghost_floor must be >= 0".into()));
        }
        self.noise.resolve()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "name": "row2",
        "topology": {"variant": "LOOP_PORTS_2_4"},
        "loop": {"length_m": 5400},
        "n_trips": 2,
        "rf_rate_hz": 19000
    }"#;

    #[test]
    fn minimal_file_takes_defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.noise.profile, DEFAULT_PROFILE);
        assert_eq!(s.switch_spec, SwitchSpec::default());
        assert_eq!(s.fiber.as_ref().unwrap().attenuation_db_per_km, 0.2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = MINIMAL.replace("\"n_trips\"", "\"n_trip\"");
        assert!(Scenario::from_json(&typo).is_err());
        let nested = MINIMAL.replace("\"length_m\"", "\"lenght_m\"");
        assert!(Scenario::from_json(&nested).is_err());
    }

    #[test]
    fn schema_version_is_checked() {
        let v2 = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(Scenario::from_json(&v2), Err(HarnessError::Schema(2))));
    }

    #[test]
    fn empty_override_matches_profile() {
        let resolved = NoiseSpec::default().resolve().unwrap();
        assert_eq!(resolved, NoiseProfile::named(DEFAULT_PROFILE).unwrap());
        let spec = NoiseSpec {
            pmd_dephasing_per_km: Some(0.1),
            ..NoiseSpec::default()
        };
        assert_eq!(spec.resolve().unwrap().pmd_dephasing_per_km, 0.1);
    }

    #[test]
    fn bad_overrides_are_rejected() {
        let spec = NoiseSpec {
            bit_flip_per_cross: Some(1.5),
            ..NoiseSpec::default()
        };
        assert!(spec.resolve().is_err());
        assert!(matches!(
            NoiseSpec::profile("paper-2031").resolve(),
            Err(HarnessError::UnknownProfile(_))
        ));
    }

    #[test]
    fn loop_is_required_outside_the_divider() {
        let s = Scenario::new("x", BufferTopology::loop_ports_2_4(), None, 2);
        assert!(s.validate().is_err());
    }

    #[test]
    fn serialization_round_trips() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
    }
}
