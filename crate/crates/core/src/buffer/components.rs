use serde::{Deserialize, Serialize};

use super::{BufferError, DEFAULT_GROUP_INDEX, RF_MULTIPLE_TOLERANCE};

/// Low-loss 2×2 electro-optic switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchSpec {
    /// Insertion loss in the cross (RF ON) state.
    pub loss_cross_db: f64,
    /// Insertion loss in the straight (RF OFF) state.
    pub loss_straight_db: f64,
    pub rise_fall_time_s: f64,
    pub max_rep_rate_hz: f64,
    pub v_pi_calibrated: bool,
}

impl Default for SwitchSpec {
    fn default() -> Self {
        Self {
            loss_cross_db: 1.2,
            loss_straight_db: 1.0,
            rise_fall_time_s: 100e-9,
            max_rep_rate_hz: 100e3,
            v_pi_calibrated: false,
        }
    }
}

impl SwitchSpec {
    pub fn validate(&self) -> Result<(), BufferError> {
        if !(self.loss_cross_db >= 0.0 && self.loss_straight_db >= 0.0) {
            return Err(BufferError::Config("switch losses must be >= 0 dB".into()));
        }
        if !(self.rise_fall_time_s > 0.0) || !(self.max_rep_rate_hz > 0.0) {
            return Err(BufferError::Config(
                "rise/fall time and max repetition rate must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Fiber delay line closing the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberLoop {
    pub length_m: f64,
    #[serde(default = "FiberLoop::standard_attenuation")]
    pub attenuation_db_per_km: f64,
    #[serde(default = "FiberLoop::default_group_index")]
    pub group_index: f64,
    /// Standard deviation of the random birefringent phase per km, radians.
    #[serde(default)]
    pub pmd_dephasing_per_km: f64,
}

impl FiberLoop {
    pub const SMF28_DB_PER_KM: f64 = 0.2;
    pub const ULL_DB_PER_KM: f64 = 0.15;

    fn standard_attenuation() -> f64 {
        Self::SMF28_DB_PER_KM
    }

    fn default_group_index() -> f64 {
        DEFAULT_GROUP_INDEX
    }

    /// Standard SMF-28 at 0.2 dB/km.
    pub fn smf28_km(km: f64) -> Self {
        Self {
            length_m: km * 1e3,
            attenuation_db_per_km: Self::SMF28_DB_PER_KM,
            group_index: DEFAULT_GROUP_INDEX,
            pmd_dephasing_per_km: 0.0,
        }
    }

    /// Ultra-low-loss fiber at 0.15 dB/km.
    pub fn ull_km(km: f64) -> Self {
        Self {
            attenuation_db_per_km: Self::ULL_DB_PER_KM,
            ..Self::smf28_km(km)
        }
    }

    pub fn with_pmd(mut self, rad_per_km: f64) -> Self {
        self.pmd_dephasing_per_km = rad_per_km;
        self
    }

    pub fn length_km(&self) -> f64 {
        self.length_m / 1e3
    }

    /// Propagation loss of one pass.
    pub fn pass_loss_db(&self) -> f64 {
        self.attenuation_db_per_km * self.length_km()
    }

    pub fn validate(&self) -> Result<(), BufferError> {
        if !(self.length_m > 0.0) {
            return Err(BufferError::Config(format!(
                "loop length must be > 0, got {} m",
                self.length_m
            )));
        }
        if !(self.attenuation_db_per_km >= 0.0) {
            return Err(BufferError::Config("attenuation must be >= 0".into()));
        }
        if !(self.group_index >= 1.0) {
            return Err(BufferError::Config("group index must be >= 1".into()));
        }
        if !(self.pmd_dephasing_per_km >= 0.0) {
            return Err(BufferError::Config("PMD dephasing must be >= 0".into()));
        }
        Ok(())
    }
}

/// RF drive: ON (cross) for `on_duration`, OFF (straight) for `off_duration`, repeating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfPattern {
    pub on_duration_s: f64,
    pub off_duration_s: f64,
}

impl RfPattern {
    pub fn new(on_duration_s: f64, off_duration_s: f64) -> Result<Self, BufferError> {
        if !(on_duration_s > 0.0) || !(off_duration_s >= 0.0) {
            return Err(BufferError::Config(format!(
                "RF pattern needs on > 0 and off >= 0 (got {on_duration_s:e}, {off_duration_s:e})"
            )));
        }
        let multiple = off_duration_s / on_duration_s;
        if (multiple - multiple.round()).abs() > RF_MULTIPLE_TOLERANCE * multiple.max(1.0) {
            return Err(BufferError::Config(format!(
                "OFF duration must be an integer multiple of ON duration (ratio {multiple})"
            )));
        }
        Ok(Self {
            on_duration_s,
            off_duration_s,
        })
    }

    /// Pattern for `n_trips` round trips at a given repetition rate:
    /// ON for `1/(n·rate)`, OFF for `n-1` times that.
    pub fn from_rate(rate_hz: f64, n_trips: u32) -> Result<Self, BufferError> {
        if n_trips < 1 {
            return Err(BufferError::Domain("n_trips must be >= 1".into()));
        }
        if !(rate_hz > 0.0) {
            return Err(BufferError::Config("repetition rate must be > 0".into()));
        }
        let on = 1.0 / (f64::from(n_trips) * rate_hz);
        Self::new(on, on * f64::from(n_trips - 1))
    }

    pub fn frame_s(&self) -> f64 {
        self.on_duration_s + self.off_duration_s
    }

    pub fn repetition_rate_hz(&self) -> f64 {
        1.0 / self.frame_s()
    }

    /// Round trips encoded by the pattern: `(on + off) / on`.
    pub fn n_trips(&self) -> u32 {
        (self.frame_s() / self.on_duration_s).round() as u32
    }

    /// No OFF phase: the switch is held in the cross state (traveling buffer).
    pub fn is_dc(&self) -> bool {
        self.off_duration_s == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopologyVariant {
    /// Loop between input 2 and output 4 (original wiring).
    #[serde(rename = "LOOP_PORTS_2_4")]
    LoopPorts24,
    /// Loop between input 2 and output 3 after V_π recalibration.
    #[serde(rename = "LOOP_PORTS_2_3")]
    LoopPorts23,
    /// Two 1×2 selector switches choosing between parallel delay lines.
    #[serde(rename = "MULTIPLIER_DIVIDER")]
    MultiplierDivider,
}

impl TopologyVariant {
    /// Calibrated rate above which a stored photon leaks out early.
    pub fn default_leak_threshold_hz(self) -> f64 {
        match self {
            TopologyVariant::LoopPorts24 | TopologyVariant::MultiplierDivider => 50e3,
            TopologyVariant::LoopPorts23 => 78e3,
        }
    }
}

/// Parallel delay lines selected by two synchronized 1×2 switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DividerConfig {
    pub paths: Vec<FiberLoop>,
    #[serde(default = "DividerConfig::default_selector_loss")]
    pub selector_loss_db: f64,
    #[serde(default = "DividerConfig::default_selector_rate")]
    pub selector_rate_hz: f64,
}

impl DividerConfig {
    fn default_selector_loss() -> f64 {
        0.01
    }

    fn default_selector_rate() -> f64 {
        1.0
    }

    pub fn new(paths: Vec<FiberLoop>) -> Self {
        Self {
            paths,
            selector_loss_db: Self::default_selector_loss(),
            selector_rate_hz: Self::default_selector_rate(),
        }
    }

    /// Selector losses picked up on one pass through a selected path.
    pub fn per_pass_losses_db(&self) -> [f64; 2] {
        [self.selector_loss_db; 2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferTopology {
    pub variant: TopologyVariant,
    #[serde(default)]
    pub leak_threshold_hz: Option<f64>,
    #[serde(default)]
    pub divider: Option<DividerConfig>,
}

impl BufferTopology {
    pub fn new(variant: TopologyVariant) -> Self {
        Self {
            variant,
            leak_threshold_hz: None,
            divider: None,
        }
    }

    pub fn loop_ports_2_4() -> Self {
        Self::new(TopologyVariant::LoopPorts24)
    }

    pub fn loop_ports_2_3() -> Self {
        Self::new(TopologyVariant::LoopPorts23)
    }

    pub fn multiplier_divider(divider: DividerConfig) -> Self {
        Self {
            divider: Some(divider),
            ..Self::new(TopologyVariant::MultiplierDivider)
        }
    }

    pub fn leak_threshold(&self) -> f64 {
        self.leak_threshold_hz
            .unwrap_or_else(|| self.variant.default_leak_threshold_hz())
    }

    pub fn validate(&self) -> Result<(), BufferError> {
        if !(self.leak_threshold() > 0.0) {
            return Err(BufferError::Config("leak threshold must be > 0".into()));
        }
        match (&self.divider, self.variant) {
            (Some(d), TopologyVariant::MultiplierDivider) => {
                if d.paths.is_empty() {
                    return Err(BufferError::Config("divider needs at least one path".into()));
                }
                if !(d.selector_loss_db >= 0.0) || !(d.selector_rate_hz > 0.0) {
                    return Err(BufferError::Config("invalid selector switch parameters".into()));
                }
                d.paths.iter().try_for_each(FiberLoop::validate)
            }
            (None, TopologyVariant::MultiplierDivider) => Err(BufferError::Config(
                "MULTIPLIER_DIVIDER requires divider paths".into(),
            )),
            (Some(_), _) => Err(BufferError::Config(
                "divider paths are only valid for MULTIPLIER_DIVIDER".into(),
            )),
            (None, _) => Ok(()),
        }
    }
}
