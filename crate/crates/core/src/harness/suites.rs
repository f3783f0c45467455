use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::{run_any, HarnessError, RunOptions, RunResult, Scenario};
use crate::buffer::{BufferTopology, DividerConfig, FiberLoop, SwitchSpec};

pub const TIME_TOLERANCE: f64 = 0.03;
pub const LOSS_TOLERANCE_DB: f64 = 0.01;

/// One reference buffer configuration and its measured time and loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub label: &'static str,
    pub n_trips: u32,
    pub loop_km: f64,
    pub ull: bool,
    /// `None` for a DC-driven single pass.
    pub rf_rate_hz: Option<f64>,
    pub ports_2_3: bool,
    pub buffer_time_us: f64,
    pub loss_db: f64,
}

impl Table1Row {
    pub fn scenario_name(&self) -> String {
        format!("table1_row{}", self.label.replace('*', "star"))
    }

    pub fn total_km(&self) -> f64 {
        f64::from(self.n_trips) * self.loop_km
    }

    pub fn scenario(&self) -> Scenario {
        let fiber = if self.ull {
            FiberLoop::ull_km(self.loop_km)
        } else {
            FiberLoop::smf28_km(self.loop_km)
        };
        let topology = if self.ports_2_3 {
            BufferTopology::loop_ports_2_3()
        } else {
            BufferTopology::loop_ports_2_4()
        };
        let mut s = Scenario::new(&self.scenario_name(), topology, Some(fiber), self.n_trips);
        s.rf_rate_hz = self.rf_rate_hz;
        s.switch_spec = SwitchSpec {
            v_pi_calibrated: self.ports_2_3,
            ..SwitchSpec::default()
        };
        s
    }
}

/// The seven reference buffer configurations.
pub fn table1_rows() -> Vec<Table1Row> {
    let row = |label, n_trips, loop_km, ull, rf_rate_hz, ports_2_3, buffer_time_us, loss_db| Table1Row {
        label,
        n_trips,
        loop_km,
        ull,
        rf_rate_hz,
        ports_2_3,
        buffer_time_us,
        loss_db,
    };
    vec![
        row("1", 1, 5.4, false, None, false, 26.0, 3.48),
        row("2", 2, 5.4, false, Some(19e3), false, 52.0, 5.56),
        row("2*", 2, 4.0, true, Some(25.6e3), false, 39.0, 4.60),
        row("4", 2, 3.0, false, Some(34.5e3), false, 29.0, 4.60),
        row("5", 2, 1.82, false, Some(55.8e3), true, 17.9, 4.13),
        row("6", 2, 1.3, false, Some(78e3), true, 12.7, 3.92),
        row("7", 3, 3.0, false, Some(22.7e3), false, 44.0, 6.20),
    ]
}

/// Computed buffer time and loss next to the reference values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub row: String,
    pub scenario: String,
    pub n_trips: u32,
    pub total_km: f64,
    pub buffer_time_us: f64,
    pub reference_buffer_time_us: f64,
    pub time_pass: bool,
    pub insertion_loss_db: f64,
    pub reference_loss_db: f64,
    pub loss_pass: bool,
}

impl ComparisonRow {
    pub fn pass(&self) -> bool {
        self.time_pass && self.loss_pass
    }
}

pub fn compare_table1(rows: &[Table1Row], results: &[RunResult]) -> Vec<ComparisonRow> {
    rows.iter()
        .filter_map(|row| {
            let name = row.scenario_name();
            let r = results.iter().find(|r| r.scenario == name)?;
            let time_us = r.buffer_time_s * 1e6;
            let time_err = (time_us - row.buffer_time_us).abs() / row.buffer_time_us;
            Some(ComparisonRow {
                row: row.label.to_string(),
                scenario: name,
                n_trips: row.n_trips,
                total_km: row.total_km(),
                buffer_time_us: time_us,
                reference_buffer_time_us: row.buffer_time_us,
                time_pass: time_err <= TIME_TOLERANCE,
                insertion_loss_db: r.insertion_loss_db,
                reference_loss_db: row.loss_db,
                loss_pass: (r.insertion_loss_db - row.loss_db).abs() <= LOSS_TOLERANCE_DB + 1e-9,
            })
        })
        .collect()
}

/// Runs scenarios concurrently and returns every result sorted by name.
pub fn run_suite(scenarios: &[Scenario], opts: &RunOptions) -> Result<Vec<RunResult>, HarnessError> {
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(HarnessError::Invalid(format!("duplicate scenario name `{}`", w[0])));
    }
    let nested: Result<Vec<Vec<RunResult>>, HarnessError> =
        scenarios.par_iter().map(|s| run_any(s, opts)).collect();
    let mut results: Vec<RunResult> = nested?.into_iter().flatten().collect();
    results.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    Ok(results)
}

pub struct Table1Report {
    pub results: Vec<RunResult>,
    pub comparison: Vec<ComparisonRow>,
}

impl Table1Report {
    pub fn all_pass(&self) -> bool {
        self.comparison.len() == table1_rows().len() && self.comparison.iter().all(ComparisonRow::pass)
    }
}

pub fn run_table1_suite(opts: &RunOptions) -> Result<Table1Report, HarnessError> {
    let rows = table1_rows();
    let scenarios: Vec<Scenario> = rows.iter().map(Table1Row::scenario).collect();
    let results = run_suite(&scenarios, opts)?;
    let comparison = compare_table1(&rows, &results);
    Ok(Table1Report { results, comparison })
}

/// Two delay lines behind 1×2 selectors: a 4 km ULL path matched to the
/// 25.6 kHz clock and a 1 km ULL path a quarter of its length.
pub fn divider_scenario() -> Scenario {
    let topology = BufferTopology::multiplier_divider(DividerConfig::new(vec![
        FiberLoop::ull_km(4.0),
        FiberLoop::ull_km(1.0),
    ]));
    let mut s = Scenario::new("divider", topology, None, 2);
    s.rf_rate_hz = Some(25.6e3);
    s
}

pub fn run_divider_suite(opts: &RunOptions) -> Result<Vec<RunResult>, HarnessError> {
    run_suite(&[divider_scenario()], opts)
}

/// Parses a comma-separated list of JSON scalars (`1000,2e3,true`).
pub fn parse_values(list: &str) -> Result<Vec<Value>, HarnessError> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            serde_json::from_str(v).map_err(|_| HarnessError::Sweep(format!("`{v}` is not a JSON value")))
        })
        .collect()
}

/// Copies of `base` with the dotted `param` path set to each value; each copy
/// is named `<base>.<param>=<value>`.
pub fn sweep_scenarios(base: &Scenario, param: &str, values: &[Value]) -> Result<Vec<Scenario>, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Sweep("no sweep values".into()));
    }
    let template = serde_json::to_value(base)?;
    values
        .iter()
        .map(|value| {
            let mut doc = template.clone();
            let mut slot = &mut doc;
            for key in param.split('.') {
                let obj = slot
                    .as_object_mut()
                    .ok_or_else(|| HarnessError::Sweep(format!("`{param}` does not name a field")))?;
                slot = obj
                    .get_mut(key)
                    .ok_or_else(|| HarnessError::Sweep(format!("`{param}`: no field `{key}`")))?;
            }
            *slot = value.clone();
            let label = match value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            doc["name"] = Value::String(format!("{}.{param}={label}", base.name));
            let s: Scenario = serde_json::from_value(doc)?;
            s.validate()?;
            Ok(s)
        })
        .collect()
}
