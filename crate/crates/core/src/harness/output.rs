use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{ComparisonRow, HarnessError, RunOptions, RunResult, Scenario};
use crate::counting::write_dataset_csv;
use crate::qstate::MatrixJson;
use crate::tomography::Metrics;

/// Run identifier derived from everything that determines the output.
pub fn config_run_id(label: &str, scenarios: &[Scenario], opts: &RunOptions) -> Result<String, HarnessError> {
    let doc = serde_json::to_vec(&(label, scenarios, opts))?;
    let digest = Sha256::digest(&doc);
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    Ok(format!("{label}-{hex}"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |error| HarnessError::Io {
        path: path.to_path_buf(),
        error,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    scenario: &'a str,
    leaked: bool,
    buffer_time_s: f64,
    insertion_loss_db: f64,
    flags: &'a [String],
    #[serde(flatten)]
    metrics: Option<&'a Metrics>,
}

#[derive(Serialize)]
struct ResultRow<'a> {
    scenario: &'a str,
    leaked: bool,
    round_trips: u32,
    buffer_time_us: f64,
    insertion_loss_db: f64,
    #[serde(rename = "F")]
    fidelity: Option<f64>,
    #[serde(rename = "F_chi")]
    process_fidelity: Option<f64>,
    purity: Option<f64>,
    concurrence: Option<f64>,
    chi_00: Option<f64>,
    chi_11: Option<f64>,
    chi_22: Option<f64>,
    chi_33: Option<f64>,
    flags: String,
}

impl<'a> From<&'a RunResult> for ResultRow<'a> {
    fn from(r: &'a RunResult) -> Self {
        let m = r.metrics.as_ref();
        let chi = |k: usize| m.map(|m| m.chi_diag[k]);
        Self {
            scenario: &r.scenario,
            leaked: r.leaked,
            round_trips: r.timeline.round_trips,
            buffer_time_us: r.buffer_time_s * 1e6,
            insertion_loss_db: r.insertion_loss_db,
            fidelity: m.map(|m| m.state_fidelity),
            process_fidelity: m.map(|m| m.process_fidelity),
            purity: m.map(|m| m.purity),
            concurrence: m.map(|m| m.concurrence),
            chi_00: chi(0),
            chi_11: chi(1),
            chi_22: chi(2),
            chi_33: chi(3),
            flags: r.flags.join(";"),
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `<run_dir>/<scenario>/{timeline,metrics,rho,chi}.json` and
/// `dataset.csv` for every result, plus `summary.json` and `results.csv`.
/// Artifact paths are recorded relative to `run_dir`.
pub fn write_results(run_dir: &Path, results: &mut [RunResult]) -> Result<(), HarnessError> {
    fs::create_dir_all(run_dir).map_err(io_err(run_dir))?;
    results.sort_by(|a, b| a.scenario.cmp(&b.scenario));
    for r in results.iter_mut() {
        let dir = run_dir.join(&r.scenario);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        r.artifacts.clear();
        let mut record = |name: &str| -> PathBuf {
            r.artifacts.insert(name.to_string(), format!("{}/{name}", r.scenario));
            dir.join(name)
        };
        let timeline_path = record("timeline.json");
        let metrics_path = record("metrics.json");
        let extra = r
            .data
            .as_ref()
            .map(|_| (record("dataset.csv"), record("rho.json"), record("chi.json")));

        write_json(&timeline_path, &r.timeline)?;
        write_json(
            &metrics_path,
            &MetricsFile {
                scenario: &r.scenario,
                leaked: r.leaked,
                buffer_time_s: r.buffer_time_s,
                insertion_loss_db: r.insertion_loss_db,
                flags: &r.flags,
                metrics: r.metrics.as_ref(),
            },
        )?;
        if let (Some(data), Some((dataset, rho, chi))) = (&r.data, extra) {
            let file = File::create(&dataset).map_err(io_err(&dataset))?;
            write_dataset_csv(BufWriter::new(file), &data.dataset)
                .map_err(|e| HarnessError::scenario(&r.scenario, e))?;
            write_json(&rho, &MatrixJson::from(&data.rho))?;
            write_json(&chi, &MatrixJson::from(&data.chi))?;
        }
    }
    write_json(&run_dir.join("summary.json"), &results)?;
    write_csv(&run_dir.join("results.csv"), results.iter().map(ResultRow::from))
}

pub fn write_comparison(run_dir: &Path, rows: &[ComparisonRow]) -> Result<(), HarnessError> {
    fs::create_dir_all(run_dir).map_err(io_err(run_dir))?;
    write_csv(&run_dir.join("table1_comparison.csv"), rows)
}
