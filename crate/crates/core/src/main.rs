use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fiberloop::harness::{
    config_run_id, divider_scenario, parse_values, run_suite, run_table1_suite, sweep_scenarios,
    table1_rows, write_comparison, write_results, RunOptions, RunResult, Scenario, Table1Row,
};

/// Fiber-loop quantum buffer simulator.
#[derive(Parser)]
#[command(name = "fiberloop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Seed applied to every scenario (overrides seeds in scenario files).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Root directory for results.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Multiplies every integration time.
    #[arg(long, global = true, default_value_t = 1.0)]
    counts_scale: f64,
    /// Run directory name; derived from the configuration hash when absent.
    #[arg(long, global = true)]
    run_id: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { scenario: PathBuf },
    /// Reproduce the seven buffer configurations and compare time and loss.
    Table1,
    /// Run the multiplier/divider buffer and report every route.
    Divider,
    /// Run a scenario once per value of one parameter.
    Sweep {
        /// Base scenario file; the table1 N=2, 5.4 km row when absent.
        scenario: Option<PathBuf>,
        /// Dotted path of the field to vary, e.g. `loop.length_m`.
        #[arg(long)]
        param: String,
        /// Comma-separated JSON values.
        #[arg(long)]
        values: String,
    },
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_results(results: &[RunResult]) {
    println!(
        "{:<48} {:>8} {:>10} {:>9} {:>8} {:>8}  flags",
        "scenario", "trips", "time_us", "loss_dB", "F", "F_chi"
    );
    for r in results {
        let (f, fc) = r
            .metrics
            .as_ref()
            .map(|m| (format!("{:.4}", m.state_fidelity), format!("{:.4}", m.process_fidelity)))
            .unwrap_or_else(|| ("-".into(), "-".into()));
        let flags = if r.leaked {
            let mut f = vec!["LEAK".to_string()];
            f.extend(r.flags.iter().cloned());
            f.join(",")
        } else {
            r.flags.join(",")
        };
        println!(
            "{:<48} {:>8} {:>10.3} {:>9.3} {:>8} {:>8}  {}",
            r.scenario,
            r.timeline.round_trips,
            r.buffer_time_s * 1e6,
            r.insertion_loss_db,
            f,
            fc,
            flags
        );
    }
}

fn run_dir(common: &Common, label: &str, scenarios: &[Scenario], opts: &RunOptions) -> Result<PathBuf> {
    let id = match &common.run_id {
        Some(id) => id.clone(),
        None => config_run_id(label, scenarios, opts)?,
    };
    Ok(common.out.join(id))
}

fn finish(dir: &Path, mut results: Vec<RunResult>) -> Result<bool> {
    write_results(dir, &mut results)?;
    print_results(&results);
    println!("results written to {}", dir.display());
    let unexpected: Vec<&str> = results
        .iter()
        .filter(|r| r.is_unexpected())
        .map(|r| r.scenario.as_str())
        .collect();
    if !unexpected.is_empty() {
        eprintln!("unexpected leak outcome: {}", unexpected.join(", "));
    }
    Ok(unexpected.is_empty())
}

fn execute(cli: Cli) -> Result<bool> {
    let common = &cli.common;
    let opts = RunOptions {
        seed: common.seed,
        counts_scale: common.counts_scale,
    };
    match &cli.command {
        Command::Run { scenario } => {
            let s = vec![load(scenario)?];
            let dir = run_dir(common, "run", &s, &opts)?;
            finish(&dir, run_suite(&s, &opts)?)
        }
        Command::Table1 => {
            let scenarios: Vec<Scenario> = table1_rows().iter().map(Table1Row::scenario).collect();
            let dir = run_dir(common, "table1", &scenarios, &opts)?;
            let report = run_table1_suite(&opts)?;
            write_comparison(&dir, &report.comparison)?;
            let all_pass = report.all_pass();
            let ok = finish(&dir, report.results)?;
            println!();
            println!(
                "{:<5} {:>10} {:>10} {:>6} {:>9} {:>9} {:>6}",
                "row", "time_us", "ref_us", "time", "loss_dB", "ref_dB", "loss"
            );
            let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
            for c in &report.comparison {
                println!(
                    "{:<5} {:>10.2} {:>10.2} {:>6} {:>9.3} {:>9.2} {:>6}",
                    c.row,
                    c.buffer_time_us,
                    c.reference_buffer_time_us,
                    verdict(c.time_pass),
                    c.insertion_loss_db,
                    c.reference_loss_db,
                    verdict(c.loss_pass)
                );
            }
            Ok(ok && all_pass)
        }
        Command::Divider => {
            let s = vec![divider_scenario()];
            let dir = run_dir(common, "divider", &s, &opts)?;
            finish(&dir, run_suite(&s, &opts)?)
        }
        Command::Sweep {
            scenario,
            param,
            values,
        } => {
            let base = match scenario {
                Some(path) => load(path)?,
                None => table1_rows()[1].scenario(),
            };
            let scenarios = sweep_scenarios(&base, param, &parse_values(values)?)?;
            let dir = run_dir(common, "sweep", &scenarios, &opts)?;
            finish(&dir, run_suite(&scenarios, &opts)?)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
