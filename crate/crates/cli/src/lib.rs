//! Library side of the `afsmc` command: scenario loading, the three run
//! modes and artifact writing.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use afsmc::scenario::{preset, RunError, RunReport, Scenario, ScenarioError};
use afsmc::sim::SimTrace;
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "AFSMC_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Single,
    Compare,
    Sweep { param: String, values: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    /// File path or bundled preset name.
    pub scenario: String,
    pub out_dir: PathBuf,
    pub mode: Mode,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Run(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 1 for run faults and output failures, 2 for configuration errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Loads `arg` as a file when one exists there, else as a preset name.
pub fn load_scenario(arg: &str) -> Result<Scenario, CliError> {
    let path = Path::new(arg);
    let mut sc = if path.exists() {
        Scenario::load(path)?
    } else if let Some(sc) = preset(arg) {
        sc
    } else {
        return Err(CliError::Config(format!(
            "{arg}: no such file or preset (presets: {})",
            afsmc::scenario::PRESETS.join(", ")
        )));
    };
    if sc.name.is_empty() {
        sc.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
    }
    sc.validate()?;
    Ok(sc)
}

/// Runs `spec` and returns the text to print on success.
pub fn execute(spec: &RunSpec) -> Result<String, CliError> {
    let sc = load_scenario(&spec.scenario)?;
    fs::create_dir_all(&spec.out_dir).map_err(|source| CliError::Io {
        path: spec.out_dir.clone(),
        source,
    })?;
    match &spec.mode {
        Mode::Single => run_single(&sc, &spec.out_dir),
        Mode::Compare => run_compare(&sc, &spec.out_dir),
        Mode::Sweep { param, values } => run_sweep(&sc, &spec.out_dir, param, values),
    }
}

/// Writes through a temporary sibling and renames it into place, so readers
/// see either the previous file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.=".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn csv_bytes(trace: &SimTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).expect("writing to memory");
    buf
}

/// Writes `<label>.csv` and `<label>.metrics.txt`; the metrics file carries a
/// `status` line and, for failed runs, only the partial trace is written.
fn write_run(
    out: &Path,
    label: &str,
    result: &Result<RunReport, RunError>,
) -> Result<(), CliError> {
    let base = file_safe(label);
    let csv = out.join(format!("{base}.csv"));
    let metrics = out.join(format!("{base}.metrics.txt"));
    match result {
        Ok(report) => {
            write_atomic(&csv, &csv_bytes(&report.output.trace))?;
            let mut text = String::from("status = ok\n");
            text.push_str(&report.metrics.to_key_values());
            if let Some(m) = &report.monitors {
                text.push_str(&m.to_key_values());
            }
            write_atomic(&metrics, text.as_bytes())
        }
        Err(RunError::Sim(e)) => {
            if let Some(trace) = e.partial_trace() {
                write_atomic(&csv, &csv_bytes(trace))?;
            }
            let text = format!("status = fault\nerror = {e}\n");
            write_atomic(&metrics, text.as_bytes())
        }
        Err(RunError::Scenario(_)) => Ok(()),
    }
}

fn fault(label: &str, e: RunError) -> CliError {
    match e {
        RunError::Scenario(e) => CliError::Config(format!("{label}: {e}")),
        RunError::Sim(e) => CliError::Run(format!("{label}: {e}")),
    }
}

pub fn run_single(sc: &Scenario, out: &Path) -> Result<String, CliError> {
    let result = sc.run();
    write_run(out, &sc.name, &result)?;
    let report = result.map_err(|e| fault(&sc.name, e))?;
    Ok(format!(
        "{}: rms_error = {:e}\n",
        sc.name, report.metrics.rms_error
    ))
}

/// Runs the scenario as configured and with `γ = 0`, in parallel.
pub fn run_compare(sc: &Scenario, out: &Path) -> Result<String, CliError> {
    let smc = sc.baseline();
    let (afsmc_result, smc_result) = std::thread::scope(|s| {
        let a = s.spawn(|| sc.run());
        let b = smc.run();
        (a.join().expect("run thread panicked"), b)
    });
    write_run(out, &sc.name, &afsmc_result)?;
    write_run(out, &smc.name, &smc_result)?;
    let a = afsmc_result.map_err(|e| fault(&sc.name, e))?;
    let b = smc_result.map_err(|e| fault(&smc.name, e))?;

    let mut table = String::new();
    for (prefix, report) in [("afsmc", &a), ("smc", &b)] {
        for line in report.metrics.to_key_values().lines() {
            table.push_str(&format!("{prefix}.{line}\n"));
        }
    }
    let ratio = a.metrics.rms_error / b.metrics.rms_error;
    table.push_str(&format!("rms_ratio = {ratio}\n"));
    let verdict = format!(
        "afsmc_rms < smc_rms: {}\nrms ratio: {ratio}\n",
        a.metrics.rms_error < b.metrics.rms_error
    );
    table.push_str(&format!(
        "afsmc_rms_lt_smc_rms = {}\n",
        a.metrics.rms_error < b.metrics.rms_error
    ));
    write_atomic(
        &out.join(format!("{}-compare.txt", file_safe(&sc.name))),
        table.as_bytes(),
    )?;
    Ok(verdict)
}

/// Header of the sweep summary table.
pub const SWEEP_HEADER: &str = "param,value,status,rms_error,max_abs_error,control_total_variation,compensation_rms,boundary_occupancy,region_occupancy_0,region_occupancy_1,region_occupancy_2";

fn sweep_row(param: &str, value: &str, result: &Result<RunReport, RunError>) -> String {
    match result {
        Ok(r) => {
            let m = &r.metrics;
            let (occ, region) = match &r.monitors {
                Some(mon) => (mon.boundary_occupancy, mon.region_occupancy.clone()),
                None => (f64::NAN, vec![f64::NAN; 3]),
            };
            let region: Vec<String> = region.iter().map(f64::to_string).collect();
            format!(
                "{param},{value},ok,{},{},{},{},{occ},{}",
                m.rms_error,
                m.max_abs_error,
                m.control_total_variation,
                m.compensation_rms,
                region.join(",")
            )
        }
        Err(_) => format!("{param},{value},fault,,,,,,,,"),
    }
}

/// Runs one scenario per value of the dotted key `param`, spread over the
/// available cores. Every override is validated before anything runs.
pub fn run_sweep(
    sc: &Scenario,
    out: &Path,
    param: &str,
    values: &[String],
) -> Result<String, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let variants = values
        .iter()
        .map(|v| {
            let mut variant = sc.with_override_text(param, v)?;
            variant.name = format!("{}-{param}={v}", sc.name);
            Ok(variant)
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    let results = run_batch(&variants);
    let mut table = format!("{SWEEP_HEADER}\n");
    for ((variant, value), result) in variants.iter().zip(values).zip(&results) {
        write_run(out, &variant.name, result)?;
        table.push_str(&sweep_row(param, value, result));
        table.push('\n');
    }
    write_atomic(
        &out.join(format!("{}-sweep.csv", file_safe(&sc.name))),
        table.as_bytes(),
    )?;

    let mut first_fault = None;
    for (variant, result) in variants.iter().zip(results) {
        if let Err(e) = result {
            first_fault.get_or_insert(fault(&variant.name, e));
        }
    }
    match first_fault {
        Some(e) => Err(e),
        None => Ok(table),
    }
}

/// Runs independent scenarios in parallel; results keep the input order.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<RunReport, RunError>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(scenarios.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let mut done: Vec<(usize, Result<RunReport, RunError>)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut mine = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(sc) = scenarios.get(i) else { break };
                        mine.push((i, sc.run()));
                    }
                    mine
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("run thread panicked"))
            .collect()
    });
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Run("x".into()).exit_code(), 1);
    }

    #[test]
    fn file_names_are_tamed() {
        assert_eq!(
            file_safe("case1-controller.phi=0.5"),
            "case1-controller.phi=0.5"
        );
        assert_eq!(file_safe("a b/c"), "a_b_c");
    }

    #[test]
    fn unknown_scenario_is_a_config_error() {
        let err = load_scenario("no-such-case").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("case1"));
    }

    #[test]
    fn batch_preserves_order() {
        let mut sc = preset("case1").unwrap();
        sc.sim.duration = 1.0;
        let variants: Vec<_> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|phi| {
                let mut v = sc.clone();
                v.controller.phi = *phi;
                v
            })
            .collect();
        let batch = run_batch(&variants);
        for (v, r) in variants.iter().zip(batch) {
            let direct = v.run().unwrap();
            assert_eq!(r.unwrap().output.trace, direct.output.trace);
        }
    }
}
