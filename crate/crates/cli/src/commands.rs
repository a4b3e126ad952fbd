use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use euler1d::characteristics::OracleVariable;
use euler1d::diagnostics::oracle::{oracle_snapshot_interval, OracleReport};
use euler1d::diagnostics::{bound_params, emit_report, oracle_study, write_json, Certificate};
use euler1d::{certify, Error, Result, RunConfig, RunResult, Solver, Termination};

const DEFAULT_OUT: &str = "euler1d_out";
/// Smallest accepted ratio of half-resolution to base discrepancy.
const MIN_IMPROVEMENT: f64 = 1.7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Fault,
    Violation,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Fault => 1,
            Status::Violation => 2,
        }
    }

    /// A fault outranks a violation, which outranks success.
    fn merge(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fault, _) | (_, Status::Fault) => Status::Fault,
            (Status::Violation, _) | (_, Status::Violation) => Status::Violation,
            _ => Status::Ok,
        }
    }
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn simulate(cfg: &RunConfig) -> Result<RunResult> {
    let (gas, state) = cfg.scenario.initial_state(cfg.numerics.order)?;
    Solver::new(cfg.scenario.grid, gas, cfg.numerics)?.run(state, cfg.scenario.run_options())
}

fn summary(c: &Certificate) -> String {
    let fit = match (&c.fit, &c.fit_note) {
        (Some(f), _) => format!("decay exponent {:.4}", f.exponent),
        (None, Some(note)) => format!("no fit ({note})"),
        (None, None) => "no fit".into(),
    };
    format!(
        "{}: {:?}; M = {:.6} (M_star {:.6}), C_1 = {:.6}; invariant {} (max ratio {:.6}); floor {} ({} violations); lemma {}; {fit}",
        c.scenario,
        c.termination,
        c.bounds.level,
        c.bounds.m_star,
        c.bounds.c1,
        if c.invariant.violated { "VIOLATED" } else { "ok" },
        c.invariant.max_ratio,
        if c.floor.violated { "VIOLATED" } else { "ok" },
        c.floor.violations,
        if c.lemma.violated { "VIOLATED" } else { "ok" },
    )
}

/// Integrates, certifies and writes the report into `dir`.
fn run_config(cfg: &RunConfig, dir: &Path, dump_fields: bool) -> Result<(Status, Certificate)> {
    let run = simulate(cfg)?;
    let analysis = certify(&run, &cfg.scenario.name, &cfg.diagnostics)?;
    let dump = if dump_fields {
        cfg.diagnostics.dump_fields
    } else {
        0
    };
    emit_report(&analysis, &run, dir, dump)?;
    write_json(&dir.join("config.json"), &cfg.to_value())?;
    let c = analysis.certificate;
    let status = if matches!(c.termination, Termination::NumericalFault { .. }) {
        Status::Fault
    } else if c.violated {
        Status::Violation
    } else {
        Status::Ok
    };
    Ok((status, c))
}

pub fn run(
    config: &Path,
    out: Option<PathBuf>,
    overrides: &[String],
    dump_fields: bool,
) -> Result<Status> {
    let cfg = RunConfig::load(config, overrides)?;
    let dir = out_dir(&cfg, out);
    let (status, c) = run_config(&cfg, &dir, dump_fields)?;
    println!("{}", summary(&c));
    info!("report written to {}", dir.display());
    Ok(status)
}

fn oracle_at(cfg: &RunConfig) -> Result<OracleReport> {
    let mut spec = cfg.scenario.clone();
    let (gas, state) = spec.initial_state(cfg.numerics.order)?;
    spec.snapshot_interval = oracle_snapshot_interval(spec.grid.dx(), &state, &gas);
    let run = Solver::new(spec.grid, gas, cfg.numerics)?.run(state, spec.run_options())?;
    let params = bound_params(&run, cfg.diagnostics.level_choice())?;
    oracle_study(&run, &cfg.diagnostics.traces, params.lambda)
}

const VARIABLES: [OracleVariable; 4] = [
    OracleVariable::AlphaTilde,
    OracleVariable::Alpha,
    OracleVariable::BetaTilde,
    OracleVariable::Beta,
];

#[derive(Serialize)]
struct Convergence {
    half_resolution_cells: usize,
    variable: OracleVariable,
    base: f64,
    half: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct OracleOutput {
    cells: usize,
    report: OracleReport,
    convergence: Vec<Convergence>,
    passed: bool,
}

pub fn oracle(
    config: &Path,
    out: Option<PathBuf>,
    overrides: &[String],
    convergence: bool,
) -> Result<Status> {
    let cfg = RunConfig::load(config, overrides)?;
    let dir = out_dir(&cfg, out);
    let cells = cfg.scenario.grid.n;
    let (report, half) = if convergence {
        let mut coarse = cfg.clone();
        coarse.scenario.grid.n = cells / 2;
        coarse.validate()?;
        let (a, b) = rayon::join(|| oracle_at(&cfg), || oracle_at(&coarse));
        (a?, Some(b?))
    } else {
        (oracle_at(&cfg)?, None)
    };
    let convergence: Vec<Convergence> = half
        .iter()
        .flat_map(|h| {
            VARIABLES.iter().map(|&v| {
                let (base, half) = (report.max_for(v), h.max_for(v));
                Convergence {
                    half_resolution_cells: cells / 2,
                    variable: v,
                    base,
                    half,
                    ratio: half / base,
                }
            })
        })
        .collect();
    // A ratio is meaningless when the base discrepancy is already at roundoff.
    let converging = convergence
        .iter()
        .all(|c| c.ratio >= MIN_IMPROVEMENT || c.base <= 1e-12);
    let passed = report.passed && converging;
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    println!(
        "oracle: {} traces, max relative discrepancy {:.3e} (threshold {}){}",
        report.traces.len(),
        report.max_relative_discrepancy,
        report.threshold,
        convergence
            .iter()
            .map(|c| format!("; {:?} x{:.2}", c.variable, c.ratio))
            .collect::<String>()
    );
    write_json(
        &dir.join("oracle.json"),
        &OracleOutput {
            cells,
            report,
            convergence,
            passed,
        },
    )?;
    Ok(if passed {
        Status::Ok
    } else {
        Status::Violation
    })
}

#[derive(Serialize)]
struct SweepEntry {
    value: String,
    dir: PathBuf,
    status: Status,
    exit_code: u8,
    error: Option<String>,
    termination: Option<Termination>,
    violated: Option<bool>,
    exponent: Option<f64>,
    max_ratio: Option<f64>,
}

#[derive(Serialize)]
struct SweepOutput {
    param: String,
    entries: Vec<SweepEntry>,
}

/// Directory-safe rendering of a sweep value.
fn dir_name(param: &str, value: &str) -> String {
    let clean: String = value
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "+-.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{param}={clean}")
}

pub fn sweep(
    config: &Path,
    out: Option<PathBuf>,
    overrides: &[String],
    param: &str,
    values: &[String],
) -> Result<Status> {
    let values: Vec<&str> = values
        .iter()
        .map(|v| v.trim())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(Error::Config {
            path: param.into(),
            message: "sweep needs at least one value".into(),
        });
    }
    let base = RunConfig::load(config, overrides)?;
    let root = out_dir(&base, out);
    let entries: Vec<SweepEntry> = values
        .par_iter()
        .map(|value| {
            let dir = root.join(dir_name(param, value));
            let mut all = overrides.to_vec();
            all.push(format!("{param}={value}"));
            let result = RunConfig::load(config, &all).and_then(|cfg| run_config(&cfg, &dir, true));
            match result {
                Ok((status, c)) => SweepEntry {
                    value: value.to_string(),
                    dir,
                    status,
                    exit_code: status.code(),
                    error: None,
                    termination: Some(c.termination),
                    violated: Some(c.violated),
                    exponent: c.fit.map(|f| f.exponent),
                    max_ratio: Some(c.invariant.max_ratio),
                },
                Err(e) => SweepEntry {
                    value: value.to_string(),
                    dir,
                    status: Status::Fault,
                    exit_code: Status::Fault.code(),
                    error: Some(e.to_string()),
                    termination: None,
                    violated: None,
                    exponent: None,
                    max_ratio: None,
                },
            }
        })
        .collect();
    for e in &entries {
        match &e.error {
            Some(msg) => println!("{param}={}: error: {msg}", e.value),
            None => println!(
                "{param}={}: {:?}, violated {}, max ratio {:.6}",
                e.value,
                e.termination.as_ref().expect("set on success"),
                e.violated.unwrap_or(false),
                e.max_ratio.unwrap_or(f64::NAN)
            ),
        }
    }
    let status = entries.iter().fold(Status::Ok, |s, e| s.merge(e.status));
    std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    write_json(
        &root.join("sweep.json"),
        &SweepOutput {
            param: param.into(),
            entries,
        },
    )?;
    Ok(status)
}
