//! Comparison of the field gradients with the Riccati ODEs integrated
//! along traced characteristics.

use serde::{Deserialize, Serialize};

use crate::characteristics::{
    frozen_blowup_time, oracle_integrate, trace, Direction, OracleVariable, TraceOptions,
};
use crate::error::{Error, Result};
use crate::solver::{FieldState, RunResult};
use crate::thermo::GasConstants;

/// Largest relative discrepancy accepted at base resolution.
pub const ORACLE_THRESHOLD: f64 = 0.05;
/// Path error per unit time requested from the trace integrator.
pub const PATH_TOLERANCE: f64 = 1e-6;

/// Trace start points: `count` seeds spread evenly over `[x_min, x_max]`
/// at time `t0`, one forward and one backward trace per seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSeeds {
    pub count: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub t0: f64,
    /// Defaults to the rest of the run.
    pub duration: Option<f64>,
    /// Node spacing as a fraction of the snapshot interval.
    pub node_fraction: f64,
}

impl Default for TraceSeeds {
    fn default() -> Self {
        Self {
            count: 10,
            x_min: -30.0,
            x_max: 30.0,
            t0: 0.0,
            duration: None,
            node_fraction: 0.5,
        }
    }
}

impl TraceSeeds {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::domain("traces.count", 0.0, ">= 1"));
        }
        if !(self.x_max >= self.x_min) {
            return Err(Error::domain("traces.x_max", self.x_max, ">= traces.x_min"));
        }
        if !(self.node_fraction > 0.0 && self.node_fraction <= 1.0) {
            return Err(Error::domain(
                "traces.node_fraction",
                self.node_fraction,
                "in (0, 1]",
            ));
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![0.5 * (self.x_min + self.x_max)];
        }
        let h = (self.x_max - self.x_min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.x_min + k as f64 * h).collect()
    }
}

/// Snapshot interval for oracle runs: `1.5 dx / c_max`, so a sound wave
/// crosses less than two cells between snapshots.
pub fn oracle_snapshot_interval(dx: f64, state: &FieldState, gas: &GasConstants<f64>) -> f64 {
    let c_max = state
        .eta
        .iter()
        .zip(state.m.iter())
        .map(|(e, m)| gas.sound_speed(*e, *m))
        .fold(0.0, f64::max);
    1.5 * dx / c_max
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub x0: f64,
    pub variable: OracleVariable,
    pub nodes: usize,
    pub t_end: f64,
    pub truncated: bool,
    pub max_abs_error: f64,
    pub max_abs_field: f64,
    pub relative_discrepancy: f64,
    pub blowup_time: Option<f64>,
    /// Estimated path error per unit time.
    pub path_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub lambda: f64,
    pub threshold: f64,
    pub traces: Vec<TraceReport>,
    pub max_relative_discrepancy: f64,
    pub passed: bool,
}

impl OracleReport {
    pub fn max_for(&self, variable: OracleVariable) -> f64 {
        self.traces
            .iter()
            .filter(|t| t.variable == variable)
            .map(|t| t.relative_discrepancy)
            .fold(0.0, f64::max)
    }
}

fn trace_options(run: &RunResult, seeds: &TraceSeeds, lambda: f64) -> TraceOptions {
    let times = run.times();
    let interval = if times.len() > 1 {
        times[1] - times[0]
    } else {
        1.0
    };
    let end = *times.last().unwrap_or(&seeds.t0);
    TraceOptions {
        node_spacing: seeds.node_fraction * interval,
        duration: seeds.duration.unwrap_or(end - seeds.t0),
        lambda,
        path_tolerance: PATH_TOLERANCE,
    }
}

/// Traces every seed in both directions and integrates all four
/// gradient variables along the matching traces.
pub fn oracle_study(run: &RunResult, seeds: &TraceSeeds, lambda: f64) -> Result<OracleReport> {
    seeds.validate()?;
    let opts = trace_options(run, seeds, lambda);
    let gas = &run.solver.gas;
    let mut traces = vec![];
    for x0 in seeds.positions() {
        for dir in [Direction::Forward, Direction::Backward] {
            let tr = trace(run, x0, seeds.t0, dir, opts)?;
            if tr.nodes.len() < 3 {
                return Err(Error::Precondition(format!(
                    "trace from x0 = {x0} has fewer than three nodes"
                )));
            }
            let variables = match dir {
                Direction::Forward => [OracleVariable::AlphaTilde, OracleVariable::Alpha],
                Direction::Backward => [OracleVariable::BetaTilde, OracleVariable::Beta],
            };
            for v in variables {
                let res = oracle_integrate(&tr, v, lambda, gas)?;
                traces.push(TraceReport {
                    x0,
                    variable: v,
                    nodes: tr.nodes.len(),
                    t_end: *res.times.last().unwrap_or(&seeds.t0),
                    truncated: tr.truncated,
                    max_abs_error: res.max_abs_error,
                    max_abs_field: res.max_abs_field,
                    relative_discrepancy: res.relative_discrepancy,
                    blowup_time: res.blowup_time,
                    path_error: tr.path_error,
                });
            }
        }
    }
    let max_relative_discrepancy = traces
        .iter()
        .map(|t| t.relative_discrepancy)
        .fold(0.0, f64::max);
    Ok(OracleReport {
        lambda,
        threshold: ORACLE_THRESHOLD,
        traces,
        max_relative_discrepancy,
        passed: max_relative_discrepancy <= ORACLE_THRESHOLD,
    })
}

/// Earliest Riccati pole of `alpha_tilde` or `beta_tilde` predicted from
/// the seeded traces. Traces that end before a pole are continued with
/// coefficients frozen at their last node.
pub fn predict_blowup(run: &RunResult, seeds: &TraceSeeds, t_max: f64) -> Result<Option<f64>> {
    seeds.validate()?;
    let opts = trace_options(run, seeds, 0.0);
    let gas = &run.solver.gas;
    let mut best: Option<f64> = None;
    for x0 in seeds.positions() {
        for (dir, v) in [
            (Direction::Forward, OracleVariable::AlphaTilde),
            (Direction::Backward, OracleVariable::BetaTilde),
        ] {
            let tr = trace(run, x0, seeds.t0, dir, opts)?;
            if tr.nodes.len() < 3 {
                continue;
            }
            let res = oracle_integrate(&tr, v, 0.0, gas)?;
            let t = match res.blowup_time {
                Some(t) => Some(t),
                None => {
                    let k = res.times.len() - 1;
                    let node = tr.nodes[2 * k];
                    frozen_blowup_time(v, &node, res.oracle[k], 0.0, gas, opts.node_spacing, t_max)?
                }
            };
            if let Some(t) = t {
                best = Some(best.map_or(t, |b| b.min(t)));
            }
        }
    }
    Ok(best)
}
