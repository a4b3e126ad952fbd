//! Characteristic paths through stored snapshots and the ODE oracle.
//!
//! Fields are interpolated cubically in space (four-point Lagrange) and
//! linearly in time between snapshots. Paths are advanced with RK4 on
//! `dx/dt = +-c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradients::tilde_pair;
use crate::solver::stencil;
use crate::solver::{at, Boundary, RunResult, Solver};
use crate::thermo::GasConstants;

use super::{riccati_rhs_tilde, riccati_rhs_transformed, Direction};

/// Values above this magnitude count as a Riccati pole.
pub const BLOWUP_MAGNITUDE: f64 = 1e6;
/// Cap on the substeps per node interval of the path integrator.
pub const MAX_SUBSTEPS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    /// Spacing of trace nodes in time.
    pub node_spacing: f64,
    pub duration: f64,
    /// Shift used for the sampled `alpha`, `beta`.
    pub lambda: f64,
    /// Target for the path error per unit time over each node interval.
    pub path_tolerance: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub t: f64,
    pub x: f64,
    pub c: f64,
    pub eta: f64,
    pub m: f64,
    pub m_x: f64,
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharTrace {
    pub direction: Direction,
    pub nodes: Vec<TraceNode>,
    /// The path left the domain or the run ended before `duration`.
    pub truncated: bool,
    /// Largest step-doubling estimate of the path error per unit time.
    pub path_error: f64,
}

/// Point values needed at one sample location.
#[derive(Clone, Copy, Default)]
struct Sample {
    eta: f64,
    m: f64,
    m_x: f64,
    u_x: f64,
    eta_x: f64,
}

impl Sample {
    fn lerp(a: Sample, b: Sample, w: f64) -> Sample {
        let f = |x: f64, y: f64| x + w * (y - x);
        Sample {
            eta: f(a.eta, b.eta),
            m: f(a.m, b.m),
            m_x: f(a.m_x, b.m_x),
            u_x: f(a.u_x, b.u_x),
            eta_x: f(a.eta_x, b.eta_x),
        }
    }
}

struct Sampler<'a> {
    run: &'a RunResult,
    solver: &'a Solver,
    times: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(run: &'a RunResult) -> Self {
        Self {
            run,
            solver: &run.solver,
            times: run.times(),
        }
    }

    /// Interpolates the field at `(x, t)`; `None` outside the stored window.
    fn sample(&self, x: f64, t: f64) -> Option<Sample> {
        let last = *self.times.last()?;
        if t < self.times[0] || t > last {
            return None;
        }
        let k = match self.times.partition_point(|s| *s <= t) {
            0 => 0,
            p => (p - 1).min(self.times.len().saturating_sub(2)),
        };
        let a = self.spatial(k, x)?;
        if self.times.len() == 1 {
            return Some(a);
        }
        let b = self.spatial(k + 1, x)?;
        let span = self.times[k + 1] - self.times[k];
        let w = if span > 0.0 {
            (t - self.times[k]) / span
        } else {
            0.0
        };
        Some(Sample::lerp(a, b, w))
    }

    fn spatial(&self, k: usize, x: f64) -> Option<Sample> {
        let grid = &self.solver.grid;
        let n = grid.n as isize;
        let dx = grid.dx();
        let xi = (x - grid.x_min) / dx - 0.5;
        let i = xi.floor() as isize;
        let frac = xi - i as f64;
        let periodic = grid.boundary == Boundary::Periodic;
        if !periodic && (i - 1 < 0 || i + 2 > n - 1) {
            return None;
        }
        let state = &self.run.snapshots[k];
        let (gu, ge) = self
            .solver
            .ghosts(&state.u, &state.eta, &state.m, &state.far);
        let inv_dx = 1.0 / dx;
        let order = self.solver.numerics.order;
        let wts = lagrange4(frac);
        let mut out = Sample::default();
        for (o, w) in (-1..=2).zip(wts) {
            let j = if periodic {
                (i + o).rem_euclid(n)
            } else {
                i + o
            };
            let window: [f64; 5] = std::array::from_fn(|d| at(&state.u, &gu, j + d as isize - 2));
            let ewin: [f64; 5] = std::array::from_fn(|d| at(&state.eta, &ge, j + d as isize - 2));
            let ju = j as usize;
            out.eta += w * state.eta[ju];
            out.m += w * state.m[ju];
            out.m_x += w * state.m_x[ju];
            out.u_x += w * stencil::d1(&window, 2, inv_dx, order);
            out.eta_x += w * stencil::d1(&ewin, 2, inv_dx, order);
        }
        Some(out)
    }

    fn speed(&self, x: f64, t: f64) -> Option<f64> {
        self.sample(x, t)
            .map(|s| self.solver.gas.sound_speed(s.eta, s.m))
    }

    fn node(&self, x: f64, t: f64, lambda: f64) -> Option<TraceNode> {
        let s = self.sample(x, t)?;
        let gas = &self.solver.gas;
        if !(s.eta > 0.0) {
            return None;
        }
        let (at, bt) = tilde_pair(s.u_x, s.eta_x, s.m_x, s.m, s.eta, gas.gamma);
        Some(TraceNode {
            t,
            x,
            c: gas.sound_speed(s.eta, s.m),
            eta: s.eta,
            m: s.m,
            m_x: s.m_x,
            alpha_tilde: at,
            beta_tilde: bt,
            alpha: at + lambda * s.eta,
            beta: bt + lambda * s.eta,
        })
    }
}

/// Four-point Lagrange weights at offsets `-1, 0, 1, 2` for `0 <= s < 1`.
fn lagrange4(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// Follows the characteristic through `(x0, t0)` for `opts.duration`.
pub fn trace(
    run: &RunResult,
    x0: f64,
    t0: f64,
    direction: Direction,
    opts: TraceOptions,
) -> Result<CharTrace> {
    if !(opts.node_spacing > 0.0) {
        return Err(Error::domain("node_spacing", opts.node_spacing, "> 0"));
    }
    let sampler = Sampler::new(run);
    let sign = direction.sign();
    let h = opts.node_spacing;
    let steps = (opts.duration / h).round() as usize;
    let first = sampler.node(x0, t0, opts.lambda).ok_or_else(|| {
        Error::Precondition(format!("trace start ({x0}, {t0}) outside the run window"))
    })?;
    let f = |x: f64, t: f64| sampler.speed(x, t).map(|c| sign * c);
    // RK4 over one node interval split into `parts` substeps
    let advance = |x: f64, t: f64, parts: usize| -> Option<f64> {
        let hs = h / parts as f64;
        let mut x = x;
        for p in 0..parts {
            let t = t + p as f64 * hs;
            let k1 = f(x, t)?;
            let k2 = f(x + 0.5 * hs * k1, t + 0.5 * hs)?;
            let k3 = f(x + 0.5 * hs * k2, t + 0.5 * hs)?;
            let k4 = f(x + hs * k3, t + hs)?;
            x += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        Some(x)
    };
    let mut nodes = vec![first];
    let mut truncated = false;
    let mut path_error: f64 = 0.0;
    let mut x = x0;
    for k in 1..=steps {
        let t = t0 + (k - 1) as f64 * h;
        let refined = (|| {
            let mut parts = 1;
            let mut coarse = advance(x, t, parts)?;
            loop {
                let fine = advance(x, t, 2 * parts)?;
                let err = (fine - coarse).abs() / h;
                if err <= opts.path_tolerance || parts >= MAX_SUBSTEPS {
                    return Some((fine, err));
                }
                parts *= 2;
                coarse = fine;
            }
        })();
        let t_next = t0 + k as f64 * h;
        match refined.and_then(|(xn, err)| Some((sampler.node(xn, t_next, opts.lambda)?, err))) {
            Some((node, err)) => {
                x = node.x;
                path_error = path_error.max(err);
                nodes.push(node);
            }
            None => {
                truncated = true;
                break;
            }
        }
    }
    Ok(CharTrace {
        direction,
        nodes,
        truncated,
        path_error,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleVariable {
    AlphaTilde,
    BetaTilde,
    Alpha,
    Beta,
}

impl OracleVariable {
    pub fn direction(self) -> Direction {
        match self {
            OracleVariable::AlphaTilde | OracleVariable::Alpha => Direction::Forward,
            OracleVariable::BetaTilde | OracleVariable::Beta => Direction::Backward,
        }
    }

    /// `(own, opposite)` field values at a node.
    fn pick(self, n: &TraceNode) -> (f64, f64) {
        match self {
            OracleVariable::AlphaTilde => (n.alpha_tilde, n.beta_tilde),
            OracleVariable::BetaTilde => (n.beta_tilde, n.alpha_tilde),
            OracleVariable::Alpha => (n.alpha, n.beta),
            OracleVariable::Beta => (n.beta, n.alpha),
        }
    }

    /// Time derivative of the variable along its own characteristic.
    fn rate(
        self,
        value: f64,
        node: &TraceNode,
        lambda: f64,
        gas: &GasConstants<f64>,
    ) -> Result<f64> {
        let (_, other) = self.pick(node);
        let dir = self.direction();
        match self {
            OracleVariable::AlphaTilde => {
                riccati_rhs_tilde(value, other, node.eta, node.m_x, dir, gas)
            }
            OracleVariable::BetaTilde => {
                riccati_rhs_tilde(other, value, node.eta, node.m_x, dir, gas)
            }
            OracleVariable::Alpha => {
                riccati_rhs_transformed(value, other, node.eta, node.m_x, lambda, dir, gas)
            }
            OracleVariable::Beta => {
                riccati_rhs_transformed(other, value, node.eta, node.m_x, lambda, dir, gas)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub variable: OracleVariable,
    pub times: Vec<f64>,
    pub oracle: Vec<f64>,
    pub field: Vec<f64>,
    pub max_abs_error: f64,
    pub max_abs_field: f64,
    /// `max |oracle - field| / max |field|` over the compared nodes.
    pub relative_discrepancy: f64,
    /// Time of the last node before the oracle diverged.
    pub blowup_time: Option<f64>,
}

/// Integrates the Riccati ODE along `trace` with RK4, two nodes per step
/// (the middle node supplies the half-step coefficients), starting from
/// the field value at the first node.
pub fn oracle_integrate(
    trace: &CharTrace,
    variable: OracleVariable,
    lambda: f64,
    gas: &GasConstants<f64>,
) -> Result<OracleResult> {
    if trace.direction != variable.direction() {
        return Err(Error::Precondition(format!(
            "{variable:?} evolves along {:?} characteristics",
            variable.direction()
        )));
    }
    let nodes = &trace.nodes;
    let mut value = variable.pick(&nodes[0]).0;
    let mut times = vec![nodes[0].t];
    let mut oracle = vec![value];
    let mut field = vec![value];
    let mut blowup_time = None;
    let mut k = 0;
    while k + 2 < nodes.len() {
        let (n0, n1, n2) = (&nodes[k], &nodes[k + 1], &nodes[k + 2]);
        let h = n2.t - n0.t;
        let step = (|| -> Result<f64> {
            let k1 = variable.rate(value, n0, lambda, gas)?;
            let k2 = variable.rate(value + 0.5 * h * k1, n1, lambda, gas)?;
            let k3 = variable.rate(value + 0.5 * h * k2, n1, lambda, gas)?;
            let k4 = variable.rate(value + h * k3, n2, lambda, gas)?;
            Ok(value + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        })()?;
        if !step.is_finite() || step.abs() > BLOWUP_MAGNITUDE {
            blowup_time = Some(n0.t);
            break;
        }
        value = step;
        times.push(n2.t);
        oracle.push(value);
        field.push(variable.pick(n2).0);
        k += 2;
    }
    let max_abs_error = oracle
        .iter()
        .zip(&field)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let max_abs_field = field.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let relative_discrepancy = if max_abs_field > 0.0 {
        max_abs_error / max_abs_field
    } else {
        max_abs_error
    };
    Ok(OracleResult {
        variable,
        times,
        oracle,
        field,
        max_abs_error,
        max_abs_field,
        relative_discrepancy,
        blowup_time,
    })
}

/// Continues the ODE past the end of a trace with coefficients frozen at
/// `node`, returning the time at which `|value|` exceeds the blowup
/// magnitude, if that happens before `t_max`.
pub fn frozen_blowup_time(
    variable: OracleVariable,
    node: &TraceNode,
    value: f64,
    lambda: f64,
    gas: &GasConstants<f64>,
    h: f64,
    t_max: f64,
) -> Result<Option<f64>> {
    let mut v = value;
    let mut t = node.t;
    while t < t_max {
        // shrink the step as the solution steepens
        let hs = h.min(0.05 / (1.0 + v.abs() * RiccatiScale::of(node, gas)));
        let k1 = variable.rate(v, node, lambda, gas)?;
        let k2 = variable.rate(v + 0.5 * hs * k1, node, lambda, gas)?;
        let k3 = variable.rate(v + 0.5 * hs * k2, node, lambda, gas)?;
        let k4 = variable.rate(v + hs * k3, node, lambda, gas)?;
        v += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += hs;
        if !v.is_finite() || v.abs() > BLOWUP_MAGNITUDE {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

struct RiccatiScale;

impl RiccatiScale {
    /// `k1` at the node, the rate scale of the quadratic term.
    fn of(node: &TraceNode, gas: &GasConstants<f64>) -> f64 {
        super::RiccatiCoeffs::new(gas, node.eta, node.m_x)
            .map(|c| c.k1)
            .unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas3() -> GasConstants<f64> {
        GasConstants::new(3.0, 1.0 / 3.0, 1.0).unwrap()
    }

    /// A trace with `eta = 1`, `m_x = 0` and `beta_tilde = 0` frozen.
    fn frozen_trace(alpha0: f64, h: f64, steps: usize) -> CharTrace {
        let nodes = (0..=steps)
            .map(|k| TraceNode {
                t: k as f64 * h,
                x: k as f64 * h,
                c: 1.0,
                eta: 1.0,
                m: 1.0,
                m_x: 0.0,
                alpha_tilde: if k == 0 { alpha0 } else { 0.0 },
                beta_tilde: 0.0,
                alpha: 0.0,
                beta: 0.0,
            })
            .collect();
        CharTrace {
            direction: Direction::Forward,
            nodes,
            truncated: false,
            path_error: 0.0,
        }
    }

    #[test]
    fn lagrange_weights_partition_unity_and_reproduce_cubics() {
        for s in [0.0, 0.25, 0.5, 0.9] {
            let w = lagrange4(s);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let p = |x: f64| x * x * x - 2.0 * x + 1.0;
            let v: f64 = (-1..=2).zip(w).map(|(o, w)| w * p(o as f64)).sum();
            assert!((v - p(s)).abs() < 1e-13);
        }
    }

    #[test]
    fn frozen_riccati_closed_form() {
        let tr = frozen_trace(1.0, 0.01, 100);
        let res = oracle_integrate(&tr, OracleVariable::AlphaTilde, 0.0, &gas3()).unwrap();
        assert!((res.times.last().unwrap() - 1.0).abs() < 1e-12);
        assert!((res.oracle.last().unwrap() - 0.5).abs() < 1e-9);
        for (t, v) in res.times.iter().zip(&res.oracle) {
            assert!((v - 1.0 / (1.0 + t)).abs() < 1e-9);
        }
    }

    #[test]
    fn frozen_riccati_pole_near_one() {
        let tr = frozen_trace(-1.0, 1e-4, 20_000);
        let res = oracle_integrate(&tr, OracleVariable::AlphaTilde, 0.0, &gas3()).unwrap();
        let tb = res.blowup_time.expect("pole");
        assert!((tb - 1.0).abs() < 1e-3, "{tb}");
    }

    #[test]
    fn frozen_extension_finds_pole() {
        let node = frozen_trace(-1.0, 0.1, 1).nodes[0];
        let t = frozen_blowup_time(
            OracleVariable::AlphaTilde,
            &node,
            -1.0,
            0.0,
            &gas3(),
            0.01,
            5.0,
        )
        .unwrap()
        .unwrap();
        assert!((t - 1.0).abs() < 1e-3, "{t}");
        let none = frozen_blowup_time(
            OracleVariable::AlphaTilde,
            &node,
            1.0,
            0.0,
            &gas3(),
            0.01,
            5.0,
        )
        .unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn zero_initial_value_stays_zero() {
        let tr = frozen_trace(0.0, 0.1, 20);
        let res = oracle_integrate(&tr, OracleVariable::AlphaTilde, 0.0, &gas3()).unwrap();
        assert!(res.oracle.iter().all(|v| *v == 0.0));
        assert_eq!(res.relative_discrepancy, 0.0);
    }

    #[test]
    fn direction_mismatch_is_rejected() {
        let tr = frozen_trace(0.0, 0.1, 4);
        assert!(oracle_integrate(&tr, OracleVariable::Beta, 0.0, &gas3()).is_err());
    }
}
