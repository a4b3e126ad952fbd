//! Method-of-lines integration of the Lagrangian system
//!
//! ```text
//! eta_t + (c/m) u_x = 0
//! u_t + m c eta_x + 2 (p/m) m_x = 0
//! m_t = 0
//! ```
//!
//! with central differences in space and classical RK4 in time. The entropy
//! variable `m` and its derivative are fixed by the initial data.

pub mod conservative;
pub mod stencil;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradients::{min_of, GradientField};
use crate::thermo::GasConstants;

pub use stencil::{StencilOrder, GHOSTS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Ghost cells hold the initial far-field values.
    #[default]
    Frozen,
    /// Ghost cells hold the incoming Riemann variable at its far-field value
    /// and extrapolate the outgoing one linearly from the interior.
    Characteristic,
}

/// Uniform cell-centred grid in the Lagrangian coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl Grid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(x_min: f64, x_max: f64, n: usize, boundary: Boundary) -> Result<Self> {
        let grid = Self {
            x_min,
            x_max,
            n,
            boundary,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < Self::MIN_CELLS {
            return Err(Error::domain("n", self.n as f64, "n >= 16"));
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::domain("x_max", self.x_max, "finite x_max > x_min"));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    /// Cell centre; negative or `>= n` indices address ghost cells.
    #[inline]
    pub fn x(&self, i: isize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n as isize).map(|i| self.x(i)).collect()
    }

    pub fn refined(&self, factor: usize) -> Grid {
        Grid {
            n: self.n * factor,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub u: f64,
    pub eta: f64,
    pub m: f64,
}

/// Far-field data for the ghost cells: `left[k]` sits at index `-(k+1)`,
/// `right[k]` at index `n + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FarField {
    pub left: [Cell; GHOSTS],
    pub right: [Cell; GHOSTS],
}

impl FarField {
    /// Evaluates an initial profile at the ghost positions.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Cell) -> Self {
        let n = grid.n as isize;
        Self {
            left: std::array::from_fn(|k| f(grid.x(-(k as isize) - 1))),
            right: std::array::from_fn(|k| f(grid.x(n + k as isize))),
        }
    }

    /// Replicates the edge values of the given arrays.
    pub fn from_edges(u: &[f64], eta: &[f64], m: &[f64]) -> Self {
        let n = u.len();
        let l = Cell {
            u: u[0],
            eta: eta[0],
            m: m[0],
        };
        let r = Cell {
            u: u[n - 1],
            eta: eta[n - 1],
            m: m[n - 1],
        };
        Self {
            left: [l; GHOSTS],
            right: [r; GHOSTS],
        }
    }
}

/// Evolved unknowns at one time level plus the static entropy data.
#[derive(Clone, Debug)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub m: Arc<Vec<f64>>,
    pub m_x: Arc<Vec<f64>>,
    pub far: Arc<FarField>,
}

impl FieldState {
    /// Builds the initial state; `m_x` is computed once with the given stencil.
    pub fn new(
        grid: &Grid,
        order: StencilOrder,
        u: Vec<f64>,
        eta: Vec<f64>,
        m: Vec<f64>,
        far: FarField,
    ) -> Result<Self> {
        grid.validate()?;
        for (name, len) in [("u", u.len()), ("eta", eta.len()), ("m", m.len())] {
            if len != grid.n {
                return Err(Error::LengthMismatch {
                    name,
                    expected: grid.n,
                    got: len,
                });
            }
        }
        if let Some(bad) = eta.iter().find(|e| !(**e > 0.0)) {
            return Err(Error::domain("eta", *bad, "eta > 0"));
        }
        if let Some(bad) = m.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::domain("m", *bad, "m > 0"));
        }
        let ghosts_m = static_ghosts(grid, &m, |c| c.m, &far);
        let padded = pad(&m, &ghosts_m);
        let mut m_x = vec![0.0; grid.n];
        stencil::differentiate(&padded, 1.0 / grid.dx(), order, &mut m_x);
        Ok(Self {
            t: 0.0,
            u,
            eta,
            m: Arc::new(m),
            m_x: Arc::new(m_x),
            far: Arc::new(far),
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn min_eta(&self) -> f64 {
        min_of(&self.eta)
    }

    pub fn rho(&self, gas: &GasConstants<f64>) -> Vec<f64> {
        self.eta
            .iter()
            .map(|e| 1.0 / gas.tau_unchecked(*e))
            .collect()
    }

    pub fn min_rho(&self, gas: &GasConstants<f64>) -> f64 {
        1.0 / gas.tau_unchecked(self.min_eta())
    }

    fn with_fields(&self, t: f64, u: Vec<f64>, eta: Vec<f64>) -> Self {
        Self {
            t,
            u,
            eta,
            m: Arc::clone(&self.m),
            m_x: Arc::clone(&self.m_x),
            far: Arc::clone(&self.far),
        }
    }
}

/// Ghost values for one field: `[left_0..left_G, right_0..right_G]`.
pub(crate) type GhostRow = [f64; 2 * GHOSTS];

fn static_ghosts(grid: &Grid, q: &[f64], pick: impl Fn(&Cell) -> f64, far: &FarField) -> GhostRow {
    let n = q.len();
    let mut g = [0.0; 2 * GHOSTS];
    for k in 0..GHOSTS {
        if grid.boundary == Boundary::Periodic {
            g[k] = q[n - 1 - k];
            g[GHOSTS + k] = q[k];
        } else {
            g[k] = pick(&far.left[k]);
            g[GHOSTS + k] = pick(&far.right[k]);
        }
    }
    g
}

fn pad(q: &[f64], g: &GhostRow) -> Vec<f64> {
    let mut out = Vec::with_capacity(q.len() + 2 * GHOSTS);
    fill_padded(q, g, &mut out);
    out
}

fn fill_padded(q: &[f64], g: &GhostRow, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..GHOSTS).rev().map(|k| g[k]));
    out.extend_from_slice(q);
    out.extend((0..GHOSTS).map(|k| g[GHOSTS + k]));
}

/// Read access to a field including its ghost cells.
#[inline]
pub(crate) fn at(q: &[f64], g: &GhostRow, i: isize) -> f64 {
    let n = q.len() as isize;
    if i < 0 {
        g[(-i - 1) as usize]
    } else if i >= n {
        g[GHOSTS + (i - n) as usize]
    } else {
        q[i as usize]
    }
}

/// Discretization parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub order: StencilOrder,
    pub cfl: f64,
    /// Coefficient of the sixth-order dissipation; zero disables it.
    pub hyperdissipation: f64,
    /// The smoothness monitor fires when `min(alpha_tilde, beta_tilde) < -threshold`.
    pub smoothness_threshold: f64,
    /// Vacuum cut-off relative to the initial minimum of `eta`.
    pub vacuum_ratio: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            order: StencilOrder::Fourth,
            cfl: 0.4,
            hyperdissipation: 0.0,
            smoothness_threshold: 1e3,
            vacuum_ratio: 1e-6,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::domain("cfl", self.cfl, "0 < cfl <= 1"));
        }
        if !(self.hyperdissipation >= 0.0) {
            return Err(Error::domain(
                "hyperdissipation",
                self.hyperdissipation,
                ">= 0",
            ));
        }
        if !(self.smoothness_threshold > 0.0) {
            return Err(Error::domain(
                "smoothness_threshold",
                self.smoothness_threshold,
                "> 0",
            ));
        }
        if !(self.vacuum_ratio > 0.0 && self.vacuum_ratio < 1.0) {
            return Err(Error::domain(
                "vacuum_ratio",
                self.vacuum_ratio,
                "in (0, 1)",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Ok,
    Lost,
}

/// Fires when `min(alpha_tilde, beta_tilde) < -threshold` or when a first
/// derivative exceeds `1 / (10 dx)`.
pub fn smoothness_monitor(field: &GradientField, threshold: f64, dx: f64) -> Smoothness {
    smoothness_of(
        &field.alpha_tilde,
        &field.beta_tilde,
        &field.u_x,
        &field.eta_x,
        threshold,
        dx,
    )
}

fn smoothness_of(
    alpha_tilde: &[f64],
    beta_tilde: &[f64],
    u_x: &[f64],
    eta_x: &[f64],
    threshold: f64,
    dx: f64,
) -> Smoothness {
    let limit = 1.0 / (10.0 * dx);
    let compressed = alpha_tilde
        .iter()
        .chain(beta_tilde)
        .any(|g| *g < -threshold || g.is_nan());
    let steep = u_x.iter().chain(eta_x).any(|d| !(d.abs() <= limit));
    if compressed || steep {
        Smoothness::Lost
    } else {
        Smoothness::Ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Horizon { t: f64 },
    SmoothnessLost { t: f64 },
    Vacuum { t: f64 },
    NumericalFault { t: f64, message: String },
}

impl Termination {
    pub fn time(&self) -> f64 {
        match self {
            Termination::Horizon { t }
            | Termination::SmoothnessLost { t }
            | Termination::Vacuum { t }
            | Termination::NumericalFault { t, .. } => *t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub horizon: f64,
    pub snapshot_interval: f64,
}

/// Snapshots of a completed integration.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub solver: Solver,
    pub snapshots: Vec<FieldState>,
    /// Running maximum of `u_x` over every step up to each snapshot.
    pub running_max_ux: Vec<f64>,
    pub termination: Termination,
    pub steps: usize,
}

impl RunResult {
    pub fn initial(&self) -> &FieldState {
        &self.snapshots[0]
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn gradient_fields(&self, lambda: f64) -> Result<Vec<GradientField>> {
        self.snapshots
            .iter()
            .map(|s| self.solver.gradient_field(s, lambda))
            .collect()
    }
}

#[derive(Default)]
struct Work {
    up: Vec<f64>,
    ep: Vec<f64>,
    u_x: Vec<f64>,
    eta_x: Vec<f64>,
}

struct Rk4Buffers {
    k: [(Vec<f64>, Vec<f64>); 4],
    stage_u: Vec<f64>,
    stage_eta: Vec<f64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| (vec![0.0; n], vec![0.0; n])),
            stage_u: vec![0.0; n],
            stage_eta: vec![0.0; n],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solver {
    pub grid: Grid,
    pub gas: GasConstants<f64>,
    pub numerics: Numerics,
}

impl Solver {
    pub fn new(grid: Grid, gas: GasConstants<f64>, numerics: Numerics) -> Result<Self> {
        grid.validate()?;
        numerics.validate()?;
        Ok(Self {
            grid,
            gas,
            numerics,
        })
    }

    /// Ghost rows for `u` and `eta` under the configured boundary rule.
    pub(crate) fn ghosts(
        &self,
        u: &[f64],
        eta: &[f64],
        m: &[f64],
        far: &FarField,
    ) -> (GhostRow, GhostRow) {
        match self.grid.boundary {
            Boundary::Periodic | Boundary::Frozen => (
                static_ghosts(&self.grid, u, |c| c.u, far),
                static_ghosts(&self.grid, eta, |c| c.eta, far),
            ),
            Boundary::Characteristic => {
                let n = u.len();
                let r = |i: usize| u[i] - m[i] * eta[i];
                let s = |i: usize| u[i] + m[i] * eta[i];
                let mut gu = [0.0; 2 * GHOSTS];
                let mut ge = [0.0; 2 * GHOSTS];
                for k in 0..GHOSTS {
                    let dist = (k + 1) as f64;
                    // left: backward family leaves, forward family enters
                    let c = far.left[k];
                    let r_out = r(0) + dist * (r(0) - r(1));
                    let s_in = c.u + c.m * c.eta;
                    gu[k] = 0.5 * (s_in + r_out);
                    ge[k] = 0.5 * (s_in - r_out) / c.m;
                    // right: forward family leaves, backward family enters
                    let c = far.right[k];
                    let s_out = s(n - 1) + dist * (s(n - 1) - s(n - 2));
                    let r_in = c.u - c.m * c.eta;
                    gu[GHOSTS + k] = 0.5 * (s_out + r_in);
                    ge[GHOSTS + k] = 0.5 * (s_out - r_in) / c.m;
                }
                (gu, ge)
            }
        }
    }

    pub fn max_speed(&self, eta: &[f64], m: &[f64]) -> f64 {
        eta.iter()
            .zip(m)
            .map(|(e, m)| self.gas.sound_speed(*e, *m))
            .fold(0.0, f64::max)
    }

    pub fn cfl_limit(&self, state: &FieldState) -> f64 {
        self.numerics.cfl * self.grid.dx() / self.max_speed(&state.eta, &state.m)
    }

    /// Right-hand side into `deta`, `du`; leaves `u_x`, `eta_x` in `work`.
    #[allow(clippy::too_many_arguments)]
    fn evaluate(
        &self,
        t: f64,
        u: &[f64],
        eta: &[f64],
        m: &[f64],
        m_x: &[f64],
        far: &FarField,
        work: &mut Work,
        deta: &mut [f64],
        du: &mut [f64],
    ) -> Result<()> {
        let n = u.len();
        let inv_dx = 1.0 / self.grid.dx();
        let order = self.numerics.order;
        let (gu, ge) = self.ghosts(u, eta, m, far);
        fill_padded(u, &gu, &mut work.up);
        fill_padded(eta, &ge, &mut work.ep);
        work.u_x.resize(n, 0.0);
        work.eta_x.resize(n, 0.0);

        let gamma = self.gas.gamma;
        let speed_exp = self.gas.speed_exponent();
        let (k_c, k_p) = (self.gas.k_c, self.gas.k_p);
        let mut c_max: f64 = 0.0;
        for i in 0..n {
            let j = i + GHOSTS;
            let ux = stencil::d1(&work.up, j, inv_dx, order);
            let ex = stencil::d1(&work.ep, j, inv_dx, order);
            work.u_x[i] = ux;
            work.eta_x[i] = ex;
            let e = eta[i];
            let mi = m[i];
            let ea = e.powf(speed_exp);
            let c = k_c * mi * ea;
            // eta^{2 gamma/(gamma-1)} = eta^{(gamma+1)/(gamma-1)} * eta
            let p_over_m = k_p * mi * ea * e;
            c_max = c_max.max(c);
            deta[i] = -(c / mi) * ux;
            du[i] = -mi * c * ex - 2.0 * p_over_m * m_x[i];
        }
        debug_assert!((2.0 * gamma / (gamma - 1.0) - speed_exp - 1.0).abs() < 1e-12);

        let nu = self.numerics.hyperdissipation;
        if nu > 0.0 {
            let scale = nu * c_max * inv_dx / 64.0;
            for i in 0..n {
                let j = i + GHOSTS;
                deta[i] += scale * stencil::delta6(&work.ep, j);
                du[i] += scale * stencil::delta6(&work.up, j);
            }
        }

        if deta.iter().chain(du.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "rhs", t });
        }
        Ok(())
    }

    /// `(deta_dt, du_dt)` at the given state.
    pub fn rhs(&self, state: &FieldState) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = state.len();
        let mut work = Work::default();
        let (mut deta, mut du) = (vec![0.0; n], vec![0.0; n]);
        self.evaluate(
            state.t, &state.u, &state.eta, &state.m, &state.m_x, &state.far, &mut work, &mut deta,
            &mut du,
        )?;
        Ok((deta, du))
    }

    /// First derivatives `(u_x, eta_x)` under the boundary rule.
    pub fn derivatives(&self, state: &FieldState) -> (Vec<f64>, Vec<f64>) {
        let inv_dx = 1.0 / self.grid.dx();
        let (gu, ge) = self.ghosts(&state.u, &state.eta, &state.m, &state.far);
        let mut u_x = vec![0.0; state.len()];
        let mut eta_x = vec![0.0; state.len()];
        stencil::differentiate(&pad(&state.u, &gu), inv_dx, self.numerics.order, &mut u_x);
        stencil::differentiate(
            &pad(&state.eta, &ge),
            inv_dx,
            self.numerics.order,
            &mut eta_x,
        );
        (u_x, eta_x)
    }

    pub fn gradient_field(&self, state: &FieldState, lambda: f64) -> Result<GradientField> {
        let (u_x, eta_x) = self.derivatives(state);
        GradientField::from_derivatives(
            u_x,
            eta_x,
            state.m_x.as_ref().clone(),
            &state.m,
            &state.eta,
            self.gas.gamma,
            lambda,
        )
    }

    /// One RK4 step of size `dt` (negative `dt` integrates backwards).
    pub fn step(&self, state: &FieldState, dt: f64) -> Result<FieldState> {
        let limit = self.cfl_limit(state);
        if !(dt.abs() <= limit * (1.0 + 1e-12)) {
            return Err(Error::CflViolation { dt, limit });
        }
        let n = state.len();
        let mut work = Work::default();
        let mut buf = Rk4Buffers::new(n);
        let (k1e, k1u) = &mut buf.k[0];
        self.evaluate(
            state.t, &state.u, &state.eta, &state.m, &state.m_x, &state.far, &mut work, k1e, k1u,
        )?;
        let (u, eta) = self.rk4_from_first_stage(state, dt, &mut work, &mut buf)?;
        Ok(state.with_fields(state.t + dt, u, eta))
    }

    fn rk4_from_first_stage(
        &self,
        state: &FieldState,
        dt: f64,
        work: &mut Work,
        buf: &mut Rk4Buffers,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = state.len();
        for (stage, frac) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
            let h = frac * dt;
            let (done, rest) = buf.k.split_at_mut(stage);
            let (ke, ku) = &done[stage - 1];
            for i in 0..n {
                buf.stage_eta[i] = state.eta[i] + h * ke[i];
                buf.stage_u[i] = state.u[i] + h * ku[i];
            }
            let (oe, ou) = &mut rest[0];
            self.evaluate(
                state.t + h,
                &buf.stage_u,
                &buf.stage_eta,
                &state.m,
                &state.m_x,
                &state.far,
                work,
                oe,
                ou,
            )?;
        }
        let w = dt / 6.0;
        let mut u = state.u.clone();
        let mut eta = state.eta.clone();
        let [(k1e, k1u), (k2e, k2u), (k3e, k3u), (k4e, k4u)] = &buf.k;
        for i in 0..n {
            eta[i] += w * (k1e[i] + 2.0 * k2e[i] + 2.0 * k3e[i] + k4e[i]);
            u[i] += w * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        }
        if eta.iter().chain(u.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "step",
                t: state.t + dt,
            });
        }
        Ok((u, eta))
    }

    /// Integrates to the horizon, stopping early on loss of smoothness,
    /// approach to vacuum or a numerical fault.
    pub fn run(&self, initial: FieldState, opts: RunOptions) -> Result<RunResult> {
        if !(opts.horizon >= 0.0) {
            return Err(Error::domain("horizon", opts.horizon, "horizon >= 0"));
        }
        if !(opts.snapshot_interval > 0.0) {
            return Err(Error::domain(
                "snapshot_interval",
                opts.snapshot_interval,
                "> 0",
            ));
        }
        if initial.len() != self.grid.n {
            return Err(Error::LengthMismatch {
                name: "state",
                expected: self.grid.n,
                got: initial.len(),
            });
        }
        let n = self.grid.n;
        let dx = self.grid.dx();
        let gamma = self.gas.gamma;
        let eta_floor = self.numerics.vacuum_ratio * initial.min_eta();
        let threshold = self.numerics.smoothness_threshold;

        let mut work = Work::default();
        let mut buf = Rk4Buffers::new(n);
        let mut at_ = vec![0.0; n];
        let mut bt_ = vec![0.0; n];

        let t0 = initial.t;
        let mut state = initial;
        let mut snapshots = vec![];
        let mut running_max_ux = vec![];
        let mut max_ux = f64::NEG_INFINITY;
        let mut next_index = 1usize;
        let mut steps = 0usize;

        let termination = loop {
            // first stage doubles as the derivative evaluation for the monitor
            let first = {
                let (k1e, k1u) = &mut buf.k[0];
                self.evaluate(
                    state.t, &state.u, &state.eta, &state.m, &state.m_x, &state.far, &mut work,
                    k1e, k1u,
                )
            };
            if let Err(e) = first {
                break Termination::NumericalFault {
                    t: state.t,
                    message: e.to_string(),
                };
            }
            for i in 0..n {
                let (a, b) = crate::gradients::tilde_pair(
                    work.u_x[i],
                    work.eta_x[i],
                    state.m_x[i],
                    state.m[i],
                    state.eta[i],
                    gamma,
                );
                at_[i] = a;
                bt_[i] = b;
            }
            if smoothness_of(&at_, &bt_, &work.u_x, &work.eta_x, threshold, dx) == Smoothness::Lost
            {
                break Termination::SmoothnessLost { t: state.t };
            }
            max_ux = work.u_x.iter().copied().fold(max_ux, f64::max);
            if snapshots.is_empty() {
                snapshots.push(state.clone());
                running_max_ux.push(max_ux);
            }
            if state.t >= t0 + opts.horizon {
                break Termination::Horizon { t: state.t };
            }

            let target = (t0 + next_index as f64 * opts.snapshot_interval).min(t0 + opts.horizon);
            let mut dt = self.numerics.cfl * dx / self.max_speed(&state.eta, &state.m);
            let hit = state.t + dt >= target - 1e-12 * target.abs().max(1.0);
            if hit {
                dt = target - state.t;
            }
            let (u, eta) = match self.rk4_from_first_stage(&state, dt, &mut work, &mut buf) {
                Ok(v) => v,
                Err(e) => {
                    break Termination::NumericalFault {
                        t: state.t,
                        message: e.to_string(),
                    }
                }
            };
            let t_new = if hit { target } else { state.t + dt };
            state = state.with_fields(t_new, u, eta);
            steps += 1;

            if state.eta.iter().any(|e| !(*e > eta_floor)) {
                snapshots.push(state.clone());
                running_max_ux.push(max_ux);
                break Termination::Vacuum { t: state.t };
            }
            if hit {
                snapshots.push(state.clone());
                running_max_ux.push(max_ux);
                next_index += 1;
            }
        };

        // the final snapshot may not have had its own derivative pass
        if let Some(last) = running_max_ux.last_mut() {
            *last = last.max(max_ux);
        }
        log::debug!(
            "run finished after {steps} steps: {:?}, {} snapshots",
            termination,
            snapshots.len()
        );
        Ok(RunResult {
            solver: self.clone(),
            snapshots,
            running_max_ux,
            termination,
            steps,
        })
    }
}
