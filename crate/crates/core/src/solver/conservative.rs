//! Diagnostic integrator for the conservative form on periodic grids.
//!
//! ```text
//! tau_t - u_x = 0
//! u_t + p_x = 0
//! (u^2/2 + e)_t + (u p)_x = 0
//! ```
//!
//! Entropy is not evolved here. It is recovered from `(tau, p)`, so its
//! constancy in time checks the equivalence with the `(eta, u, m)` system.

use crate::error::{Error, Result};
use crate::thermo::GasConstants;

use super::stencil::{self, StencilOrder};
use super::{Boundary, FieldState, Grid};

#[derive(Clone, Debug)]
pub struct ConservativeState {
    pub t: f64,
    pub tau: Vec<f64>,
    pub u: Vec<f64>,
    /// Total specific energy `u^2/2 + e`.
    pub energy: Vec<f64>,
}

impl ConservativeState {
    pub fn from_field(state: &FieldState, gas: &GasConstants<f64>) -> Self {
        let n = state.len();
        let mut tau = Vec::with_capacity(n);
        let mut energy = Vec::with_capacity(n);
        for i in 0..n {
            let ta = gas.tau_unchecked(state.eta[i]);
            let p = gas.pressure(state.eta[i], state.m[i]);
            tau.push(ta);
            energy.push(0.5 * state.u[i] * state.u[i] + p * ta / (gas.gamma - 1.0));
        }
        Self {
            t: state.t,
            tau,
            u: state.u.clone(),
            energy,
        }
    }

    pub fn pressure(&self, gas: &GasConstants<f64>) -> Vec<f64> {
        (0..self.tau.len())
            .map(|i| {
                (gas.gamma - 1.0) * (self.energy[i] - 0.5 * self.u[i] * self.u[i]) / self.tau[i]
            })
            .collect()
    }

    /// `S = c_v ln(p tau^gamma / K)`.
    pub fn entropy(&self, gas: &GasConstants<f64>) -> Vec<f64> {
        self.pressure(gas)
            .iter()
            .zip(&self.tau)
            .map(|(p, tau)| gas.c_v * (p * tau.powf(gas.gamma) / gas.k).ln())
            .collect()
    }

    pub fn eta(&self, gas: &GasConstants<f64>) -> Result<Vec<f64>> {
        self.tau.iter().map(|t| gas.eta_from_tau(*t)).collect()
    }
}

pub struct ConservativeIntegrator {
    pub grid: Grid,
    pub gas: GasConstants<f64>,
    pub order: StencilOrder,
    pub cfl: f64,
}

impl ConservativeIntegrator {
    pub fn new(grid: Grid, gas: GasConstants<f64>, order: StencilOrder, cfl: f64) -> Result<Self> {
        if grid.boundary != Boundary::Periodic {
            return Err(Error::Config {
                path: "grid.boundary".into(),
                message: "the conservative integrator supports periodic grids only".into(),
            });
        }
        Ok(Self {
            grid,
            gas,
            order,
            cfl,
        })
    }

    fn derivative(&self, q: &[f64], out: &mut [f64]) {
        let n = q.len();
        let g = stencil::GHOSTS;
        let mut padded = Vec::with_capacity(n + 2 * g);
        padded.extend_from_slice(&q[n - g..]);
        padded.extend_from_slice(q);
        padded.extend_from_slice(&q[..g]);
        stencil::differentiate(&padded, 1.0 / self.grid.dx(), self.order, out);
    }

    fn rhs(&self, s: &ConservativeState) -> Result<[Vec<f64>; 3]> {
        let n = s.u.len();
        let p = s.pressure(&self.gas);
        let up: Vec<f64> = s.u.iter().zip(&p).map(|(u, p)| u * p).collect();
        let mut d_tau = vec![0.0; n];
        let mut d_u = vec![0.0; n];
        let mut d_e = vec![0.0; n];
        self.derivative(&s.u, &mut d_tau);
        self.derivative(&p, &mut d_u);
        self.derivative(&up, &mut d_e);
        d_u.iter_mut().for_each(|v| *v = -*v);
        d_e.iter_mut().for_each(|v| *v = -*v);
        if d_tau.iter().chain(&d_u).chain(&d_e).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "conservative rhs",
                t: s.t,
            });
        }
        Ok([d_tau, d_u, d_e])
    }

    fn max_speed(&self, s: &ConservativeState) -> f64 {
        let p = s.pressure(&self.gas);
        p.iter()
            .zip(&s.tau)
            .map(|(p, tau)| (self.gas.gamma * p / tau).sqrt())
            .fold(0.0, f64::max)
    }

    fn axpy(s: &ConservativeState, h: f64, k: &[Vec<f64>; 3]) -> ConservativeState {
        let f = |q: &[f64], d: &[f64]| q.iter().zip(d).map(|(a, b)| a + h * b).collect();
        ConservativeState {
            t: s.t + h,
            tau: f(&s.tau, &k[0]),
            u: f(&s.u, &k[1]),
            energy: f(&s.energy, &k[2]),
        }
    }

    pub fn step(&self, s: &ConservativeState, dt: f64) -> Result<ConservativeState> {
        let k1 = self.rhs(s)?;
        let k2 = self.rhs(&Self::axpy(s, 0.5 * dt, &k1))?;
        let k3 = self.rhs(&Self::axpy(s, 0.5 * dt, &k2))?;
        let k4 = self.rhs(&Self::axpy(s, dt, &k3))?;
        let combine = |q: &[f64], j: usize| -> Vec<f64> {
            (0..q.len())
                .map(|i| q[i] + dt / 6.0 * (k1[j][i] + 2.0 * k2[j][i] + 2.0 * k3[j][i] + k4[j][i]))
                .collect()
        };
        Ok(ConservativeState {
            t: s.t + dt,
            tau: combine(&s.tau, 0),
            u: combine(&s.u, 1),
            energy: combine(&s.energy, 2),
        })
    }

    /// Integrates to `t_end` with CFL-limited steps, landing on `t_end` exactly.
    pub fn run_to(&self, mut s: ConservativeState, t_end: f64) -> Result<ConservativeState> {
        while s.t < t_end {
            let mut dt = self.cfl * self.grid.dx() / self.max_speed(&s);
            let last = s.t + dt >= t_end - 1e-12 * t_end.abs().max(1.0);
            if last {
                dt = t_end - s.t;
            }
            s = self.step(&s, dt)?;
            if last {
                s.t = t_end;
            }
        }
        Ok(s)
    }
}
