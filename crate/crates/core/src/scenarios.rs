//! Initial-data generators.
//!
//! Every profile is a smooth function of `x`, evaluated at cell centres and
//! at the ghost positions so that frozen boundaries see the analytic far
//! field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradients::DataBounds;
use crate::solver::{Boundary, Cell, FarField, FieldState, Grid, RunOptions, StencilOrder};
use crate::thermo::{m_from_entropy, GasConstants};

/// Gas parameters as they appear in a config; `K` defaults to the value
/// that makes `eta = 1` correspond to `tau = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSpec {
    pub gamma: f64,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default = "one")]
    pub c_v: f64,
}

fn one() -> f64 {
    1.0
}

impl GasSpec {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            k: None,
            c_v: 1.0,
        }
    }

    pub fn constants(&self) -> Result<GasConstants<f64>> {
        if !(self.gamma > 1.0) {
            return Err(Error::domain("gamma", self.gamma, "gamma > 1"));
        }
        let k = self.k.unwrap_or_else(|| GasConstants::unit_k(self.gamma));
        GasConstants::new(self.gamma, k, self.c_v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        #[serde(default)]
        u0: f64,
        eta0: f64,
        m0: f64,
    },
    /// `u = A tanh(x/w)`.
    Rarefaction {
        amplitude: f64,
        width: f64,
        #[serde(default = "one")]
        eta0: f64,
        #[serde(default = "one")]
        m0: f64,
    },
    /// `u = A tanh(x/w)`, `S = s_a tanh(x/w_s)`.
    Nonisentropic {
        entropy_amplitude: f64,
        entropy_width: f64,
        amplitude: f64,
        width: f64,
        #[serde(default = "one")]
        eta0: f64,
    },
    /// `u = -A tanh(x/w)`.
    Compressive {
        amplitude: f64,
        width: f64,
        #[serde(default = "one")]
        eta0: f64,
        #[serde(default = "one")]
        m0: f64,
    },
    /// Single-mode data for periodic grids:
    /// `u = a_u sin(kx)`, `eta = eta0 + a_eta cos(kx)`, `S = s_a sin(kx)`.
    Sinusoidal {
        #[serde(default)]
        u_amplitude: f64,
        #[serde(default)]
        eta_amplitude: f64,
        #[serde(default)]
        entropy_amplitude: f64,
        #[serde(default = "one")]
        eta0: f64,
        #[serde(default = "one_mode")]
        modes: u32,
    },
}

fn one_mode() -> u32 {
    1
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(name, v, "> 0"))
            }
        };
        match *self {
            Profile::Constant { u0, eta0, m0 } => {
                if !u0.is_finite() {
                    return Err(Error::domain("u0", u0, "finite"));
                }
                positive("eta0", eta0)?;
                positive("m0", m0)
            }
            Profile::Rarefaction {
                amplitude,
                width,
                eta0,
                m0,
            }
            | Profile::Compressive {
                amplitude,
                width,
                eta0,
                m0,
            } => {
                positive("amplitude", amplitude)?;
                positive("width", width)?;
                positive("eta0", eta0)?;
                positive("m0", m0)
            }
            Profile::Nonisentropic {
                entropy_amplitude,
                entropy_width,
                amplitude,
                width,
                eta0,
            } => {
                if !entropy_amplitude.is_finite() {
                    return Err(Error::domain(
                        "entropy_amplitude",
                        entropy_amplitude,
                        "finite",
                    ));
                }
                positive("entropy_width", entropy_width)?;
                positive("amplitude", amplitude)?;
                positive("width", width)?;
                positive("eta0", eta0)
            }
            Profile::Sinusoidal {
                u_amplitude,
                eta_amplitude,
                entropy_amplitude,
                eta0,
                modes,
            } => {
                positive("eta0", eta0)?;
                if !(eta_amplitude.abs() < eta0) {
                    return Err(Error::domain(
                        "eta_amplitude",
                        eta_amplitude,
                        "|eta_amplitude| < eta0",
                    ));
                }
                if !u_amplitude.is_finite() || !entropy_amplitude.is_finite() {
                    return Err(Error::Precondition(
                        "sinusoidal amplitudes must be finite".into(),
                    ));
                }
                if modes == 0 {
                    return Err(Error::domain("modes", 0.0, ">= 1"));
                }
                Ok(())
            }
        }
    }

    /// The profile at one point.
    pub fn cell(&self, x: f64, grid: &Grid, gas: &GasConstants<f64>) -> Cell {
        match *self {
            Profile::Constant { u0, eta0, m0 } => Cell {
                u: u0,
                eta: eta0,
                m: m0,
            },
            Profile::Rarefaction {
                amplitude,
                width,
                eta0,
                m0,
            } => Cell {
                u: amplitude * (x / width).tanh(),
                eta: eta0,
                m: m0,
            },
            Profile::Compressive {
                amplitude,
                width,
                eta0,
                m0,
            } => Cell {
                u: -amplitude * (x / width).tanh(),
                eta: eta0,
                m: m0,
            },
            Profile::Nonisentropic {
                entropy_amplitude,
                entropy_width,
                amplitude,
                width,
                eta0,
            } => Cell {
                u: amplitude * (x / width).tanh(),
                eta: eta0,
                m: m_from_entropy(entropy_amplitude * (x / entropy_width).tanh(), gas.c_v),
            },
            Profile::Sinusoidal {
                u_amplitude,
                eta_amplitude,
                entropy_amplitude,
                eta0,
                modes,
            } => {
                let k = 2.0 * PI * modes as f64 / (grid.x_max - grid.x_min);
                let phase = k * (x - grid.x_min);
                Cell {
                    u: u_amplitude * phase.sin(),
                    eta: eta0 + eta_amplitude * phase.cos(),
                    m: m_from_entropy(entropy_amplitude * phase.sin(), gas.c_v),
                }
            }
        }
    }

    pub fn is_isentropic(&self) -> bool {
        match *self {
            Profile::Nonisentropic {
                entropy_amplitude, ..
            }
            | Profile::Sinusoidal {
                entropy_amplitude, ..
            } => entropy_amplitude == 0.0,
            _ => true,
        }
    }

    /// Samples the profile on the grid.
    pub fn generate(
        &self,
        grid: &Grid,
        order: StencilOrder,
        gas: &GasConstants<f64>,
    ) -> Result<FieldState> {
        self.validate()?;
        grid.validate()?;
        let x = grid.coordinates();
        let cells: Vec<Cell> = x.iter().map(|x| self.cell(*x, grid, gas)).collect();
        let far = FarField::from_fn(grid, |x| self.cell(x, grid, gas));
        FieldState::new(
            grid,
            order,
            cells.iter().map(|c| c.u).collect(),
            cells.iter().map(|c| c.eta).collect(),
            cells.iter().map(|c| c.m).collect(),
            far,
        )
    }
}

pub fn constant_state(
    grid: &Grid,
    order: StencilOrder,
    gas: &GasConstants<f64>,
    u0: f64,
    eta0: f64,
    m0: f64,
) -> Result<FieldState> {
    Profile::Constant { u0, eta0, m0 }.generate(grid, order, gas)
}

/// Two outgoing smoothed rarefactions. The pair drives the centre towards
/// vacuum when `A >= m0 eta0`.
pub fn rarefaction_interaction(
    grid: &Grid,
    order: StencilOrder,
    gas: &GasConstants<f64>,
    amplitude: f64,
    width: f64,
    eta0: f64,
    m0: f64,
) -> Result<FieldState> {
    Profile::Rarefaction {
        amplitude,
        width,
        eta0,
        m0,
    }
    .generate(grid, order, gas)
}

pub fn nonisentropic_smooth(
    grid: &Grid,
    order: StencilOrder,
    gas: &GasConstants<f64>,
    entropy_amplitude: f64,
    entropy_width: f64,
    amplitude: f64,
    width: f64,
) -> Result<FieldState> {
    Profile::Nonisentropic {
        entropy_amplitude,
        entropy_width,
        amplitude,
        width,
        eta0: 1.0,
    }
    .generate(grid, order, gas)
}

pub fn compressive(
    grid: &Grid,
    order: StencilOrder,
    gas: &GasConstants<f64>,
    amplitude: f64,
    width: f64,
) -> Result<FieldState> {
    Profile::Compressive {
        amplitude,
        width,
        eta0: 1.0,
        m0: 1.0,
    }
    .generate(grid, order, gas)
}

/// `A >= m0 eta0`: the Riemann invariants of the two far fields overlap.
pub fn approaches_vacuum(amplitude: f64, eta0: f64, m0: f64) -> bool {
    amplitude >= m0 * eta0
}

/// A complete initial-value problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub gas: GasSpec,
    pub grid: Grid,
    pub profile: Profile,
    pub horizon: f64,
    pub snapshot_interval: f64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.gas.constants()?;
        self.grid.validate()?;
        self.profile.validate()?;
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::domain(
                "horizon",
                self.horizon,
                "finite horizon >= 0",
            ));
        }
        if !(self.snapshot_interval > 0.0) {
            return Err(Error::domain(
                "snapshot_interval",
                self.snapshot_interval,
                "> 0",
            ));
        }
        if let Profile::Sinusoidal { .. } = self.profile {
            if self.grid.boundary != Boundary::Periodic {
                return Err(Error::Config {
                    path: "grid.boundary".into(),
                    message: "sinusoidal data needs a periodic grid".into(),
                });
            }
        }
        Ok(())
    }

    /// Generates the initial state after checking the data hypotheses.
    pub fn initial_state(&self, order: StencilOrder) -> Result<(GasConstants<f64>, FieldState)> {
        self.validate()?;
        let gas = self.gas.constants()?;
        let state = self.profile.generate(&self.grid, order, &gas)?;
        check_hypotheses(&state, &gas)?;
        if let Some(msg) = self.far_field_warning(&gas, &state) {
            log::warn!("{}: {msg}", self.name);
        }
        Ok((gas, state))
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            horizon: self.horizon,
            snapshot_interval: self.snapshot_interval,
        }
    }

    /// Non-periodic runs whose sound waves can reach the boundary before
    /// the horizon.
    pub fn far_field_warning(&self, gas: &GasConstants<f64>, state: &FieldState) -> Option<String> {
        if self.grid.boundary == Boundary::Periodic {
            return None;
        }
        let c_max = state
            .eta
            .iter()
            .zip(state.m.iter())
            .map(|(e, m)| gas.sound_speed(*e, *m))
            .fold(0.0, f64::max);
        let reach = c_max * self.horizon;
        let distance = (-self.grid.x_min).min(self.grid.x_max);
        (reach > distance).then(|| {
            format!(
                "c_max * T = {reach:.3} exceeds the distance {distance:.3} to the boundary; \
                 far-field data are not valid up to the horizon"
            )
        })
    }
}

/// Checks positivity and boundedness of the data and returns its bounds.
pub fn check_hypotheses(state: &FieldState, gas: &GasConstants<f64>) -> Result<DataBounds> {
    let all_finite = state
        .u
        .iter()
        .chain(&state.eta)
        .chain(state.m.iter())
        .chain(state.m_x.iter())
        .all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::NonFinite {
            what: "initial data",
            t: state.t,
        });
    }
    let bounds = DataBounds::measure(gas, &state.u, &state.eta, &state.m, &state.m_x);
    if !(bounds.m_l > 0.0) {
        return Err(Error::domain("M_L", bounds.m_l, "M_L > 0"));
    }
    if !bounds.v.is_finite() {
        return Err(Error::domain("V", bounds.v, "finite total variation"));
    }
    Ok(bounds)
}
