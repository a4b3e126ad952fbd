//! One-dimensional compressible Euler equations in Lagrangian coordinates.
//!
//! The state is written in the variables `(u, eta, m)`: velocity, a power of
//! the specific volume, and an exponential of the entropy. The crate
//! integrates smooth solutions, evaluates the gradient variables
//! `alpha_tilde = u_x + m eta_x + ((gamma-1)/gamma) m_x eta` and
//! `beta_tilde = u_x - m eta_x - ((gamma-1)/gamma) m_x eta`, and checks
//! along the run that
//!
//! * `max{alpha, beta} < M` with `alpha = alpha_tilde + lambda eta`, and
//! * `min rho(t) >= C_1 / (1 + t)`
//!
//! for explicit constants computed from the initial data.

// Guards written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod gradients;
pub mod num;
pub mod scenarios;
pub mod solver;
pub mod thermo;

pub use characteristics::Direction;
pub use config::RunConfig;
pub use diagnostics::{certify, Analysis, Certificate, DiagnosticsOptions};
pub use error::{Error, Result};
pub use gradients::{BoundParams, DataBounds, GradientField, LevelChoice};
pub use num::Real;
pub use scenarios::{GasSpec, Profile, ScenarioSpec};
pub use solver::{
    Boundary, FieldState, Grid, Numerics, RunOptions, RunResult, Solver, Termination,
};
pub use thermo::{GasConstants, ThermoPoint};

pub type GasConstantsF64 = GasConstants<f64>;
pub type GasConstantsF32 = GasConstants<f32>;
pub type ThermoPointF64 = ThermoPoint<f64>;
pub type ThermoPointF32 = ThermoPoint<f32>;
pub type RiccatiCoeffsF64 = characteristics::RiccatiCoeffs<f64>;
pub type RiccatiCoeffsF32 = characteristics::RiccatiCoeffs<f32>;
