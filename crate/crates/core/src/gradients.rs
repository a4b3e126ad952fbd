//! Gradient variables and the explicit invariant-domain constants.
//!
//! ```text
//! alpha_tilde = u_x + m eta_x + ((gamma-1)/gamma) m_x eta
//! beta_tilde  = u_x - m eta_x - ((gamma-1)/gamma) m_x eta
//! alpha       = alpha_tilde + lambda eta
//! beta        = beta_tilde  + lambda eta
//! ```
//!
//! `alpha_tilde` (`beta_tilde`) is positive in forward (backward)
//! rarefactions and negative in compressions. The shifted pair `(alpha, beta)`
//! admits the invariant domain `max{alpha, beta} < M` once `M >= M_star`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{as_f64, lit, Real};
use crate::thermo::GasConstants;

/// Pointwise `(alpha_tilde, beta_tilde)`.
#[inline]
pub fn tilde_pair<T: Real>(u_x: T, eta_x: T, m_x: T, m: T, eta: T, gamma: T) -> (T, T) {
    let entropy_term = (gamma - T::one()) / gamma * m_x * eta;
    let wave = m * eta_x + entropy_term;
    (u_x + wave, u_x - wave)
}

/// Applies [`tilde_pair`] over grid arrays.
pub fn tilde_gradients<T: Real>(
    u_x: &[T],
    eta_x: &[T],
    m_x: &[T],
    m: &[T],
    eta: &[T],
    gamma: T,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = eta.len();
    for (name, len) in [
        ("u_x", u_x.len()),
        ("eta_x", eta_x.len()),
        ("m_x", m_x.len()),
        ("m", m.len()),
    ] {
        if len != n {
            return Err(Error::LengthMismatch {
                name,
                expected: n,
                got: len,
            });
        }
    }
    Ok((0..n)
        .map(|i| tilde_pair(u_x[i], eta_x[i], m_x[i], m[i], eta[i], gamma))
        .unzip())
}

/// Local rarefaction/compression character of one family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Character {
    Rarefaction,
    Compression,
    Neutral,
}

impl Character {
    pub fn of<T: Real>(gradient: T) -> Self {
        if gradient > T::zero() {
            Character::Rarefaction
        } else if gradient < T::zero() {
            Character::Compression
        } else {
            Character::Neutral
        }
    }
}

/// `(forward, backward)` character from `(alpha_tilde, beta_tilde)`.
pub fn rc_character<T: Real>(alpha_tilde: T, beta_tilde: T) -> (Character, Character) {
    (Character::of(alpha_tilde), Character::of(beta_tilde))
}

/// The larger of the two coefficients in the `M_star` formula.
fn level_factor<T: Real>(gamma: T) -> T {
    let one = T::one();
    let first = lit::<T>(2.0) * (gamma - one) / gamma;
    let second = (lit::<T>(3.0) * gamma - one) / (gamma + one) * lit::<T>(4.0) / gamma;
    first.max(second)
}

/// Returns `(M_star, lambda)` from the bounds `M_eta >= eta` and `M_D >= |m_x|`.
pub fn bound_constants<T: Real>(gamma: T, m_eta: T, m_d: T) -> Result<(T, T)> {
    if !(gamma > T::one()) {
        return Err(Error::domain("gamma", as_f64(gamma), "gamma > 1"));
    }
    if !(m_eta > T::zero()) {
        return Err(Error::domain("M_eta", as_f64(m_eta), "M_eta > 0"));
    }
    if !(m_d >= T::zero()) {
        return Err(Error::domain("M_D", as_f64(m_d), "M_D >= 0"));
    }
    let one = T::one();
    let m_star = lit::<T>(4.0) * m_eta * m_d * level_factor(gamma);
    let lambda = (gamma + one) / (lit::<T>(3.0) * gamma - one) * m_star / (lit::<T>(4.0) * m_eta);
    Ok((m_star, lambda))
}

/// `lambda` written without `M_star`; independent of `M_eta`.
pub fn lambda_from_slope_bound<T: Real>(gamma: T, m_d: T) -> T {
    let one = T::one();
    (gamma + one) / (lit::<T>(3.0) * gamma - one) * m_d * level_factor(gamma)
}

/// `K_1 = (5 (gamma+1) / (8 (gamma-1))) K_c M_eta^{2/(gamma-1)}`.
pub fn lemma_constant_k1<T: Real>(gamma: T, k_c: T, m_eta: T) -> Result<T> {
    if !(gamma > T::one()) {
        return Err(Error::domain("gamma", as_f64(gamma), "gamma > 1"));
    }
    let gm1 = gamma - T::one();
    Ok(lit::<T>(5.0) * (gamma + T::one()) / (lit::<T>(8.0) * gm1)
        * k_c
        * m_eta.powf(lit::<T>(2.0) / gm1))
}

/// `C_1 = 1 / max(tau_max0, M)`, so that `1/(tau_max0 + M t) >= C_1/(1+t)`.
pub fn density_floor_constant<T: Real>(tau_max0: T, level: T) -> Result<T> {
    if !(tau_max0 > T::zero()) {
        return Err(Error::domain("tau_max0", as_f64(tau_max0), "tau_max0 > 0"));
    }
    if !(level > T::zero()) {
        return Err(Error::domain("M", as_f64(level), "M > 0"));
    }
    Ok(tau_max0.max(level).recip())
}

/// Grid arrays of first derivatives and gradient variables at one time level.
#[derive(Clone, Debug, Default)]
pub struct GradientField {
    pub u_x: Vec<f64>,
    pub eta_x: Vec<f64>,
    pub m_x: Vec<f64>,
    pub alpha_tilde: Vec<f64>,
    pub beta_tilde: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl GradientField {
    /// Assembles the field from derivatives; `m`, `eta` are the point values.
    pub fn from_derivatives(
        u_x: Vec<f64>,
        eta_x: Vec<f64>,
        m_x: Vec<f64>,
        m: &[f64],
        eta: &[f64],
        gamma: f64,
        lambda: f64,
    ) -> Result<Self> {
        let (alpha_tilde, beta_tilde) = tilde_gradients(&u_x, &eta_x, &m_x, m, eta, gamma)?;
        let alpha = alpha_tilde
            .iter()
            .zip(eta)
            .map(|(a, e)| a + lambda * e)
            .collect();
        let beta = beta_tilde
            .iter()
            .zip(eta)
            .map(|(b, e)| b + lambda * e)
            .collect();
        Ok(Self {
            u_x,
            eta_x,
            m_x,
            alpha_tilde,
            beta_tilde,
            alpha,
            beta,
        })
    }

    pub fn len(&self) -> usize {
        self.u_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_x.is_empty()
    }

    pub fn max_alpha(&self) -> f64 {
        max_of(&self.alpha)
    }

    pub fn max_beta(&self) -> f64 {
        max_of(&self.beta)
    }

    /// `max_x max(alpha_tilde, beta_tilde)`.
    pub fn max_tilde(&self) -> f64 {
        max_of(&self.alpha_tilde).max(max_of(&self.beta_tilde))
    }

    pub fn min_tilde(&self) -> f64 {
        min_of(&self.alpha_tilde).min(min_of(&self.beta_tilde))
    }

    pub fn max_u_x(&self) -> f64 {
        max_of(&self.u_x)
    }
}

pub(crate) fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Suprema and integrals measured over a data set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataBounds {
    #[serde(rename = "M_L")]
    pub m_l: f64,
    #[serde(rename = "M_U")]
    pub m_u: f64,
    #[serde(rename = "M_D")]
    pub m_d: f64,
    #[serde(rename = "M_eta")]
    pub m_eta: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "M_sbar")]
    pub m_sbar: f64,
    #[serde(rename = "M_rbar")]
    pub m_rbar: f64,
    pub tau_max: f64,
}

impl DataBounds {
    /// Measures bounds on grid data. `V` is the discrete total variation of `ln m`.
    pub fn measure(
        gas: &GasConstants<f64>,
        u: &[f64],
        eta: &[f64],
        m: &[f64],
        m_x: &[f64],
    ) -> Self {
        let v = m.windows(2).map(|w| (w[1].ln() - w[0].ln()).abs()).sum();
        let mut b = DataBounds {
            m_l: min_of(m),
            m_u: max_of(m),
            m_d: m_x.iter().fold(0.0, |acc: f64, d| acc.max(d.abs())),
            m_eta: max_of(eta),
            v,
            m_sbar: 0.0,
            m_rbar: 0.0,
            tau_max: 0.0,
        };
        for i in 0..eta.len() {
            let me = m[i] * eta[i];
            b.m_sbar = b.m_sbar.max((u[i] + me).abs());
            b.m_rbar = b.m_rbar.max((u[i] - me).abs());
        }
        b.tau_max = gas.tau_unchecked(min_of(eta));
        b
    }
}

pub const ROUNDOFF_LEVEL: f64 = 1e-9;

/// How the invariant-domain level `M` is picked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelChoice {
    /// `max(M_star, (1 + margin) max_x{alpha, beta}(0))`; falls back to
    /// `margin` when that is non-positive or at roundoff level.
    Auto {
        margin: f64,
    },
    Fixed(f64),
}

impl LevelChoice {
    /// `scale` is the largest `|alpha_tilde|, |beta_tilde|` of the data; a
    /// level below `ROUNDOFF_LEVEL * max(scale, 1)` counts as zero.
    pub fn resolve(self, m_star: f64, initial_max: f64, scale: f64) -> f64 {
        match self {
            LevelChoice::Fixed(m) => m,
            LevelChoice::Auto { margin } => {
                let level = m_star.max((1.0 + margin) * initial_max);
                if level > ROUNDOFF_LEVEL * scale.max(1.0) {
                    level
                } else {
                    margin
                }
            }
        }
    }
}

/// Invariant-domain and density-floor constants for one data set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    #[serde(flatten)]
    pub data: DataBounds,
    #[serde(rename = "M_star")]
    pub m_star: f64,
    pub lambda: f64,
    #[serde(rename = "M")]
    pub level: f64,
    #[serde(rename = "K_1")]
    pub k1: f64,
    #[serde(rename = "C_1")]
    pub c1: f64,
    /// `max_x{alpha, beta}` of the initial data.
    pub initial_max_ab: f64,
}

impl BoundParams {
    /// `alpha_tilde`, `beta_tilde` and `eta` are the initial data arrays.
    pub fn new(
        gas: &GasConstants<f64>,
        data: DataBounds,
        alpha_tilde: &[f64],
        beta_tilde: &[f64],
        eta: &[f64],
        level: LevelChoice,
    ) -> Result<Self> {
        let (m_star, lambda) = bound_constants(gas.gamma, data.m_eta, data.m_d)?;
        let initial_max_ab = alpha_tilde
            .iter()
            .zip(beta_tilde)
            .zip(eta)
            .map(|((a, b), e)| a.max(*b) + lambda * e)
            .fold(f64::NEG_INFINITY, f64::max);
        let scale = alpha_tilde
            .iter()
            .chain(beta_tilde)
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        let level = level.resolve(m_star, initial_max_ab, scale);
        let k1 = lemma_constant_k1(gas.gamma, gas.k_c, data.m_eta)?;
        let c1 = if level > 0.0 {
            density_floor_constant(data.tau_max, level)?
        } else {
            f64::NAN
        };
        Ok(Self {
            data,
            m_star,
            lambda,
            level,
            k1,
            c1,
            initial_max_ab,
        })
    }

    /// Checks `M >= M_star` and `max_x{alpha, beta}(0) < M`.
    pub fn check_preconditions(&self) -> Result<()> {
        if !(self.level > 0.0) {
            return Err(Error::Precondition(format!(
                "M must be positive (M = {})",
                self.level
            )));
        }
        if self.level < self.m_star {
            return Err(Error::Precondition(format!(
                "M below M_star (M = {}, M_star = {})",
                self.level, self.m_star
            )));
        }
        if !(self.initial_max_ab < self.level) {
            return Err(Error::Precondition(format!(
                "initial max{{alpha, beta}} = {} is not below M = {}",
                self.initial_max_ab, self.level
            )));
        }
        Ok(())
    }
}
