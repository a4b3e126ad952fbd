//! Polytropic equation of state in the `(u, eta, m)` representation.
//!
//! With `m = exp(S / (2 c_v))` and
//! `eta = (2 sqrt(K gamma) / (gamma - 1)) tau^{-(gamma - 1) / 2}` the closure
//! `p = K exp(S / c_v) tau^{-gamma}` becomes
//!
//! ```text
//! tau = K_tau eta^{-2/(gamma-1)}
//! p   = K_p m^2 eta^{2 gamma/(gamma-1)}
//! c   = K_c m eta^{(gamma+1)/(gamma-1)}
//! ```
//!
//! where `c = sqrt(-p_tau)` is the Lagrangian sound speed. Vacuum is `eta -> 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{as_f64, lit, Real};

/// Returns `(K_tau, K_p, K_c)` for the given adiabatic exponent and EOS scale.
pub fn derive_constants<T: Real>(gamma: T, k: T) -> Result<(T, T, T)> {
    if !(gamma > T::one()) {
        return Err(Error::domain("gamma", as_f64(gamma), "gamma > 1"));
    }
    if !(k > T::zero()) {
        return Err(Error::domain("K", as_f64(k), "K > 0"));
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let gm1 = gamma - one;
    let k_tau = (two * (k * gamma).sqrt() / gm1).powf(two / gm1);
    let k_p = k * k_tau.powf(-gamma);
    let k_c = (k * gamma).sqrt() * k_tau.powf(-(gamma + one) / two);
    Ok((k_tau, k_p, k_c))
}

/// `m = exp(S / (2 c_v))`.
pub fn m_from_entropy<T: Real>(entropy: T, c_v: T) -> T {
    (entropy / (lit::<T>(2.0) * c_v)).exp()
}

/// Gas parameters and the derived scales closing the EOS.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasConstants<T> {
    pub gamma: T,
    pub k: T,
    pub c_v: T,
    pub k_tau: T,
    pub k_p: T,
    pub k_c: T,
}

impl<T: Real> GasConstants<T> {
    pub fn new(gamma: T, k: T, c_v: T) -> Result<Self> {
        let (k_tau, k_p, k_c) = derive_constants(gamma, k)?;
        if !(c_v > T::zero()) {
            return Err(Error::domain("c_v", as_f64(c_v), "c_v > 0"));
        }
        Ok(Self {
            gamma,
            k,
            c_v,
            k_tau,
            k_p,
            k_c,
        })
    }

    /// EOS scale giving `K_tau = 1`, so that `eta = tau^{-(gamma-1)/2}` and
    /// the unit state `eta = m = 1` has `rho = 1` and `c = (gamma - 1) / 2`.
    pub fn unit_k(gamma: T) -> T {
        let gm1 = gamma - T::one();
        gm1 * gm1 / (lit::<T>(4.0) * gamma)
    }

    /// `(gamma - 1) / gamma`, the entropy coupling in the gradient variables.
    #[inline]
    pub fn entropy_weight(&self) -> T {
        (self.gamma - T::one()) / self.gamma
    }

    /// Exponent of `eta` in the sound speed, `(gamma + 1) / (gamma - 1)`.
    #[inline]
    pub fn speed_exponent(&self) -> T {
        (self.gamma + T::one()) / (self.gamma - T::one())
    }

    pub fn eta_from_tau(&self, tau: T) -> Result<T> {
        if !(tau > T::zero()) {
            return Err(Error::domain("tau", as_f64(tau), "tau > 0"));
        }
        let two = lit::<T>(2.0);
        let gm1 = self.gamma - T::one();
        Ok(two * (self.k * self.gamma).sqrt() / gm1 * tau.powf(-gm1 / two))
    }

    pub fn tau_from_eta(&self, eta: T) -> Result<T> {
        if !(eta > T::zero()) {
            return Err(Error::domain("eta", as_f64(eta), "eta > 0"));
        }
        Ok(self.tau_unchecked(eta))
    }

    #[inline]
    pub(crate) fn tau_unchecked(&self, eta: T) -> T {
        let gm1 = self.gamma - T::one();
        self.k_tau * eta.powf(-lit::<T>(2.0) / gm1)
    }

    /// Lagrangian sound speed `c(eta, m)`; no domain check.
    #[inline]
    pub fn sound_speed(&self, eta: T, m: T) -> T {
        self.k_c * m * eta.powf(self.speed_exponent())
    }

    /// Pressure `p(eta, m)`; no domain check.
    #[inline]
    pub fn pressure(&self, eta: T, m: T) -> T {
        let gm1 = self.gamma - T::one();
        self.k_p * m * m * eta.powf(lit::<T>(2.0) * self.gamma / gm1)
    }

    /// Entropy recovered from `m`, inverse of [`m_from_entropy`].
    pub fn entropy_from_m(&self, m: T) -> T {
        lit::<T>(2.0) * self.c_v * m.ln()
    }

    pub fn point(&self, u: T, eta: T, m: T) -> Result<ThermoPoint<T>> {
        if !(eta > T::zero()) {
            return Err(Error::domain("eta", as_f64(eta), "eta > 0"));
        }
        if !(m > T::zero()) {
            return Err(Error::domain("m", as_f64(m), "m > 0"));
        }
        let tau = self.tau_unchecked(eta);
        let m_eta = m * eta;
        Ok(ThermoPoint {
            u,
            eta,
            m,
            tau,
            rho: tau.recip(),
            p: self.pressure(eta, m),
            c: self.sound_speed(eta, m),
            r: u - m_eta,
            s: u + m_eta,
        })
    }
}

/// One state `(u, eta, m)` with its derived views.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoPoint<T> {
    pub u: T,
    pub eta: T,
    pub m: T,
    pub tau: T,
    pub rho: T,
    pub p: T,
    pub c: T,
    /// Riemann variable `u - m eta`.
    pub r: T,
    /// Riemann variable `u + m eta`.
    pub s: T,
}

impl<T: Real> ThermoPoint<T> {
    /// Specific internal energy `p tau / (gamma - 1)`.
    pub fn internal_energy(&self, gamma: T) -> T {
        self.p * self.tau / (gamma - T::one())
    }
}
