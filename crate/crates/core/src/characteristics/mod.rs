//! Riccati dynamics of the gradient variables along characteristics.
//!
//! Along `dx/dt = c` (forward, `d+ = d_t + c d_x`) and `dx/dt = -c`
//! (backward, `d- = d_t - c d_x`):
//!
//! ```text
//! d+ alpha_tilde = k1 { k2 (3 alpha_tilde + beta_tilde) + alpha_tilde beta_tilde - alpha_tilde^2 }
//! d- beta_tilde  = k1 {-k2 (alpha_tilde + 3 beta_tilde) + alpha_tilde beta_tilde - beta_tilde^2 }
//! k1 = ((gamma+1) K_c / (2 (gamma-1))) eta^{2/(gamma-1)}
//! k2 = ((gamma-1) / (gamma (gamma+1))) eta m_x
//! ```
//!
//! The shifted variables obey the expanded three-term forms evaluated by
//! [`riccati_rhs_transformed`]; the bound `d+ alpha <= K_1 M (M - alpha)` on
//! the boundary strip of the invariant domain follows from the signs of
//! the brackets returned by [`lemma_brackets`].

pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{as_f64, lit, Real};
use crate::thermo::GasConstants;

pub use trace::{
    frozen_blowup_time, oracle_integrate, trace, CharTrace, OracleResult, OracleVariable,
    TraceNode, TraceOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    /// `+1` forward, `-1` backward.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// `k1`, `k2` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiCoeffs<T> {
    pub k1: T,
    pub k2: T,
    pub eta: T,
    pub m_x: T,
}

impl<T: Real> RiccatiCoeffs<T> {
    pub fn new(gas: &GasConstants<T>, eta: T, m_x: T) -> Result<Self> {
        check_eta(eta)?;
        let one = T::one();
        let g = gas.gamma;
        let k1 =
            (g + one) * gas.k_c / (lit::<T>(2.0) * (g - one)) * eta.powf(lit::<T>(2.0) / (g - one));
        let k2 = (g - one) / (g * (g + one)) * eta * m_x;
        Ok(Self { k1, k2, eta, m_x })
    }
}

fn check_eta<T: Real>(eta: T) -> Result<()> {
    if eta > T::zero() {
        Ok(())
    } else {
        Err(Error::domain("eta", as_f64(eta), "eta > 0"))
    }
}

/// `c / m = K_c eta^{(gamma+1)/(gamma-1)}`.
#[inline]
fn speed_per_m<T: Real>(gas: &GasConstants<T>, eta: T) -> T {
    gas.k_c * eta.powf(gas.speed_exponent())
}

/// `d+ alpha_tilde` (forward) or `d- beta_tilde` (backward).
pub fn riccati_rhs_tilde<T: Real>(
    alpha_tilde: T,
    beta_tilde: T,
    eta: T,
    m_x: T,
    direction: Direction,
    gas: &GasConstants<T>,
) -> Result<T> {
    let RiccatiCoeffs { k1, k2, .. } = RiccatiCoeffs::new(gas, eta, m_x)?;
    let three = lit::<T>(3.0);
    let ab = alpha_tilde * beta_tilde;
    Ok(match direction {
        Direction::Forward => {
            k1 * (k2 * (three * alpha_tilde + beta_tilde) + ab - alpha_tilde * alpha_tilde)
        }
        Direction::Backward => {
            k1 * (-k2 * (alpha_tilde + three * beta_tilde) + ab - beta_tilde * beta_tilde)
        }
    })
}

/// `d+ eta` from `beta_tilde` (forward) or `d- eta` from `alpha_tilde` (backward).
///
/// ```text
/// d+ eta = -K_c eta^{(gamma+1)/(gamma-1)} (beta_tilde  + ((gamma-1)/gamma) eta m_x)
/// d- eta = -K_c eta^{(gamma+1)/(gamma-1)} (alpha_tilde - ((gamma-1)/gamma) eta m_x)
/// ```
pub fn d_eta_along<T: Real>(
    direction: Direction,
    eta: T,
    opposite_tilde: T,
    m_x: T,
    gas: &GasConstants<T>,
) -> Result<T> {
    check_eta(eta)?;
    let w = gas.entropy_weight() * eta * m_x;
    let e = speed_per_m(gas, eta);
    Ok(match direction {
        Direction::Forward => -e * (opposite_tilde + w),
        Direction::Backward => -e * (opposite_tilde - w),
    })
}

/// Expanded three-term form of `d+ alpha` (forward) or `d- beta` (backward).
pub fn riccati_rhs_transformed<T: Real>(
    alpha: T,
    beta: T,
    eta: T,
    m_x: T,
    lambda: T,
    direction: Direction,
    gas: &GasConstants<T>,
) -> Result<T> {
    check_eta(eta)?;
    let one = T::one();
    let half = lit::<T>(0.5);
    let g = gas.gamma;
    let e = speed_per_m(gas, eta);
    let k1 = RiccatiCoeffs::new(gas, eta, m_x)?.k1;
    let drift = lit::<T>(2.0) * (g - one) / g * eta * m_x;
    let slope = lit::<T>(4.0) / g * m_x;
    let shift = (lit::<T>(3.0) * g - one) / (g + one) * lambda * eta;
    let entropy = (g - one) / (g * (g + one)) * eta * m_x;
    let le = lambda * eta;
    Ok(match direction {
        Direction::Forward => {
            -half * lambda * e * (alpha - le + drift) - half * e * (lambda - slope) * (alpha - le)
                + k1 * (alpha - shift + entropy) * (beta - alpha)
        }
        Direction::Backward => {
            -half * lambda * e * (beta - le - drift) - half * e * (lambda + slope) * (beta - le)
                + k1 * (beta - shift - entropy) * (alpha - beta)
        }
    })
}

/// The three bracketed factors of the forward expanded form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaBrackets<T> {
    /// `alpha - lambda eta + (2(gamma-1)/gamma) eta m_x`
    pub drift: T,
    /// `(lambda - (4/gamma) m_x)(alpha - lambda eta)`
    pub slope: T,
    /// `alpha - ((3gamma-1)/(gamma+1)) lambda eta + ((gamma-1)/(gamma(gamma+1))) eta m_x`
    pub quadratic: T,
}

pub fn lemma_brackets<T: Real>(alpha: T, eta: T, m_x: T, lambda: T, gamma: T) -> LemmaBrackets<T> {
    let one = T::one();
    let le = lambda * eta;
    LemmaBrackets {
        drift: alpha - le + lit::<T>(2.0) * (gamma - one) / gamma * eta * m_x,
        slope: (lambda - lit::<T>(4.0) / gamma * m_x) * (alpha - le),
        quadratic: alpha - (lit::<T>(3.0) * gamma - one) / (gamma + one) * le
            + (gamma - one) / (gamma * (gamma + one)) * eta * m_x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gas3() -> GasConstants<f64> {
        GasConstants::new(3.0, 1.0 / 3.0, 1.0).unwrap()
    }

    #[test]
    fn coefficients_for_gamma_three() {
        let c = RiccatiCoeffs::new(&gas3(), 2.0, 0.6).unwrap();
        assert_relative_eq!(c.k1, 2.0, max_relative = 1e-14);
        assert_relative_eq!(c.k2, 2.0 * 0.6 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn tilde_reference_values() {
        let g = gas3();
        let f = riccati_rhs_tilde(1.0, 0.0, 1.0, 0.0, Direction::Forward, &g).unwrap();
        assert_relative_eq!(f, -1.0);
        let f = riccati_rhs_tilde(1.0, -1.0, 2.0, 0.6, Direction::Forward, &g).unwrap();
        assert_relative_eq!(f, -3.2, max_relative = 1e-13);
        let b = riccati_rhs_tilde(1.0, -1.0, 2.0, 0.6, Direction::Backward, &g).unwrap();
        assert_relative_eq!(b, -3.2, max_relative = 1e-13);
        for eta in [0.1, 1.0, 3.0] {
            let z = riccati_rhs_tilde(0.7, 0.7, eta, 0.0, Direction::Forward, &g).unwrap();
            assert_eq!(z, 0.0);
        }
        assert!(riccati_rhs_tilde(1.0, 1.0, 0.0, 0.0, Direction::Forward, &g).is_err());
    }

    #[test]
    fn d_eta_reference_values() {
        let g = gas3();
        assert_relative_eq!(
            d_eta_along(Direction::Forward, 1.0, 1.0, 0.0, &g).unwrap(),
            -1.0
        );
        assert_eq!(
            d_eta_along(Direction::Forward, 1.0, 0.0, 0.0, &g).unwrap(),
            0.0
        );
        assert_eq!(
            d_eta_along(Direction::Backward, 1.0, 0.0, 0.0, &g).unwrap(),
            0.0
        );
        let v = d_eta_along(Direction::Forward, 2.0, 0.5, 0.3, &g).unwrap();
        assert_relative_eq!(v, -3.6, max_relative = 1e-14);
        assert!(d_eta_along(Direction::Backward, -1.0, 0.5, 0.3, &g).is_err());
    }

    #[test]
    fn transformed_reference_values() {
        let g = gas3();
        let la = 4.0 / 3.0;
        for dir in [Direction::Forward, Direction::Backward] {
            let v = riccati_rhs_transformed(la, la, 1.0, 0.0, la, dir, &g).unwrap();
            assert!(v.abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn transformed_in_single_precision() {
        let g = GasConstants::<f32>::new(3.0, 1.0 / 3.0, 1.0).unwrap();
        let a =
            riccati_rhs_transformed(1.2f32, 0.4, 0.9, 0.1, 0.3, Direction::Forward, &g).unwrap();
        let t = riccati_rhs_tilde(1.2f32 - 0.27, 0.4 - 0.27, 0.9, 0.1, Direction::Forward, &g)
            .unwrap()
            + 0.3 * d_eta_along(Direction::Forward, 0.9f32, 0.4 - 0.27, 0.1, &g).unwrap();
        assert_relative_eq!(a, t, max_relative = 1e-5);
    }

    /// `d+ eta` written as `-(c/m) u_x + c eta_x` in primitive derivatives.
    #[test]
    fn d_eta_matches_primitive_form() {
        let g = GasConstants::new(1.4, 0.7, 1.0).unwrap();
        let (u_x, eta_x, m_x, m, eta) = (0.3, -0.2, 0.15, 1.3, 0.8);
        let (at, bt) = crate::gradients::tilde_pair(u_x, eta_x, m_x, m, eta, 1.4);
        let c = g.sound_speed(eta, m);
        let fwd = -(c / m) * u_x + c * eta_x;
        let bwd = -(c / m) * u_x - c * eta_x;
        assert_relative_eq!(
            d_eta_along(Direction::Forward, eta, bt, m_x, &g).unwrap(),
            fwd,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            d_eta_along(Direction::Backward, eta, at, m_x, &g).unwrap(),
            bwd,
            max_relative = 1e-13
        );
    }

    proptest! {
        #[test]
        fn lambda_zero_reduces_to_tilde(
            gamma in 1.05f64..6.0, a in -5.0f64..5.0, b in -5.0f64..5.0,
            eta in 0.05f64..3.0, m_x in -2.0f64..2.0,
        ) {
            let g = GasConstants::new(gamma, 1.0, 1.0).unwrap();
            for dir in [Direction::Forward, Direction::Backward] {
                let x = riccati_rhs_transformed(a, b, eta, m_x, 0.0, dir, &g).unwrap();
                let y = riccati_rhs_tilde(a, b, eta, m_x, dir, &g).unwrap();
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
    }
}
