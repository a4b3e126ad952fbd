//! Scalar abstraction for the pointwise formulas.
//!
//! Thermodynamic closures, gradient variables and the Riccati right-hand
//! sides are written once against [`Real`] and instantiated for `f32` and
//! `f64`. The grid solver and the diagnostics run in `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar usable by the pointwise formulas.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target scalar")
}

/// Lossy view of a scalar as `f64`, used for error reporting.
#[inline]
pub(crate) fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
