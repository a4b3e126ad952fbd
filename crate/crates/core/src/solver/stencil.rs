//! Central finite differences on ghost-padded arrays.

use serde::{Deserialize, Serialize};

/// Ghost cells on each side; enough for the 7-point hyperdissipation stencil.
pub const GHOSTS: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum StencilOrder {
    Second,
    #[default]
    Fourth,
}

impl StencilOrder {
    pub fn accuracy(self) -> u32 {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }
}

impl TryFrom<u8> for StencilOrder {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            other => Err(format!("stencil order must be 2 or 4, got {other}")),
        }
    }
}

impl From<StencilOrder> for u8 {
    fn from(o: StencilOrder) -> u8 {
        o.accuracy() as u8
    }
}

/// First derivative at padded index `j`.
#[inline(always)]
pub fn d1(q: &[f64], j: usize, inv_dx: f64, order: StencilOrder) -> f64 {
    match order {
        StencilOrder::Second => 0.5 * (q[j + 1] - q[j - 1]) * inv_dx,
        StencilOrder::Fourth => {
            (8.0 * (q[j + 1] - q[j - 1]) - (q[j + 2] - q[j - 2])) * (inv_dx / 12.0)
        }
    }
}

/// Undivided sixth difference at padded index `j`.
#[inline(always)]
pub fn delta6(q: &[f64], j: usize) -> f64 {
    q[j - 3] - 6.0 * q[j - 2] + 15.0 * q[j - 1] - 20.0 * q[j] + 15.0 * q[j + 1] - 6.0 * q[j + 2]
        + q[j + 3]
}

/// Derivative of the unpadded interior into `out`.
pub fn differentiate(padded: &[f64], inv_dx: f64, order: StencilOrder, out: &mut [f64]) {
    debug_assert_eq!(padded.len(), out.len() + 2 * GHOSTS);
    for (i, o) in out.iter_mut().enumerate() {
        *o = d1(padded, i + GHOSTS, inv_dx, order);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn padded_sin(n: usize, dx: f64) -> Vec<f64> {
        (0..n + 2 * GHOSTS)
            .map(|j| ((j as f64 - GHOSTS as f64) * dx).sin())
            .collect()
    }

    #[test]
    fn orders_are_observed() {
        for (order, expect) in [(StencilOrder::Second, 2.0), (StencilOrder::Fourth, 4.0)] {
            let err = |n: usize| {
                let dx = 0.5 / n as f64;
                let q = padded_sin(n, dx);
                let mut out = vec![0.0; n];
                differentiate(&q, 1.0 / dx, order, &mut out);
                out.iter()
                    .enumerate()
                    .map(|(i, d)| (d - (i as f64 * dx).cos()).abs())
                    .fold(0.0, f64::max)
            };
            let rate = (err(16) / err(32)).log2();
            assert!((rate - expect).abs() < 0.1, "{order:?}: {rate}");
        }
    }

    #[test]
    fn sixth_difference_annihilates_quintics() {
        let q: Vec<f64> = (0..7)
            .map(|j| (j as f64).powi(5) - 3.0 * j as f64)
            .collect();
        assert!(delta6(&q, 3).abs() < 1e-9);
        let q: Vec<f64> = (0..7).map(|j| (j as f64).powi(6)).collect();
        assert!((delta6(&q, 3) - 720.0).abs() < 1e-9);
    }

    #[test]
    fn order_from_integer() {
        assert_eq!(StencilOrder::try_from(4).unwrap(), StencilOrder::Fourth);
        assert!(StencilOrder::try_from(3).is_err());
    }
}
