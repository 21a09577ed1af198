//! Scalar abstraction over the two supported float widths.
//!
//! Training runs in `f32`; the gradient-check harness runs the same code in
//! `f64` so finite-difference tolerances stay tight.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssignOps};

/// Element type of every tensor in the crate.
pub trait Scalar:
    Float + NumAssignOps + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;

    /// Maps one 32-bit RNG draw onto `[0, 1)`.
    ///
    /// Exactly one draw is consumed per sample regardless of the scalar
    /// width, so f32 and f64 pipelines advance an `Rng` identically.
    fn unit_from_u32(u: u32) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn unit_from_u32(u: u32) -> Self {
        // Top 24 bits; (u32::MAX >> 8) * 2^-24 < 1 holds exactly in f32.
        (u >> 8) as f32 * (1.0 / 16_777_216.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    #[inline]
    fn unit_from_u32(u: u32) -> Self {
        u as f64 * (1.0 / 4_294_967_296.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_range_is_half_open() {
        assert_eq!(f32::unit_from_u32(0), 0.0);
        assert!(f32::unit_from_u32(u32::MAX) < 1.0);
        assert_eq!(f64::unit_from_u32(0), 0.0);
        assert!(f64::unit_from_u32(u32::MAX) < 1.0);
    }
}
