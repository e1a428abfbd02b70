//! Scalar abstraction: the whole engine is generic over the floating-point
//! type. `f64` is the default pipeline scalar (see the crate-root aliases);
//! `f32` instantiations are available for memory-bound workloads.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the engine is generic over.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + Sum
    + Copy
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal not representable")
    }

    /// Conversion to `f64` for reporting and serialization.
    fn to_f64_c(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for converting an `f64` constant into the generic scalar.
#[inline]
pub fn sc<T: Scalar>(v: f64) -> T {
    T::from_f64_c(v)
}

/// Numerically stable sigmoid.
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Inverse sigmoid; input must lie strictly inside (0, 1).
#[inline]
pub fn logit<T: Scalar>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_logit_roundtrip() {
        for &p in &[0.01f64, 0.1, 0.5, 0.9, 0.99] {
            assert!((sigmoid(logit(p)) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_extremes_are_finite() {
        assert!(sigmoid(-800.0f64) >= 0.0);
        assert!(sigmoid(800.0f64) <= 1.0);
        assert!(sigmoid(-80.0f32).is_finite());
    }
}
