//! Floating-point abstraction used by every numeric kernel in this crate.
//!
//! All algorithms (intensity recursions, likelihood maximization, ODE
//! integration, spectral iteration, bias ratios) are written against the
//! [`Scalar`] trait instead of a concrete float type, so the same code runs in
//! `f32` and `f64`. The crate root exports `f64`-specialized aliases for the
//! common types, which is what the CLI and the reproduction runs use.
//!
//! Random draws are always made in `f64` and converted afterwards, so the
//! sequence of raw draws for a fixed seed does not depend on the scalar type
//! the caller instantiates.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the numeric kernels are generic over.
///
/// This is a pure marker on top of the `num-traits` float surface plus the
/// formatting and serde bounds the serializers need; it is blanket-implemented
/// for every type that satisfies the bounds, in particular `f32` and `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    ///
    /// # Panics
    ///
    /// Panics if the value has no counterpart in the target type, which never
    /// happens for finite constants converted to `f32` or `f64`.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant must be representable")
    }

    /// Widens this scalar to `f64` (exact for `f32` and `f64`).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must widen to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssign
        + Sum<T>
        + Debug
        + Display
        + LowerExp
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_builtin_floats_implement_scalar() {
        fn assert_scalar<F: Scalar>() {}
        assert_scalar::<f32>();
        assert_scalar::<f64>();
    }

    #[test]
    fn lit_round_trips_through_f64() {
        assert_eq!(f64::lit(0.25).as_f64(), 0.25, "f64 literal must be exact");
        assert_eq!(
            f32::lit(0.25).as_f64(),
            0.25,
            "dyadic f32 literal must be exact"
        );
    }
}
