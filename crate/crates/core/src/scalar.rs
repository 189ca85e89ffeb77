//! Scalar abstraction: everything numeric in this crate is generic over a
//! floating-point type implementing [`Scalar`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used for cochain values, operator entries, losses
/// and gradients. Implemented by `f32` and `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Sum
    + ndarray::LinalgScalar
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for tolerances and literals.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssign
        + Sum
        + ndarray::LinalgScalar
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}
