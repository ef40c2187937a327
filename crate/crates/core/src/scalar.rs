//! Scalar abstraction for envelope values.
//!
//! Interpolation and timeline code is written once against [`Scalar`] and
//! instantiated for `f32` and `f64`. Time never goes through this trait: all
//! schedule arithmetic runs on integer [`Tick`](crate::time::Tick)s.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type usable as a channel value.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or library value.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to every Scalar")
    }

    fn to_f32_lossy(self) -> f32 {
        self.to_f32().unwrap_or(0.0)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(0.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Clamp into `[lo, hi]` without the NaN-propagation surprises of `Float::max`.
pub fn clamp<S: Scalar>(v: S, lo: S, hi: S) -> S {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}
