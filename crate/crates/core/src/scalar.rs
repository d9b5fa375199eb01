//! Scalar abstraction.
//!
//! All geometry in this crate is generic over [`Real`], which is blanket
//! implemented for `f32` and `f64`. Tolerances are stored as `f64` and
//! converted with [`lit`]; at single precision the tighter ones are not
//! attainable and iteration caps take over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point types usable as coordinates.
pub trait Real:
    'static + Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync
{
}

impl<T> Real for T where
    T: 'static
        + Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Default
        + Send
        + Sync
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite literal")
}

/// Converts `T` into `f64` (used for reports and serialization).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
