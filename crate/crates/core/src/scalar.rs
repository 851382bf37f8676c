//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the navigation stack is generic over (`f32` or `f64`).
///
/// Arithmetic and transcendental functions come from [`RealField`]; conversions
/// to and from primitive numbers come from `num-traits`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn cast<T: Real>(value: f64) -> T {
    T::from_f64(value).expect("f64 is representable in every Real scalar")
}

/// Converts a count into `T`.
#[inline]
pub fn from_usize<T: Real>(value: usize) -> T {
    T::from_usize(value).expect("usize is representable in every Real scalar")
}

/// Lossy conversion to `f64`, used for output formatting and statistics.
#[inline]
pub fn to_f64<T: Real>(value: T) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `true` when the value is neither NaN nor infinite.
#[inline]
pub fn is_finite<T: Real>(value: T) -> bool {
    to_f64(value).is_finite()
}
