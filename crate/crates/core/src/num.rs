//! Scalar abstraction.
//!
//! Every numeric kernel in this crate is generic over [`Real`], a small
//! extension of [`nalgebra::RealField`] with explicit conversions from and
//! to `f64`. It is implemented for `f32` and `f64`; the crate root exports
//! `f64` aliases for the common types.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    RealField + Copy + Default + FromPrimitive + ToPrimitive + std::iter::Sum + 'static
{
    /// Converts an `f64` constant into `Self` (exact for `f64`).
    fn of(v: f64) -> Self;

    /// Converts into `f64` (exact for `f64`).
    fn as_f64(self) -> f64;

    /// Positive infinity, used as the "infeasible objective" sentinel.
    fn pos_infinity() -> Self;

    /// `true` for ordinary (non-NaN, non-infinite) values.
    fn finite(self) -> bool;

    /// Converts a count into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Real for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        f64::from(self)
    }

    #[inline]
    fn pos_infinity() -> Self {
        f32::INFINITY
    }

    #[inline]
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Real for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }

    #[inline]
    fn pos_infinity() -> Self {
        f64::INFINITY
    }

    #[inline]
    fn finite(self) -> bool {
        self.is_finite()
    }
}

/// Converts a slice of `f64` constants into the generic scalar type.
pub fn vec_of<T: Real>(values: &[f64]) -> Vec<T> {
    values.iter().map(|&v| T::of(v)).collect()
}

/// Converts a slice of generic scalars into `f64`.
pub fn vec_f64<T: Real>(values: &[T]) -> Vec<f64> {
    values.iter().map(|v| v.as_f64()).collect()
}
