// SPDX-License-Identifier: MIT OR Apache-2.0

//! Floating-point abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the detection pipeline is generic over.
///
/// Implemented for `f32` and `f64`. Statistical constants (tolerances,
/// penalties, quadrature weights) are converted through [`Scalar::of`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count.
    #[inline]
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean of a non-empty slice.
pub(crate) fn mean<S: Scalar>(values: &[S]) -> S {
    debug_assert!(!values.is_empty());
    values.iter().copied().sum::<S>() / S::of_usize(values.len())
}
