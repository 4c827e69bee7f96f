//! Scalar abstractions.
//!
//! Two tiers are used throughout the crate:
//!
//! * [`Ring`] covers everything that only needs `+ - * /` and comparisons.
//!   Graph construction, Laplacians and the circulant polynomial algebra are
//!   generic over it, so they run unchanged on `i64`, [`Rational`] (exact) and
//!   on `f32`/`f64`.
//! * [`Real`] adds the floating-point machinery needed by eigensolvers,
//!   square roots and tolerance-based comparisons.

use std::fmt::{Display, LowerExp};
use std::ops::{AddAssign, MulAssign, Neg, SubAssign};

use nalgebra::{ComplexField, RealField};
use num_traits::{FromPrimitive, Num};

/// Exact rational scalar used for the integer-weight identity checks.
pub type Rational = num_rational::Ratio<i64>;

/// Coefficient arithmetic shared by exact and floating scalars.
pub trait Ring:
    nalgebra::Scalar + Copy + Num + Neg<Output = Self> + AddAssign + SubAssign + MulAssign + PartialOrd + FromPrimitive
{
}

impl<T> Ring for T where
    T: nalgebra::Scalar
        + Copy
        + Num
        + Neg<Output = Self>
        + AddAssign
        + SubAssign
        + MulAssign
        + PartialOrd
        + FromPrimitive
{
}

/// Floating-point scalar (`f32` or `f64`).
pub trait Real: Ring + RealField + LowerExp + Display {}

impl<T> Real for T where T: Ring + RealField + LowerExp + Display {}

/// Converts a small integer into any ring scalar.
#[inline]
pub fn from_usize<T: Ring>(v: usize) -> T {
    T::from_usize(v).expect("integer not representable in scalar type")
}

/// Converts an `f64` constant into a floating scalar.
#[inline]
pub fn from_f64<T: Real>(v: f64) -> T {
    nalgebra::convert(v)
}

#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    nalgebra::try_convert(v).unwrap_or(f64::NAN)
}

#[inline]
pub fn abs<T: Real>(v: T) -> T {
    ComplexField::abs(v)
}

/// Absolute value for any ring scalar.
#[inline]
pub fn ring_abs<T: Ring>(v: T) -> T {
    if v < T::zero() {
        -v
    } else {
        v
    }
}

#[inline]
pub fn epsilon<T: Real>() -> T {
    T::default_epsilon()
}

/// Default comparison tolerance: `1e-9` in double precision, widened for
/// narrower types so that it stays well above rounding noise.
pub fn default_tol<T: Real>() -> T {
    let floor = from_f64::<T>(1e-9);
    let scaled = epsilon::<T>() * from_f64(1e3);
    if scaled > floor {
        scaled
    } else {
        floor
    }
}

/// Absolute floor applied to relative tolerances.
pub fn abs_floor<T: Real>() -> T {
    let floor = from_f64::<T>(1e-12);
    let scaled = epsilon::<T>() * from_f64(16.0);
    if scaled > floor {
        scaled
    } else {
        floor
    }
}

/// Largest absolute entry of a matrix (0 for empty matrices).
pub fn max_abs<T: Real>(m: &nalgebra::DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &v| acc.max(abs(v)))
}

/// Largest absolute entry of a vector slice.
pub fn max_abs_slice<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc.max(abs(x)))
}

/// `max(1, max_abs(m))`, the scale factor used by relative bounds.
pub fn scale_of<T: Real>(m: &nalgebra::DMatrix<T>) -> T {
    max_abs(m).max(T::one())
}
