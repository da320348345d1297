//! Scalar abstractions shared by the numeric parts of the crate.
//!
//! Two families are used:
//!
//! * [`Real`] is a binary floating point type (`f32` or `f64`). Cascade
//!   evaluation, affine warps and plot coordinates are generic over it.
//! * [`Field`] is anything closed under `+ - * /` that can be built from
//!   counts. Rates (tpr, fpr, accuracy) and ROC area are generic over it, so the
//!   same code runs on `f64` and on exact rationals such as
//!   `num_rational::Ratio<i64>`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// floating point: f32 or f64
pub trait Real:
    Float + FromPrimitive + ToPrimitive + FromStr + Debug + Display + Default + Send + Sync + 'static
{
    /// Convert from `f64`, panicking only on NaN-free inputs that do not fit,
    /// which cannot happen for `f32`/`f64`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to every Real")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arithmetic over which confusion rates and ROC areas are computed.
pub trait Field: Num + Clone + PartialOrd + FromPrimitive + Debug {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in field")
    }

    fn to_f64_lossy(&self) -> f64;
}

impl Field for f32 {
    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Field for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Field for num_rational::Ratio<i64> {
    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Field for num_rational::Ratio<i128> {
    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Round half-up (`floor(v + 0.5)`), the rounding rule used for every
/// pixel coordinate and intensity in this crate.
#[inline]
pub fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}
