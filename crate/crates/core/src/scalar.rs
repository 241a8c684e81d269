//! Scalar abstraction shared by every module.
//!
//! All physics is written against [`Real`], which `f32` and `f64` implement.
//! The series tolerances depend on the precision of the scalar, so the trait
//! carries its own default tail tolerance.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar usable by the analytic formulas and the oracle.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Default absolute tail tolerance for truncated infinite sums.
    fn default_series_eps() -> Self;

    /// Converts an `f64` literal. Every literal used in this crate is
    /// representable in `f32`, so this never fails for the provided impls.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("index representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn default_series_eps() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn default_series_eps() -> Self {
        1e-12
    }
}

pub(crate) fn ensure_finite<T: Real>(name: &str, value: T) -> crate::Result<T> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(crate::Error::NonFinite {
            name: name.to_string(),
        })
    }
}
