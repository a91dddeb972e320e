//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar usable throughout the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance that is `tol` when the type can resolve it, otherwise a few ulps at 1.0.
    #[inline]
    fn tol(tol: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(8.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts between scalar types by way of `f64`.
#[inline]
pub fn cast<A: Real, B: Real>(x: A) -> B {
    B::lit(x.to_f64_lossy())
}
