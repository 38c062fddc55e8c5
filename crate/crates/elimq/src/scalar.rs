//! Scalar abstraction for the numeric kernels.
//!
//! The dense factorization and triangular solves are written against
//! [`Real`], so `f32` and `f64` working precision share one code path.
//! Everything the rest of the crate needs (Matrix Market values, growth
//! tracking, residuals) goes through this trait.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable as matrix working precision.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used at parse/config boundaries.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}
