//! Scalar abstraction over the floating-point type of the pipeline.
//!
//! Scan files store `f32`; the geometry, scoring, and rasterization code is
//! generic so callers can run the same pipeline in `f32` or widen to `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating-point scalar: f32 or f64.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Send + Sync + 'static
{
    /// Conversion from f64, rounding when `Self` is f32.
    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to any float scalar")
    }

    /// Exact f32 widening.
    #[inline]
    fn from_f32_exact(v: f32) -> Self {
        <Self as FromPrimitive>::from_f32(v).expect("f32 converts to any float scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float scalar widens to f64")
    }

    /// Narrowing to f32, rounding when `Self` is f64.
    #[inline]
    fn as_f32_lossy(self) -> f32 {
        self.to_f32().expect("float scalar narrows to f32")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
