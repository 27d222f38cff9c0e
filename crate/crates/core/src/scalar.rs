//! Numeric traits the statistics and embedding code is generic over.
//!
//! [`Scalar`] only needs field arithmetic, so ratio-valued quantities
//! (precision, recall, F1) can be computed exactly with a rational type.
//! [`RealScalar`] adds `sqrt` and friends for cosine similarity, correlation
//! and agreement statistics, and is implemented for `f32` and `f64`.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, NumCast, ToPrimitive};

/// A number type supporting exact field arithmetic.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: usize) -> Self;
}

impl<T> Scalar for T
where
    T: Num + Clone + PartialOrd + Debug + Send + Sync + FromPrimitive + 'static,
{
    fn from_count(n: usize) -> Self {
        T::from_usize(n).expect("count representable in scalar type")
    }
}

/// Floating point scalar: f32 or f64.
pub trait RealScalar:
    Scalar + Float + FromPrimitive + ToPrimitive + NumCast + std::iter::Sum + Copy
{
    fn from_f64_lossy(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("finite f64 converts to float scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}
