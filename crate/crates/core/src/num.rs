//! Scalar abstraction: the library's numeric kernels are generic over the
//! floating type, with `f64` aliases exported at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating scalar the estimation kernels operate on: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from an exact pair count.
    ///
    /// Counts stay below `n(n-1)/2`; callers working near the `f32` integer
    /// limit should use `f64`.
    fn from_count(c: u64) -> Self {
        Self::from_u64(c).unwrap_or_else(Self::max_value)
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
