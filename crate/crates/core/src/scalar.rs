//! Floating-point abstraction shared by every engine.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the numerical engines are generic over.
///
/// Implemented for `f32` and `f64`. Most physics-level checks in this crate
/// are tuned for `f64`; `f32` is supported for throughput experiments.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts `self` into `f64`.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Converts an index or count into `Self`.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
}

/// Complex number over a [`Real`] scalar.
pub type Cplx<T> = nalgebra::Complex<T>;

pub(crate) fn cis<T: Real>(phase: T) -> Cplx<T> {
    Cplx::new(phase.cos(), phase.sin())
}
