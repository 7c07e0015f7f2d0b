//! Floating-point scalar abstraction.
//!
//! All numerical kernels are written against [`Real`], which is implemented
//! for `f32` and `f64`. The complex field used throughout is
//! `num_complex::Complex<T>` as re-exported by nalgebra.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the solvers are generic over.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Display + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Widening conversion used for reporting and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// `Complex<T>` shorthand.
pub type C<T> = Complex<T>;

/// `e^{j·phi}`.
#[inline]
pub fn unit_phasor<T: Real>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}
