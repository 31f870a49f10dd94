//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point type the simulator is generic over (`f32` or `f64`).
///
/// Tolerances throughout the crate are written as `f64` literals tuned for
/// double precision; [`Real::tol`] lifts them into `Self` and floors them at a
/// small multiple of machine epsilon so single precision stays usable.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Default central-difference step for parameter derivatives.
    fn fd_step() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A tolerance literal, never below `8 * epsilon`.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(8.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn fd_step() -> Self {
        1e-5
    }
}

impl Real for f32 {
    // cube root of epsilon balances truncation against roundoff
    #[inline]
    fn fd_step() -> Self {
        f32::EPSILON.cbrt()
    }
}
