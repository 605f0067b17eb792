//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::tolerances::Tolerances;

/// Real floating-point scalar the kernels are generic over.
///
/// Implemented for `f32` and `f64`. Tolerance defaults are tied to the
/// precision of the type, see [`Real::tolerances`].
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Default tolerance record for computations carried out in this precision.
    fn tolerances() -> Tolerances;
}

impl Real for f64 {
    fn tolerances() -> Tolerances {
        Tolerances::default()
    }
}

impl Real for f32 {
    fn tolerances() -> Tolerances {
        Tolerances::single_precision()
    }
}

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}
