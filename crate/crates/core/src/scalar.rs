use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point type the whole library is generic over.
///
/// Operators, filters and coefficient vectors hold `Complex<T>` entries; a
/// real filter simply produces entries with a zero imaginary part.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Infallible for every implementor.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Tolerance used for structural checks (filter invariants, unitarity).
    fn structural_tol() -> Self {
        let hundred_eps = Self::epsilon() * Self::lit(100.0);
        hundred_eps.max(Self::lit(1e-10))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn cplx<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub(crate) fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}
