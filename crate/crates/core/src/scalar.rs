//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra as na;

/// Floating point type the solvers are generic over (`f32` or `f64`).
pub trait Scalar: na::RealField + Copy + std::fmt::LowerExp {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self;
    /// Lossy conversion back to `f64`, for reporting.
    fn as_f64(self) -> f64;
    /// Machine epsilon.
    fn eps() -> Self;
}

macro_rules! impl_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $f
            }
            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn eps() -> Self {
                <$f>::EPSILON
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Infinity norm of a slice.
pub(crate) fn inf_norm<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Largest absolute entry of a matrix.
#[cfg(test)]
pub(crate) fn max_abs<T: Scalar>(m: &na::DMatrix<T>) -> T {
    inf_norm(m.as_slice())
}
