//! Scalar abstraction shared by the quantum algebra, counting and tomography code.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the quantum algebra is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    /// Tolerance with a floor at a small multiple of machine epsilon, so
    /// `f64` tolerances stay meaningful when the scalar is `f32`.
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let t = Self::lit(x);
        if t > floor {
            t
        } else {
            floor
        }
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn modulus<T: Real>(z: C<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
