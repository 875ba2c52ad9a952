//! Scalar abstraction shared by the algebra layer.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type usable by the operator algebra.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Absolute amplitude tolerance used when no explicit tolerance is passed.
    const TOL: f64;
}

impl Real for f32 {
    const TOL: f64 = 1e-4;
}

impl Real for f64 {
    const TOL: f64 = 1e-10;
}

#[inline]
pub(crate) fn r<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

#[inline]
pub(crate) fn tol<T: Real>() -> T {
    r(T::TOL)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// e^{i x} for real x.
#[inline]
pub(crate) fn cis<T: Real>(x: T) -> Complex<T> {
    Complex::new(x.cos(), x.sin())
}

/// Reduce a real angle to (-pi, pi].
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut y = x % two_pi;
    if y <= -T::PI() {
        y = y + two_pi;
    } else if y > T::PI() {
        y = y - two_pi;
    }
    y
}

/// Sign with sgn(0) = +1.
#[inline]
pub fn sgn<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

/// Step function h(x): 0 for x > 0, 1 otherwise.
#[inline]
pub fn h<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::zero()
    } else {
        T::one()
    }
}
