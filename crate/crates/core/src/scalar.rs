//! Scalar abstraction for the matrix core.
//!
//! Everything in [`crate::su`], [`crate::gates`] and word evaluation is generic
//! over a real field `T` (`f32` or `f64`); the search and spectral modules fix
//! `T = f64` because their tolerances are pinned to double precision.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real scalar usable as the component type of [`crate::su::Unitary`].
pub trait Real: RealField + Copy + ToPrimitive {
    fn of(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

/// `e^{iφ}`.
pub(crate) fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

pub(crate) fn modulus<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

pub(crate) fn arg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}
