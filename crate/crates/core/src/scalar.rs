//! Scalar abstraction shared by every numerical routine.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, ToPrimitive};

/// Real field the library computes in (`f32` or `f64`).
pub trait Real: RealField + Copy + FloatConst + ToPrimitive + Send + Sync + 'static {}

impl<T> Real for T where T: RealField + Copy + FloatConst + ToPrimitive + Send + Sync + 'static {}

pub type C<T> = Complex<T>;

#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    nalgebra::convert(n as f64)
}

#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn cexp<T: Real>(z: C<T>) -> C<T> {
    cis(z.im) * z.re.exp()
}

#[inline]
pub fn cabs<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}

/// Principal logarithm, branch cut on the negative real axis.
#[inline]
pub fn cln<T: Real>(z: C<T>) -> C<T> {
    Complex::new(cabs(z).ln(), z.im.atan2(z.re))
}

/// Principal square root (non-negative real part).
pub fn csqrt<T: Real>(z: C<T>) -> C<T> {
    let r = cabs(z);
    let half: T = lit(0.5);
    let re = ((r + z.re) * half).max(T::zero()).sqrt();
    let im = ((r - z.re) * half).max(T::zero()).sqrt();
    if z.im < T::zero() {
        Complex::new(re, -im)
    } else {
        Complex::new(re, im)
    }
}

/// `|z|` without requiring `num_traits::Float`.
pub trait Modulus<T> {
    fn modulus(&self) -> T;
}

impl<T: Real> Modulus<T> for C<T> {
    #[inline]
    fn modulus(&self) -> T {
        cabs(*self)
    }
}

#[inline]
pub fn real<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn imag<T: Real>(x: T) -> C<T> {
    Complex::new(T::zero(), x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_sqrt_branch() {
        let z = csqrt(Complex::new(-4.0f64, 0.0));
        assert!((z - Complex::new(0.0, 2.0)).norm() < 1e-15);
        let z = csqrt(Complex::new(-4.0f64, -1e-300));
        assert!(z.im < 0.0);
        let w = Complex::new(0.3f64, -2.0);
        assert!((csqrt(w) * csqrt(w) - w).norm() < 1e-14);
    }

    #[test]
    fn log_exp_roundtrip() {
        let w = Complex::new(-0.7f64, 0.4);
        assert!((cexp(cln(w)) - w).norm() < 1e-15);
    }
}
