use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{csqrt, Real, C};

/// `∫ e^{iy²/2 − y²/2ν} dy = √(2π / (ν⁻¹ − i))` on the principal branch.
pub fn fresnel_toy<T: Real>(nu: T) -> Result<C<T>> {
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(Error::Invalid("nu must be positive and finite".into()));
    }
    Ok(csqrt(Complex::new(T::two_pi(), T::zero()) / Complex::new(T::one() / nu, -T::one())))
}

/// `√(2πi) = √π (1 + i)`.
pub fn fresnel_limit<T: Real>() -> C<T> {
    let s = T::pi().sqrt();
    Complex::new(s, s)
}
