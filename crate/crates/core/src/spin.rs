//! SU(2) coherent states on the sphere.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{Operator, StateVector};
use crate::poly::{parse_poly, Poly};
use crate::quadrature::SphereQuadrature;
use crate::scalar::{cis, from_usize, lit, Real, C};

/// Spin `s = twice_s / 2` on the `(2s+1)`-dimensional irreducible space.
///
/// Basis index `k` carries `S3 = ħ(s − k)`, so index 0 is the highest weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinConfig<T> {
    twice_s: usize,
    hbar: T,
}

impl<T: Real> SpinConfig<T> {
    pub fn new(twice_s: usize, hbar: T) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::Config("spin must be at least 1/2".into()));
        }
        if !(hbar > T::zero()) || !hbar.is_finite() {
            return Err(Error::Config("hbar must be positive and finite".into()));
        }
        Ok(Self { twice_s, hbar })
    }

    /// Accepts `s` as a real number; it must be a positive half-integer.
    pub fn from_spin(s: f64, hbar: T) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice >= 1.0) || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::Config(format!("spin {s} is not a positive half-integer")));
        }
        Self::new(twice.round() as usize, hbar)
    }

    pub fn twice_s(&self) -> usize {
        self.twice_s
    }

    pub fn s(&self) -> T {
        from_usize::<T>(self.twice_s) * lit(0.5)
    }

    pub fn dim(&self) -> usize {
        self.twice_s + 1
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    /// `m` of basis index `k`.
    pub fn weight(&self, k: usize) -> T {
        self.s() - from_usize::<T>(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinLabel<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> SpinLabel<T> {
    /// `θ ∈ [0, π]`; `φ` is reduced to `[0, 2π)`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::pi()) || !phi.is_finite() {
            return Err(Error::Invalid("theta must lie in [0, pi] and phi must be finite".into()));
        }
        let mut phi = phi % T::two_pi();
        if phi < T::zero() {
            phi += T::two_pi();
        }
        Ok(Self { theta, phi })
    }

    pub fn unit_vector(&self) -> [T; 3] {
        let st = self.theta.sin();
        [st * self.phi.cos(), st * self.phi.sin(), self.theta.cos()]
    }
}

/// `(S1, S2, S3)` in the standard irreducible representation.
pub fn spin_ops<T: Real>(cfg: &SpinConfig<T>) -> (Operator<T>, Operator<T>, Operator<T>) {
    let d = cfg.dim();
    let s = cfg.s();
    let h = cfg.hbar;
    let zero = Complex::new(T::zero(), T::zero());
    let mut raise = DMatrix::from_element(d, d, zero);
    for k in 1..d {
        let m = cfg.weight(k);
        raise[(k - 1, k)] = Complex::new(h * (s * (s + T::one()) - m * (m + T::one())).sqrt(), T::zero());
    }
    let lower = raise.adjoint();
    let half: T = lit(0.5);
    let s1 = (&raise + &lower).map(|z| z * half);
    let s2 = (&raise - &lower).map(|z| z * Complex::new(T::zero(), -half));
    let s3 = DMatrix::from_fn(d, d, |r, c| if r == c { Complex::new(h * cfg.weight(r), T::zero()) } else { zero });
    let op = |m: DMatrix<C<T>>| Operator::hermitian(m).expect("spin matrices are hermitian by construction");
    (op(s1), op(s2), op(s3))
}

fn log_binomial(n: usize, k: usize) -> f64 {
    let lf = |m: usize| (1..=m).map(|j| (j as f64).ln()).sum::<f64>();
    lf(n) - lf(k) - lf(n - k)
}

/// `e^{−iφS3/ħ} e^{−iθS2/ħ} |s, s⟩`.
pub fn spin_coherent<T: Real>(label: &SpinLabel<T>, cfg: &SpinConfig<T>) -> StateVector<T> {
    let d = cfg.dim();
    let n = cfg.twice_s;
    let half: T = lit(0.5);
    let c = (label.theta * half).cos();
    let s = (label.theta * half).sin();
    let amps = DVector::from_fn(d, |k, _| {
        let binom: T = lit((0.5 * log_binomial(n, k)).exp());
        let mag = binom * c.powi((n - k) as i32) * s.powi(k as i32);
        cis(-label.phi * cfg.weight(k)) * mag
    });
    StateVector::new(amps).expect("spin coherent states are finite")
}

/// Function on the sphere: a polynomial in the unit vector `(n1, n2, n3)` or a closure of `(θ, φ)`.
#[derive(Clone)]
pub enum SphereSymbol<T: Real> {
    Poly(Poly<T, 3>),
    Func(Arc<dyn Fn(T, T) -> T + Send + Sync>),
}

impl<T: Real> fmt::Debug for SphereSymbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SphereSymbol::Poly(p) => write!(f, "SphereSymbol::Poly({p:?})"),
            SphereSymbol::Func(_) => write!(f, "SphereSymbol::Func"),
        }
    }
}

pub const SPHERE_VARS: [&str; 3] = ["n1", "n2", "n3"];

impl<T: Real> SphereSymbol<T> {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(SphereSymbol::Poly(parse_poly(text, &SPHERE_VARS)?.to_real()))
    }

    pub fn func(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        SphereSymbol::Func(Arc::new(f))
    }

    pub fn eval(&self, theta: T, phi: T) -> T {
        match self {
            SphereSymbol::Poly(p) => {
                let st = theta.sin();
                p.eval([st * phi.cos(), st * phi.sin(), theta.cos()])
            }
            SphereSymbol::Func(f) => f(theta, phi),
        }
    }
}

/// `(2s+1)/4π Σ w h |θ,φ⟩⟨θ,φ|` over the quadrature nodes.
fn sphere_sum<T: Real>(cfg: &SpinConfig<T>, quad: &SphereQuadrature<T>, h: impl Fn(T, T) -> T) -> DMatrix<C<T>> {
    let d = cfg.dim();
    let mut acc = DMatrix::from_element(d, d, Complex::new(T::zero(), T::zero()));
    let norm = from_usize::<T>(d) / (lit::<T>(2.0) * T::two_pi());
    for &(theta, phi, w) in &quad.nodes {
        let weight = w * h(theta, phi) * norm;
        if weight == T::zero() {
            continue;
        }
        let label = SpinLabel { theta, phi };
        let v = spin_coherent(&label, cfg);
        acc.gerc(Complex::new(weight, T::zero()), v.amps(), v.amps(), Complex::new(T::one(), T::zero()));
    }
    acc
}

/// `max |(2s+1)/4π ∫|θ,φ⟩⟨θ,φ| dΩ − 𝟙|` under the given quadrature.
pub fn spin_resolution_check<T: Real>(cfg: &SpinConfig<T>, quad: &SphereQuadrature<T>) -> T {
    let m = sphere_sum(cfg, quad, |_, _| T::one());
    let d = cfg.dim();
    let mut dev = T::zero();
    for r in 0..d {
        for c in 0..d {
            let target = if r == c { T::one() } else { T::zero() };
            dev = dev.max((m[(r, c)] - Complex::new(target, T::zero())).norm_sqr().sqrt());
        }
    }
    dev
}

/// Product rule exact for the spin coherent projectors against a polynomial of `degree`.
pub fn spin_quadrature<T: Real>(cfg: &SpinConfig<T>, degree: usize) -> Result<SphereQuadrature<T>> {
    let order = cfg.twice_s + degree;
    SphereQuadrature::product(order / 2 + 2, order + 2)
}

/// Toeplitz operator of a sphere symbol.
///
/// Polynomial symbols use a rule that integrates exactly. Closures are evaluated on a
/// 64×128 rule and once more with doubled node counts; the two must agree to `1e−8`.
pub fn spin_toeplitz<T: Real>(h: &SphereSymbol<T>, cfg: &SpinConfig<T>) -> Result<Operator<T>> {
    let eval = |t: T, p: T| h.eval(t, p);
    let mat = match h {
        SphereSymbol::Poly(p) => sphere_sum(cfg, &spin_quadrature(cfg, p.degree() as usize)?, eval),
        SphereSymbol::Func(_) => {
            let nt = (cfg.twice_s / 2 + 64).max(64);
            let coarse = sphere_sum(cfg, &SphereQuadrature::product(nt, 2 * nt)?, eval);
            let fine = sphere_sum(cfg, &SphereQuadrature::product(2 * nt, 4 * nt)?, eval);
            let diff = (&fine - &coarse).iter().fold(T::zero(), |a, z| a.max(z.norm_sqr().sqrt()));
            if diff > lit(1e-8) {
                return Err(Error::Quadrature(format!(
                    "sphere quadrature unresolved: refinement changed entries by {:e}",
                    crate::scalar::to_f64(diff)
                )));
            }
            fine
        }
    };
    Operator::hermitian(mat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_are_extremal_weights() {
        let cfg = SpinConfig::new(3, 1.0f64).unwrap();
        let top = spin_coherent(&SpinLabel::new(0.0, 0.7).unwrap(), &cfg);
        assert!((top.amps()[0].norm() - 1.0).abs() < 1e-15);
        let bottom = spin_coherent(&SpinLabel::new(std::f64::consts::PI, 0.7).unwrap(), &cfg);
        assert!((bottom.amps()[3].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SpinConfig::<f64>::from_spin(0.3, 1.0).is_err());
        assert!(SpinConfig::<f64>::new(0, 1.0).is_err());
        assert!(SpinLabel::<f64>::new(4.0, 0.0).is_err());
    }
}
