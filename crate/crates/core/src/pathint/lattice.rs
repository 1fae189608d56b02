//! Time-sliced configuration-space propagator with the midpoint rule.
//!
//! The momentum integrals of each slice are done in closed form. The remaining
//! position integrals run along the rotated contour `q = q̄ + e^{iπ/4} s`, on
//! which every kinetic factor is a decaying Gaussian.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::poly::PlanarPoly;
use crate::scalar::{cabs, cexp, from_usize, lit, Real, C};
use crate::symbols::SymbolFn;

/// Position grid along the rotated contour, in units of the contour parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGrid<T> {
    pub half_width: T,
    pub spacing: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig<T> {
    /// Number of intermediate position integrations.
    pub slices: usize,
    pub time: T,
    pub q_start: T,
    pub q_end: T,
    /// Defaults to a grid sized from the slice width and the free bridge spread.
    pub grid: Option<LatticeGrid<T>>,
    /// Largest allowed ratio of edge amplitude to peak amplitude.
    pub tail_threshold: T,
}

impl<T: Real> LatticeConfig<T> {
    pub fn new(slices: usize, time: T, q_start: T, q_end: T) -> Result<Self> {
        if !(time > T::zero()) || !time.is_finite() {
            return Err(Error::Invalid("lattice time must be positive and finite".into()));
        }
        if !q_start.is_finite() || !q_end.is_finite() {
            return Err(Error::Invalid("lattice endpoints must be finite".into()));
        }
        Ok(Self { slices, time, q_start, q_end, grid: None, tail_threshold: lit(1e-10) })
    }

    pub fn with_grid(mut self, grid: LatticeGrid<T>) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn epsilon(&self) -> T {
        self.time / from_usize::<T>(self.slices + 1)
    }
}

/// Mass and potential of `h = p²/2m + V(q)`.
#[derive(Debug, Clone)]
struct Mechanical<T: Real> {
    mass: T,
    potential: PlanarPoly<T>,
}

fn mechanical<T: Real>(h: &SymbolFn<T>) -> Result<Mechanical<T>> {
    let poly =
        h.as_poly().ok_or_else(|| Error::Unsupported("the lattice propagator needs a polynomial symbol".into()))?;
    let mut kinetic = T::zero();
    let mut potential = PlanarPoly::zero();
    for (e, c) in poly.terms() {
        match (e[0], e[1]) {
            (0, b) => potential.add_term([0, b], *c),
            (2, 0) => kinetic = *c,
            _ => return Err(Error::Unsupported(format!("non-quadratic momentum dependence p^{} q^{}", e[0], e[1]))),
        }
    }
    if !(kinetic > T::zero()) {
        return Err(Error::Unsupported("the p^2 coefficient must be positive".into()));
    }
    if potential.degree() > 2 {
        return Err(Error::Unsupported("the rotated contour needs a potential of degree at most 2".into()));
    }
    if potential.coeff([0, 2]) < T::zero() {
        return Err(Error::Inadmissible("potential is not bounded below".into()));
    }
    if potential.coeff([0, 2]) == T::zero() && potential.coeff([0, 1]) != T::zero() {
        return Err(Error::Inadmissible("linear potential is not bounded below".into()));
    }
    Ok(Mechanical { mass: T::one() / (kinetic + kinetic), potential })
}

/// `⟨q″|e^{−iHT/ħ}|q′⟩` for `H = p²/2m + V(q)` with the midpoint rule.
pub fn lattice_propagator<T: Real>(h: &SymbolFn<T>, lat: &LatticeConfig<T>, hbar: T) -> Result<C<T>> {
    let mech = mechanical(h)?;
    let z0 = Complex::new(lat.q_start, T::zero());
    let z1 = Complex::new(lat.q_end, T::zero());
    lattice_kernel_complex(mech.mass, &mech.potential, lat.slices, lat.time, z0, z1, hbar, lat.grid, lat.tail_threshold)
}

/// Sized from the forward-propagated width `ħ tan(ωT)/mω` along the rotated contour.
fn default_grid<T: Real>(mass: T, curvature: T, eps: T, time: T, hbar: T, shift: T) -> Result<LatticeGrid<T>> {
    let sigma = (hbar * eps / mass).sqrt();
    let omega = (lit::<T>(2.0) * curvature / mass).sqrt();
    let wt = omega * time;
    let spread_time = if wt > T::zero() {
        if wt >= lit::<T>(0.95) * T::frac_pi_2() {
            return Err(Error::Unsupported("the rotated contour needs omega*T below pi/2".into()));
        }
        wt.tan() / omega
    } else {
        time
    };
    let spread = (hbar * spread_time / mass).sqrt();
    Ok(LatticeGrid { half_width: shift + lit::<T>(12.0) * spread, spacing: sigma / lit(2.5) })
}

/// Same kernel with complex endpoints; the contour runs through the straight line joining them.
#[allow(clippy::too_many_arguments)]
pub fn lattice_kernel_complex<T: Real>(
    mass: T,
    potential: &PlanarPoly<T>,
    slices: usize,
    time: T,
    q_start: C<T>,
    q_end: C<T>,
    hbar: T,
    grid: Option<LatticeGrid<T>>,
    tail_threshold: T,
) -> Result<C<T>> {
    if !(mass > T::zero() && hbar > T::zero() && time > T::zero()) {
        return Err(Error::Invalid("mass, hbar and time must be positive".into()));
    }
    let steps = slices + 1;
    let eps = time / from_usize::<T>(steps);
    let half: T = lit(0.5);
    let i = Complex::new(T::zero(), T::one());
    let norm = crate::scalar::csqrt(Complex::new(mass, T::zero()) / (i * (T::two_pi() * hbar * eps)));
    let (c0, c1, c2) = (potential.coeff([0, 0]), potential.coeff([0, 1]), potential.coeff([0, 2]));
    let pot = |z: C<T>| z * z * c2 + z * c1 + Complex::new(c0, T::zero());
    let kernel = |a: C<T>, b: C<T>| {
        let d = a - b;
        let phase = d * d * (mass / (eps + eps)) - pot((a + b) * half) * eps;
        norm * cexp(i * phase / hbar)
    };
    if slices == 0 {
        return Ok(kernel(q_end, q_start));
    }
    let g = match grid {
        Some(g) => g,
        None => default_grid(mass, potential.coeff([0, 2]), eps, time, hbar, cabs(q_end - q_start))?,
    };
    if !(g.spacing > T::zero() && g.half_width > g.spacing) {
        return Err(Error::Invalid("lattice grid needs positive spacing below the half width".into()));
    }
    let n_s = (lit::<T>(2.0) * g.half_width / g.spacing).floor().to_usize().unwrap_or(0) + 1;
    let rot = Complex::new(T::FRAC_1_SQRT_2(), T::FRAC_1_SQRT_2());
    let s: Vec<T> = (0..n_s).map(|j| -g.half_width + g.spacing * from_usize::<T>(j)).collect();
    let node = |l: usize, sj: T| {
        let f = from_usize::<T>(l) / from_usize::<T>(steps);
        q_start + (q_end - q_start) * f + rot * sj
    };
    let measure = rot * g.spacing;
    let sigma = (hbar * eps / mass).sqrt();
    let band = (lit::<T>(16.0) * sigma / g.spacing).ceil().to_usize().unwrap_or(n_s).min(n_s);
    let tail = |psi: &[C<T>]| -> Result<()> {
        let peak = psi.iter().map(|z| cabs(*z)).fold(T::zero(), |a, b| a.max(b));
        let edge = cabs(psi[0]).max(cabs(psi[n_s - 1]));
        if peak > T::zero() && edge > tail_threshold * peak {
            let mass = crate::scalar::to_f64(edge / peak);
            return Err(Error::GridTail { mass, threshold: crate::scalar::to_f64(tail_threshold) });
        }
        Ok(())
    };
    let mut psi: Vec<C<T>> = s.iter().map(|&sj| kernel(node(1, sj), q_start)).collect();
    tail(&psi)?;
    for l in 1..slices {
        let prev: Vec<C<T>> = s.iter().map(|&sj| node(l, sj)).collect();
        let next: Vec<C<T>> = s
            .iter()
            .enumerate()
            .map(|(ii, &si)| {
                let a = node(l + 1, si);
                let mut acc = Complex::new(T::zero(), T::zero());
                let lo = ii.saturating_sub(band);
                let hi = (ii + band + 1).min(n_s);
                for (b, w) in prev[lo..hi].iter().zip(&psi[lo..hi]) {
                    acc += kernel(a, *b) * *w;
                }
                acc * measure
            })
            .collect();
        psi = next;
        tail(&psi)?;
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    for (sj, w) in s.iter().zip(&psi) {
        acc += kernel(q_end, node(slices, *sj)) * *w;
    }
    Ok(acc * measure)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_kernel(m: f64, t: f64, dq: f64) -> C<f64> {
        let i = Complex::new(0.0, 1.0);
        (Complex::new(m, 0.0) / (i * 2.0 * std::f64::consts::PI * t)).sqrt() * (i * m * dq * dq / (2.0 * t)).exp()
    }

    #[test]
    fn free_particle_is_exact() {
        let h = SymbolFn::<f64>::parse("1/2 p^2").unwrap();
        for n in [0, 1, 4] {
            let lat = LatticeConfig::new(n, 1.0, 0.2, 1.1).unwrap();
            let k = lattice_propagator(&h, &lat, 1.0).unwrap();
            assert!((k - free_kernel(1.0, 1.0, 0.9)).norm() < 1e-9, "{n}: {k}");
        }
    }

    #[test]
    fn rejects_momentum_coupling() {
        let h = SymbolFn::<f64>::parse("p^2 + p q").unwrap();
        let lat = LatticeConfig::new(2, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(lattice_propagator(&h, &lat, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn narrow_grid_reports_tail() {
        let h = SymbolFn::<f64>::parse("1/2 p^2").unwrap();
        let lat =
            LatticeConfig::new(4, 1.0, 0.0, 1.0).unwrap().with_grid(LatticeGrid { half_width: 0.3, spacing: 0.02 });
        assert!(matches!(lattice_propagator(&h, &lat, 1.0), Err(Error::GridTail { .. })));
    }
}
