//! Gauss–Legendre rules and phase-space / sphere node sets.

use crate::coherent::CoherentLabel;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1], ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n == 0 {
        return Err(Error::Quadrature("Gauss-Legendre rule needs at least one node".into()));
    }
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = from_usize::<T>(n);
    let tol = T::default_epsilon() * lit(4.0);
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let mut z = (T::pi() * (from_usize::<T>(i) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= tol {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != T::zero() { d } else { dp };
        let wi = lit::<T>(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    Ok((x, w))
}

fn legendre_with_derivative<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = from_usize::<T>(k);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = from_usize::<T>(n);
    let d = nf * (z * p1 - p0) / (z * z - T::one());
    (p1, d)
}

/// Gauss–Legendre nodes/weights mapped to [a, b].
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> Result<(Vec<T>, Vec<T>)> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Quadrature(format!("bad interval [{}, {}]", to_f64(a), to_f64(b))));
    }
    let (x, w) = gauss_legendre::<T>(n)?;
    let half = (b - a) * lit(0.5);
    let mid = (b + a) * lit(0.5);
    Ok((x.iter().map(|&t| mid + half * t).collect(), w.iter().map(|&v| v * half).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseNode<T> {
    pub label: CoherentLabel<T>,
    /// Coordinate-measure weight (dp dq in the label's chart), without 1/2πħ.
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseQuadrature<T> {
    nodes: Vec<PhaseNode<T>>,
}

impl<T: Real> PhaseQuadrature<T> {
    pub fn from_nodes(nodes: Vec<PhaseNode<T>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Quadrature("empty node set".into()));
        }
        if nodes.iter().any(|n| !(n.weight.is_finite() && n.label.p.is_finite() && n.label.q.is_finite())) {
            return Err(Error::Quadrature("non-finite node or weight".into()));
        }
        Ok(Self { nodes })
    }

    /// Tensor Gauss–Legendre rule on [-rp, rp] x [-rq, rq] in Cartesian labels.
    pub fn rectangle(rp: T, rq: T, np: usize, nq: usize) -> Result<Self> {
        if !(rp > T::zero() && rq > T::zero() && rp.is_finite() && rq.is_finite()) {
            return Err(Error::Quadrature(format!(
                "radius must be positive and finite, got ({}, {})",
                to_f64(rp),
                to_f64(rq)
            )));
        }
        if np < 2 || nq < 2 {
            return Err(Error::Quadrature("at least two nodes per axis required".into()));
        }
        let (xp, wp) = gauss_legendre_on(np, -rp, rp)?;
        let (xq, wq) = gauss_legendre_on(nq, -rq, rq)?;
        let mut nodes = Vec::with_capacity(np * nq);
        for (&p, &a) in xp.iter().zip(&wp) {
            for (&q, &b) in xq.iter().zip(&wq) {
                nodes.push(PhaseNode { label: CoherentLabel::cartesian(p, q), weight: a * b });
            }
        }
        Ok(Self { nodes })
    }

    pub fn square(radius: T, n: usize) -> Result<Self> {
        Self::rectangle(radius, radius, n, n)
    }

    /// Gauss–Legendre in the action p̃ ∈ [lo, hi] times the periodic trapezoid rule in the angle.
    pub fn action_angle(lo: T, hi: T, n_action: usize, n_angle: usize) -> Result<Self> {
        if !(lo >= T::zero()) || n_angle < 2 {
            return Err(Error::Quadrature("action range must start at >= 0 and use >= 2 angles".into()));
        }
        let (xa, wa) = gauss_legendre_on(n_action, lo, hi)?;
        let dphi = T::two_pi() / from_usize::<T>(n_angle);
        let mut nodes = Vec::with_capacity(n_action * n_angle);
        for (&a, &w) in xa.iter().zip(&wa) {
            for j in 0..n_angle {
                let angle = -T::pi() + (from_usize::<T>(j) + lit(0.5)) * dphi;
                nodes.push(PhaseNode { label: CoherentLabel::action_angle(a, angle), weight: w * dphi });
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[PhaseNode<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Upper regularized incomplete gamma for integer order: `Q(k, x) = e^{-x} Σ_{j<k} x^j / j!`.
pub fn poisson_cdf(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    // Sum in log space from the largest term to avoid overflow.
    let mut terms = Vec::with_capacity(k);
    let mut log_term = -x;
    terms.push(log_term);
    for j in 1..k {
        log_term += x.ln() - (j as f64).ln();
        terms.push(log_term);
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    (m + s.ln()).exp().min(1.0)
}

/// Product rule on the sphere: Gauss–Legendre in cos θ and trapezoid in φ.
/// Weights integrate `sinθ dθ dφ` (total 4π).
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature<T> {
    pub nodes: Vec<(T, T, T)>,
}

impl<T: Real> SphereQuadrature<T> {
    pub fn product(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 1 || n_phi < 1 {
            return Err(Error::Quadrature("sphere rule needs at least one node per axis".into()));
        }
        let (x, w) = gauss_legendre::<T>(n_theta)?;
        let dphi = T::two_pi() / from_usize::<T>(n_phi);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (&c, &wc) in x.iter().zip(&w) {
            let theta = c.acos();
            for j in 0..n_phi {
                nodes.push((theta, from_usize::<T>(j) * dphi, wc * dphi));
            }
        }
        Ok(Self { nodes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre::<f64>(7).unwrap();
        // Degree 13 is the highest exact degree.
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_is_accurate() {
        let (x, w) = gauss_legendre_on::<f64>(200, -12.0, 12.0).unwrap();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (-x * x).exp()).sum();
        assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn single_precision_rule() {
        let (x, w) = gauss_legendre::<f32>(10).unwrap();
        let s: f32 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - 2.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_divergent_specs() {
        assert!(PhaseQuadrature::<f64>::square(f64::INFINITY, 10).is_err());
        assert!(PhaseQuadrature::<f64>::square(-1.0, 10).is_err());
        assert!(PhaseQuadrature::<f64>::square(1.0, 1).is_err());
    }

    #[test]
    fn poisson_cdf_values() {
        assert!((poisson_cdf(1, 2.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((poisson_cdf(3, 1.0) - 2.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(poisson_cdf(33, 120.0) < 1e-20);
    }
}
