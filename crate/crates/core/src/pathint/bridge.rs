//! Pinned Brownian paths in phase space and their Stratonovich action.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coherent::Gauge;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real, C};
use crate::symbols::SymbolFn;

#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath<T> {
    pub times: Vec<T>,
    pub p: Vec<T>,
    pub q: Vec<T>,
    pub nu: T,
}

fn validate<T: Real>(nu: T, t: T, start: (T, T), end: (T, T), steps: usize) -> Result<()> {
    if steps < 2 {
        return Err(Error::Invalid("a bridge needs at least 2 steps".into()));
    }
    if !(nu > T::zero() && nu.is_finite() && t > T::zero() && t.is_finite()) {
        return Err(Error::Invalid("nu and T must be positive and finite".into()));
    }
    if ![start.0, start.1, end.0, end.1].iter().all(|x| x.is_finite()) {
        return Err(Error::Invalid("endpoints must be finite".into()));
    }
    Ok(())
}

/// Exact Brownian bridge with diffusion `ν` in each of `p` and `q`.
pub fn sample_bridge<T: Real>(
    nu: T,
    t: T,
    start: (T, T),
    end: (T, T),
    steps: usize,
    seed: u64,
) -> Result<BridgePath<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_bridge_with(nu, t, start, end, steps, &mut rng)
}

pub fn sample_bridge_with<T: Real, R: Rng + ?Sized>(
    nu: T,
    t: T,
    start: (T, T),
    end: (T, T),
    steps: usize,
    rng: &mut R,
) -> Result<BridgePath<T>> {
    validate(nu, t, start, end, steps)?;
    let n = steps;
    let dt = t / from_usize::<T>(n);
    let sd = (nu * dt).sqrt();
    let mut wp = vec![T::zero(); n + 1];
    let mut wq = vec![T::zero(); n + 1];
    for k in 1..=n {
        let zp: f64 = rng.sample(StandardNormal);
        let zq: f64 = rng.sample(StandardNormal);
        wp[k] = wp[k - 1] + sd * lit::<T>(zp);
        wq[k] = wq[k - 1] + sd * lit::<T>(zq);
    }
    let times: Vec<T> = (0..=n).map(|k| dt * from_usize::<T>(k)).collect();
    let mut p = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let f = from_usize::<T>(k) / from_usize::<T>(n);
        p.push(start.0 + wp[k] - f * wp[n] + f * (end.0 - start.0));
        q.push(start.1 + wq[k] - f * wq[n] + f * (end.1 - start.1));
    }
    p[0] = start.0;
    q[0] = start.1;
    p[n] = end.0;
    q[n] = end.1;
    Ok(BridgePath { times, p, q, nu })
}

/// `Σ ½(p_{l+1} + p_l)(q_{l+1} − q_l)`.
pub fn stratonovich_integral<T: Real>(p: &[T], q: &[T]) -> T {
    let half: T = lit(0.5);
    p.windows(2).zip(q.windows(2)).fold(T::zero(), |acc, (pw, qw)| acc + half * (pw[0] + pw[1]) * (qw[1] - qw[0]))
}

/// Trapezoid rule for `∫ h(p(t), q(t)) dt` on the path's sample times.
pub fn time_integral<T: Real>(path: &BridgePath<T>, h: &SymbolFn<T>) -> T {
    let half: T = lit(0.5);
    let mut acc = T::zero();
    for k in 0..path.times.len() - 1 {
        let dt = path.times[k + 1] - path.times[k];
        acc += half * dt * (h.eval(path.p[k], path.q[k]) + h.eval(path.p[k + 1], path.q[k + 1]));
    }
    acc
}

/// `(i/ħ)[∫p∘dq + G(end) − G(start) − ∫h dt]`.
pub fn stratonovich_action<T: Real>(path: &BridgePath<T>, gauge: &Gauge<T>, h: &SymbolFn<T>, hbar: T) -> C<T> {
    let n = path.p.len() - 1;
    let s = stratonovich_integral(&path.p, &path.q) + gauge.eval(path.p[n], path.q[n])
        - gauge.eval(path.p[0], path.q[0])
        - time_integral(path, h);
    Complex::new(T::zero(), s / hbar)
}
