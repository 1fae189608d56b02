//! Wiener-regularized coherent-state propagator.
//!
//! Paths are discretized on `steps` uniform intervals in the scaled coordinates
//! `p̂ = p/√Ω`, `q̂ = q√Ω`, where both components diffuse with constant `ν`. The
//! discrete weight uses the midpoint rule for `∫p∘dq` and the trapezoid rule for
//! `∫h dt`. Its normalization `2πħ (1 − a²)^{n/2} e^{n·atanh a}`, `a = ν·dt/2ħ`,
//! makes the estimator exact for `h ≡ 0` at every step count and tends to
//! `2πħ e^{νT/2ħ}` as the step count grows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::coherent::{CoherentLabel, Gauge};
use crate::error::{Error, Result};
use crate::hilbert::SpaceConfig;
use crate::poly::PlanarPoly;
use crate::scalar::{cabs, cexp, cis, cln, from_usize, lit, to_f64, Real, C};
use crate::symbols::{conditions_check, SymbolFn};

use super::bridge::{sample_bridge_with, stratonovich_integral};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Integrates the interior momenta in closed form and samples positions from
    /// the resulting Gaussian. Needs `h = a₂p² + a₁p + V(q)` with polynomial `V`.
    MomentumMarginal,
    /// Samples full phase-space bridges. Accepts any symbol.
    PlainBridge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// Number of sampled paths; rounded up to an even count of antithetic pairs.
    pub samples: usize,
    pub steps: usize,
    pub seed: u64,
    pub workers: usize,
    /// Antithetic pairs per RNG stream.
    pub chunk: usize,
    pub estimator: Estimator,
    pub allow_non_semibounded: bool,
    /// Emit a warning when `stderr` exceeds this fraction of `|mean|`.
    pub target_rel_stderr: Option<f64>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            steps: 256,
            seed: 0,
            workers: 1,
            chunk: 4096,
            estimator: Estimator::MomentumMarginal,
            allow_non_semibounded: false,
            target_rel_stderr: None,
        }
    }
}

/// Stream `c` of `ChaCha8Rng::seed_from_u64(seed)` drives chunk `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub seed: u64,
    pub chunk: usize,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate<T> {
    pub mean: C<T>,
    /// Standard error computed from antithetic pair means.
    pub stderr: T,
    pub n_samples: usize,
    pub seed: SeedSpec,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy)]
struct Scaled<T> {
    p0: T,
    q0: T,
    p1: T,
    q1: T,
}

struct Problem<'a, T: Real> {
    h: &'a SymbolFn<T>,
    nu: T,
    time: T,
    hbar: T,
    omega: T,
    ends: Scaled<T>,
    gauge_jump: T,
    steps: usize,
}

impl<T: Real> Problem<'_, T> {
    fn dt(&self) -> T {
        self.time / from_usize::<T>(self.steps)
    }

    /// Symbol in scaled coordinates.
    fn h_scaled(&self, p: T, q: T) -> T {
        let r = self.omega.sqrt();
        self.h.eval(p * r, q / r)
    }

    /// `ln[2πħ (1−a²)^{n/2} e^{n·atanh a}] + n·ln(s/2π)`, with `s = 1/ν·dt`.
    fn log_normalization(&self) -> Result<T> {
        let dt = self.dt();
        let a = self.nu * dt / (self.hbar + self.hbar);
        if !(a < T::one()) {
            return Err(Error::Invalid(format!("nu*T/(2*hbar*steps) = {} must be below 1; increase steps", to_f64(a))));
        }
        let n = from_usize::<T>(self.steps);
        let half: T = lit(0.5);
        let atanh = half * ((T::one() + a) / (T::one() - a)).ln();
        let s = T::one() / (self.nu * dt);
        Ok((T::two_pi() * self.hbar).ln() + n * half * (T::one() - a * a).ln() + n * atanh + n * (s / T::two_pi()).ln())
    }
}

fn scaled_poly<T: Real>(h: &PlanarPoly<T>, omega: T) -> PlanarPoly<T> {
    let r = omega.sqrt();
    PlanarPoly::from_terms(h.terms().map(|(e, c)| {
        let f = r.powi(e[0] as i32 - e[1] as i32);
        (*e, *c * f)
    }))
}

fn validate<T: Real>(h: &SymbolFn<T>, nu: T, time: T, from: (T, T), to: (T, T), mc: &McConfig) -> Result<()> {
    if !(nu > T::zero() && nu.is_finite() && time > T::zero() && time.is_finite()) {
        return Err(Error::Invalid("nu and T must be positive and finite".into()));
    }
    if ![from.0, from.1, to.0, to.1].iter().all(|x| x.is_finite()) {
        return Err(Error::Invalid("labels must be finite".into()));
    }
    if mc.steps < 2 || mc.samples < 2 || mc.workers == 0 || mc.chunk == 0 {
        return Err(Error::Invalid("steps >= 2, samples >= 2, workers >= 1 and chunk >= 1 are required".into()));
    }
    if !h.is_real() {
        return Err(Error::Inadmissible("the symbol must be real".into()));
    }
    if !mc.allow_non_semibounded {
        let report = conditions_check(h)?;
        let semibounded = h.as_poly().is_none() || report.semibounded_polynomial;
        if !(report.cond1 && report.cond2 && semibounded) {
            return Err(Error::Inadmissible(
                "symbol fails the admissibility conditions; set allow_non_semibounded to override".into(),
            ));
        }
    }
    Ok(())
}

/// Monte Carlo estimate of `⟨p″,q″|e^{−i𝓗T/ħ}|p′,q′⟩` for the Toeplitz operator `𝓗` of `h`.
#[allow(clippy::too_many_arguments)]
pub fn dk_propagator<T: Real>(
    h: &SymbolFn<T>,
    nu: T,
    time: T,
    from: &CoherentLabel<T>,
    to: &CoherentLabel<T>,
    mc: &McConfig,
    gauge: &Gauge<T>,
    cfg: &SpaceConfig<T>,
) -> Result<MCEstimate<T>> {
    let a = from.to_cartesian();
    let b = to.to_cartesian();
    validate(h, nu, time, a, b, mc)?;
    let problem = problem(h, nu, time, a, b, mc.steps, gauge, cfg);
    let pairs = mc.samples.div_ceil(2);
    let seed = SeedSpec { seed: mc.seed, chunk: mc.chunk, workers: mc.workers };
    let (scale, acc) = match mc.estimator {
        Estimator::MomentumMarginal => {
            let plan = GaussianPlan::build(&problem)?;
            let acc = run_chunks(pairs, mc, |rng, n| plan.chunk(rng, n))?;
            (plan.log_base, acc)
        }
        Estimator::PlainBridge => {
            let log = plain_log_weight(&problem)?;
            let acc = run_chunks(pairs, mc, |rng, n| plain_chunk(&problem, rng, n))?;
            (log, acc)
        }
    };
    let factor = cexp(scale);
    let mean = acc.mean * factor;
    let stderr = if acc.n > 1 {
        (acc.m2 / from_usize::<T>(acc.n - 1) / from_usize::<T>(acc.n)).sqrt() * cabs(factor)
    } else {
        T::zero()
    };
    let warning = mc.target_rel_stderr.and_then(|target| {
        let rel = to_f64(stderr) / to_f64(cabs(mean)).max(f64::MIN_POSITIVE);
        (rel > target).then(|| format!("relative standard error {rel:.3e} exceeds requested {target:.3e}"))
    });
    Ok(MCEstimate { mean, stderr, n_samples: 2 * acc.n, seed, warning })
}

/// Exact value of the discretized integral when the sampled expectation is Gaussian.
///
/// Returns `None` when `h` is outside the quadratic class `a₂p² + a₁p + c₂q² + c₁q + c₀`.
#[allow(clippy::too_many_arguments)]
pub fn dk_expected<T: Real>(
    h: &SymbolFn<T>,
    nu: T,
    time: T,
    from: &CoherentLabel<T>,
    to: &CoherentLabel<T>,
    steps: usize,
    gauge: &Gauge<T>,
    cfg: &SpaceConfig<T>,
) -> Result<Option<C<T>>> {
    let a = from.to_cartesian();
    let b = to.to_cartesian();
    let problem = problem(h, nu, time, a, b, steps, gauge, cfg);
    let plan = GaussianPlan::build(&problem)?;
    if plan.remainder.is_some() {
        return Ok(None);
    }
    let one = Complex::new(T::one(), T::zero());
    let half: T = lit(0.5);
    let mut log = plan.log_base;
    for (g, l) in plan.g.iter().zip(plan.lambda.iter()) {
        let d = one + Complex::new(T::zero(), *l);
        log += -cln(d) * half - Complex::new(*g * *g * half, T::zero()) / d;
    }
    Ok(Some(cexp(log)))
}

#[allow(clippy::too_many_arguments)]
fn problem<'a, T: Real>(
    h: &'a SymbolFn<T>,
    nu: T,
    time: T,
    a: (T, T),
    b: (T, T),
    steps: usize,
    gauge: &Gauge<T>,
    cfg: &SpaceConfig<T>,
) -> Problem<'a, T> {
    let r = cfg.omega().sqrt();
    Problem {
        h,
        nu,
        time,
        hbar: cfg.hbar(),
        omega: cfg.omega(),
        ends: Scaled { p0: a.0 / r, q0: a.1 * r, p1: b.0 / r, q1: b.1 * r },
        gauge_jump: gauge.eval(b.0, b.1) - gauge.eval(a.0, a.1),
        steps,
    }
}

/// Running complex mean with the sum of squared deviations.
#[derive(Debug, Clone, Copy)]
struct Acc<T> {
    n: usize,
    mean: C<T>,
    m2: T,
}

impl<T: Real> Acc<T> {
    fn empty() -> Self {
        Self { n: 0, mean: Complex::new(T::zero(), T::zero()), m2: T::zero() }
    }

    fn push(&mut self, x: C<T>) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / from_usize::<T>(self.n);
        let d2 = x - self.mean;
        self.m2 += d.re * d2.re + d.im * d2.im;
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let (na, nb, nt) = (from_usize::<T>(a.n), from_usize::<T>(b.n), from_usize::<T>(n));
        let d = b.mean - a.mean;
        let mean = a.mean + d * (nb / nt);
        let m2 = a.m2 + b.m2 + (d.re * d.re + d.im * d.im) * na * nb / nt;
        Self { n, mean, m2 }
    }
}

fn tree<T: Real>(v: &[Acc<T>]) -> Acc<T> {
    match v.len() {
        0 => Acc::empty(),
        1 => v[0],
        n => Acc::merge(tree(&v[..n / 2]), tree(&v[n / 2..])),
    }
}

fn run_chunks<T: Real, F>(pairs: usize, mc: &McConfig, f: F) -> Result<Acc<T>>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Acc<T> + Sync,
{
    let n_chunks = pairs.div_ceil(mc.chunk);
    let job = |c: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(c as u64);
        let n = mc.chunk.min(pairs - c * mc.chunk);
        f(&mut rng, n)
    };
    let parts: Vec<Acc<T>> = if mc.workers == 1 {
        (0..n_chunks).map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(mc.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| (0..n_chunks).into_par_iter().map(job).collect())
    };
    Ok(tree(&parts))
}

fn normal<T: Real, R: Rng>(rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    lit(z)
}

/// Gaussian representation of the momentum-marginal integrand.
///
/// The discretized integral equals `exp(log_base) · E[exp(i gᵀy − i½Σλ_j y_j²) F(μ + B y)]`
/// with `y ~ N(0, I)` and `F` carrying the non-quadratic part of the potential.
struct GaussianPlan<T: Real> {
    log_base: C<T>,
    g: DVector<T>,
    lambda: DVector<T>,
    mu: DVector<T>,
    basis: DMatrix<T>,
    remainder: Option<PlanarPoly<T>>,
    dt_over_hbar: T,
}

fn complex_tridiagonal_inverse<T: Real>(diag: C<T>, off: C<T>, k: usize) -> (DMatrix<C<T>>, C<T>) {
    let mut pivots = Vec::with_capacity(k);
    let mut log_det = Complex::new(T::zero(), T::zero());
    for j in 0..k {
        let d = if j == 0 { diag } else { diag - off * off / pivots[j - 1] };
        log_det += cln(d);
        pivots.push(d);
    }
    let mut inv = DMatrix::from_element(k, k, Complex::new(T::zero(), T::zero()));
    let mut y = vec![Complex::new(T::zero(), T::zero()); k];
    for m in 0..k {
        for j in 0..k {
            let rhs = if j == m { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) };
            y[j] = if j == 0 { rhs } else { rhs - off * y[j - 1] / pivots[j - 1] };
        }
        let mut x = Complex::new(T::zero(), T::zero());
        for j in (0..k).rev() {
            x = if j + 1 == k { y[j] / pivots[j] } else { (y[j] - off * x) / pivots[j] };
            inv[(j, m)] = x;
        }
    }
    (inv, log_det)
}

impl<T: Real> GaussianPlan<T> {
    fn build(pr: &Problem<'_, T>) -> Result<Self> {
        let poly = pr.h.as_poly().ok_or_else(|| {
            Error::Unsupported("the momentum-marginal estimator needs a polynomial symbol; use PlainBridge".into())
        })?;
        let hs = scaled_poly(poly, pr.omega);
        let mut potential = PlanarPoly::zero();
        for (e, c) in hs.terms() {
            match e[0] {
                0 => potential.add_term(*e, *c),
                1 | 2 if e[1] == 0 => {}
                _ => {
                    return Err(Error::Unsupported(
                        "the momentum-marginal estimator needs h = a2 p^2 + a1 p + V(q); use PlainBridge".into(),
                    ))
                }
            }
        }
        let a2 = hs.coeff([2, 0]);
        let a1 = hs.coeff([1, 0]);
        let c2 = potential.coeff([0, 2]);
        let c1 = potential.coeff([0, 1]);
        let c0 = potential.coeff([0, 0]);
        let mut rest = potential.clone();
        for b in 0..3 {
            rest.add_term([0, b], -potential.coeff([0, b]));
        }
        let remainder = (!rest.is_zero()).then_some(rest);

        let n = pr.steps;
        let k = n - 1;
        let hbar = pr.hbar;
        let dt = pr.dt();
        let dth = dt / hbar;
        let s = T::one() / (pr.nu * dt);
        let half: T = lit(0.5);
        let two: T = lit(2.0);
        let i = Complex::new(T::zero(), T::one());
        let re = |x: T| Complex::new(x, T::zero());
        let Scaled { p0, q0, p1, q1 } = pr.ends;

        let (cinv, log_det_a) = complex_tridiagonal_inverse(re(two * s) + i * (two * dth * a2), re(-s), k);

        let mut e = DVector::from_element(k, re(T::zero()));
        e[0] -= re(q0);
        e[k - 1] += re(q1);
        let mut u = DVector::from_element(k, -i * (dth * a1));
        u[0] += re(s * p0);
        u[k - 1] += re(s * p1);
        let ih = i / (two * hbar);
        u += e.map(|x| x * ih);
        let cu = &cinv * &u;
        let const_u = u.iter().zip(cu.iter()).fold(re(T::zero()), |acc, (a, b)| acc + *a * *b) * half;

        let dt_vec = |v: &DVector<C<T>>| {
            DVector::from_fn(k, |m, _| {
                let lo = if m > 0 { v[m - 1] } else { re(T::zero()) };
                let hi = if m + 1 < k { v[m + 1] } else { re(T::zero()) };
                lo - hi
            })
        };
        let mut bq = dt_vec(&cu).map(|x| x * ih);
        bq[0] += re(s * q0) + ih * p0;
        bq[k - 1] += re(s * q1) - ih * p1;
        bq.iter_mut().for_each(|x| *x -= i * (dth * c1));

        let x = DMatrix::from_fn(k, k, |r, m| {
            let lo = if m > 0 { cinv[(r, m - 1)] } else { re(T::zero()) };
            let hi = if m + 1 < k { cinv[(r, m + 1)] } else { re(T::zero()) };
            lo - hi
        });
        let w = T::one() / (lit::<T>(4.0) * hbar * hbar);
        let mut mmat = DMatrix::from_fn(k, k, |m, c| {
            let lo = if m > 0 { x[(m - 1, c)] } else { re(T::zero()) };
            let hi = if m + 1 < k { x[(m + 1, c)] } else { re(T::zero()) };
            (lo - hi) * w
        });
        for j in 0..k {
            mmat[(j, j)] += re(two * s) + i * (two * dth * c2);
            if j + 1 < k {
                mmat[(j, j + 1)] -= re(s);
                mmat[(j + 1, j)] -= re(s);
            }
        }
        let rmat = DMatrix::from_fn(k, k, |r, c| half * (mmat[(r, c)].re + mmat[(c, r)].re));
        let jmat = DMatrix::from_fn(k, k, |r, c| half * (mmat[(r, c)].im + mmat[(c, r)].im));
        let beta = bq.map(|z| z.re);
        let gamma = bq.map(|z| z.im);

        let chol = rmat
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Config("position covariance is not positive definite".into()))?;
        let l = chol.l();
        let log_det_r = l.diagonal().iter().fold(T::zero(), |acc, d| acc + d.ln()) * two;
        let mu = chol.solve(&beta);
        let linv = l
            .solve_lower_triangular(&DMatrix::identity(k, k))
            .ok_or_else(|| Error::Config("singular Cholesky factor".into()))?;
        let sjs = &linv * &jmat * linv.transpose();
        let sym = DMatrix::from_fn(k, k, |r, c| half * (sjs[(r, c)] + sjs[(c, r)]));
        let eig = sym.symmetric_eigen();
        let jmu = &jmat * &mu;
        let g = eig.eigenvectors.transpose() * (&linv * (&gamma - &jmu));
        let basis = linv.transpose() * &eig.eigenvectors;
        let phase_mu = -half * mu.dot(&jmu) + gamma.dot(&mu);

        let kf = from_usize::<T>(k);
        let ln2pi = T::two_pi().ln();
        let h_ends = pr.h_scaled(p0, q0) + pr.h_scaled(p1, q1);
        let log_base = const_u + re(kf * half * ln2pi) - log_det_a * half + ih * (p1 * q1 - p0 * q0)
            - re(half * s * (q0 * q0 + q1 * q1 + p0 * p0 + p1 * p1))
            - i * (dth * kf * c0)
            - i * (half * dth * h_ends)
            + i * (pr.gauge_jump / hbar)
            + re(pr.log_normalization()?)
            + re(kf * half * ln2pi - half * log_det_r + half * beta.dot(&mu))
            + i * phase_mu;
        Ok(Self { log_base, g, lambda: eig.eigenvalues, mu, basis, remainder, dt_over_hbar: dth })
    }

    fn remainder_phase(&self, rest: &PlanarPoly<T>, y: &DVector<T>, sign: T) -> T {
        let q = &self.mu + &self.basis * y * sign;
        -self.dt_over_hbar * q.iter().fold(T::zero(), |acc, &qj| acc + rest.eval([T::zero(), qj]))
    }

    fn chunk(&self, rng: &mut ChaCha8Rng, pairs: usize) -> Acc<T> {
        let k = self.g.len();
        let half: T = lit(0.5);
        let mut acc = Acc::empty();
        let mut y = DVector::from_element(k, T::zero());
        for _ in 0..pairs {
            let mut lin = T::zero();
            let mut quad = T::zero();
            for j in 0..k {
                let z: T = normal(rng);
                y[j] = z;
                lin += self.g[j] * z;
                quad += self.lambda[j] * z * z;
            }
            let v = match &self.remainder {
                None => cis(-half * quad) * lin.cos(),
                Some(rest) => {
                    let plus = cis(lin - half * quad + self.remainder_phase(rest, &y, T::one()));
                    let minus = cis(-lin - half * quad + self.remainder_phase(rest, &y, -T::one()));
                    (plus + minus) * half
                }
            };
            acc.push(v);
        }
        acc
    }
}

/// `ln[normalization · pinned mass] + iΔG/ħ` for the plain bridge estimator.
fn plain_log_weight<T: Real>(pr: &Problem<'_, T>) -> Result<C<T>> {
    let Scaled { p0, q0, p1, q1 } = pr.ends;
    let nt = pr.nu * pr.time;
    let d2 = (p1 - p0) * (p1 - p0) + (q1 - q0) * (q1 - q0);
    let dt = pr.dt();
    let s = T::one() / (pr.nu * dt);
    let n = from_usize::<T>(pr.steps);
    let mass = -d2 / (nt + nt) - (T::two_pi() * nt).ln();
    let log_norm = pr.log_normalization()? - n * (s / T::two_pi()).ln();
    Ok(Complex::new(log_norm + mass, pr.gauge_jump / pr.hbar))
}

fn plain_phase<T: Real>(pr: &Problem<'_, T>, p: &[T], q: &[T]) -> T {
    let dt = pr.dt();
    let half: T = lit(0.5);
    let n = p.len() - 1;
    let mut hsum = half * (pr.h_scaled(p[0], q[0]) + pr.h_scaled(p[n], q[n]));
    for j in 1..n {
        hsum += pr.h_scaled(p[j], q[j]);
    }
    (stratonovich_integral(p, q) - dt * hsum) / pr.hbar
}

fn plain_chunk<T: Real>(pr: &Problem<'_, T>, rng: &mut ChaCha8Rng, pairs: usize) -> Acc<T> {
    let Scaled { p0, q0, p1, q1 } = pr.ends;
    let n = pr.steps;
    let half: T = lit(0.5);
    let mut acc = Acc::empty();
    let mut rp = vec![T::zero(); n + 1];
    let mut rq = vec![T::zero(); n + 1];
    for _ in 0..pairs {
        let path = match sample_bridge_with(pr.nu, pr.time, (p0, q0), (p1, q1), n, rng) {
            Ok(path) => path,
            Err(_) => return acc,
        };
        for j in 0..=n {
            let f = from_usize::<T>(j) / from_usize::<T>(n);
            rp[j] = (p0 + (p1 - p0) * f) * lit(2.0) - path.p[j];
            rq[j] = (q0 + (q1 - q0) * f) * lit(2.0) - path.q[j];
        }
        rp[0] = p0;
        rq[0] = q0;
        rp[n] = p1;
        rq[n] = q1;
        let v = (cis(plain_phase(pr, &path.p, &path.q)) + cis(plain_phase(pr, &rp, &rq))) * half;
        acc.push(v);
    }
    acc
}
