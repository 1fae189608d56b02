//! Canonical coherent states `e^{-iG/ħ} e^{-iqP/ħ} e^{ipQ/ħ}|η⟩` on the truncated basis.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{canonical_ops, fiducial_ground, SpaceConfig, StateVector};
use crate::poly::PlanarPoly;
use crate::quadrature::{poisson_cdf, PhaseQuadrature};
use crate::scalar::{cexp, cis, from_usize, lit, real, to_f64, Modulus, Real, C};

/// Built-in label charts that can be converted to Cartesian labels without a registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChartId {
    #[default]
    Cartesian,
    /// `p̃ = (p²+q²)/2`, `q̃ = atan2(q, p)`.
    ActionAngle,
    /// `p̄ = (p+q)/√2`, `q̄ = (q−p)/√2`.
    Rotation45,
}

impl ChartId {
    pub fn name(&self) -> &'static str {
        match self {
            ChartId::Cartesian => "cartesian",
            ChartId::ActionAngle => "action-angle",
            ChartId::Rotation45 => "rotation-45",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "cartesian" => Some(ChartId::Cartesian),
            "action-angle" => Some(ChartId::ActionAngle),
            "rotation-45" => Some(ChartId::Rotation45),
            _ => None,
        }
    }

    pub fn to_cartesian<T: Real>(&self, a: T, b: T) -> (T, T) {
        match self {
            ChartId::Cartesian => (a, b),
            ChartId::ActionAngle => {
                let r = (lit::<T>(2.0) * a.max(T::zero())).sqrt();
                (r * b.cos(), r * b.sin())
            }
            ChartId::Rotation45 => {
                let s = T::FRAC_1_SQRT_2();
                ((a - b) * s, (a + b) * s)
            }
        }
    }

    pub fn from_cartesian<T: Real>(&self, p: T, q: T) -> (T, T) {
        match self {
            ChartId::Cartesian => (p, q),
            ChartId::ActionAngle => ((p * p + q * q) * lit(0.5), q.atan2(p)),
            ChartId::Rotation45 => {
                let s = T::FRAC_1_SQRT_2();
                ((p + q) * s, (q - p) * s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentLabel<T> {
    pub p: T,
    pub q: T,
    pub chart: ChartId,
}

impl<T: Real> CoherentLabel<T> {
    pub fn cartesian(p: T, q: T) -> Self {
        Self { p, q, chart: ChartId::Cartesian }
    }

    pub fn action_angle(action: T, angle: T) -> Self {
        Self { p: action, q: angle, chart: ChartId::ActionAngle }
    }

    pub fn in_chart(p: T, q: T, chart: ChartId) -> Self {
        Self { p, q, chart }
    }

    pub fn to_cartesian(&self) -> (T, T) {
        self.chart.to_cartesian(self.p, self.q)
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }
}

pub type GaugeFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Scalar `G(p, q)` entering the coherent-state phase (Cartesian arguments).
#[derive(Clone, Default)]
pub enum Gauge<T: Real> {
    #[default]
    Zero,
    Poly(PlanarPoly<T>),
    Func(GaugeFn<T>),
}

impl<T: Real> fmt::Debug for Gauge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::Zero => write!(f, "Gauge::Zero"),
            Gauge::Poly(p) => write!(f, "Gauge::Poly({p:?})"),
            Gauge::Func(_) => write!(f, "Gauge::Func(..)"),
        }
    }
}

impl<T: Real> Gauge<T> {
    pub fn func(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Gauge::Func(Arc::new(f))
    }

    pub fn eval(&self, p: T, q: T) -> T {
        match self {
            Gauge::Zero => T::zero(),
            Gauge::Poly(g) => g.eval([p, q]),
            Gauge::Func(f) => f(p, q),
        }
    }

    /// `(∂G/∂p, ∂G/∂q)`, exact for polynomials.
    pub fn gradient(&self, p: T, q: T) -> (T, T) {
        match self {
            Gauge::Zero => (T::zero(), T::zero()),
            Gauge::Poly(g) => (g.derivative(0).eval([p, q]), g.derivative(1).eval([p, q])),
            Gauge::Func(f) => {
                let h: T = lit(1e-5);
                let two: T = lit(2.0);
                ((f(p + h, q) - f(p - h, q)) / (two * h), (f(p, q + h) - f(p, q - h)) / (two * h))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Gauge::Zero)
    }
}

/// Normalized seed vector of a coherent-state family.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiducial<T: Real> {
    vec: StateVector<T>,
    centered: bool,
    mean_p: T,
    mean_q: T,
    support: usize,
}

impl<T: Real> Fiducial<T> {
    pub fn new(vec: StateVector<T>, cfg: &SpaceConfig<T>) -> Result<Self> {
        if vec.dim() != cfg.dim() {
            return Err(Error::Invalid(format!("fiducial has dimension {}, expected {}", vec.dim(), cfg.dim())));
        }
        let n = vec.norm();
        if (n - T::one()).abs() > lit(1e-10) {
            return Err(Error::Invalid(format!("fiducial norm {} is not 1", to_f64(n))));
        }
        let (p, q) = canonical_ops(cfg)?;
        let mean_p = vec.expect(&p).re;
        let mean_q = vec.expect(&q).re;
        let tol: T = lit(1e-10);
        let centered = mean_p.abs() <= tol && mean_q.abs() <= tol;
        let support = vec.amps().iter().rposition(|z| z.modulus() > T::zero()).map_or(0, |i| i + 1);
        Ok(Self { vec, centered, mean_p, mean_q, support })
    }

    /// Oscillator ground state at the basis frequency Ω.
    pub fn gaussian(cfg: &SpaceConfig<T>) -> Self {
        Self::new(fiducial_ground(cfg), cfg).expect("ground state is a valid fiducial")
    }

    pub fn fock(cfg: &SpaceConfig<T>, n: usize) -> Result<Self> {
        Self::new(StateVector::basis(cfg.dim(), n)?, cfg)
    }

    /// Vacuum of `cosh(r) a + e^{iθ} sinh(r) a†`, truncated and renormalized.
    pub fn squeezed(cfg: &SpaceConfig<T>, r: T, theta: T) -> Result<Self> {
        let d = cfg.dim();
        let t = cis(theta) * r.tanh();
        let mut amps = vec![real(T::zero()); d];
        amps[0] = real(T::one());
        let mut n = 1;
        while n + 1 < d {
            let ratio = (from_usize::<T>(n) / from_usize::<T>(n + 1)).sqrt();
            amps[n + 1] = -(t * amps[n - 1]) * ratio;
            n += 2;
        }
        Self::new(StateVector::from_vec(amps)?.normalized()?, cfg)
    }

    /// Ground state of frequency `omega2`, expressed in the Ω-basis.
    pub fn with_frequency(cfg: &SpaceConfig<T>, omega2: T) -> Result<Self> {
        if !(omega2 > T::zero()) {
            return Err(Error::Invalid("frequency must be positive".into()));
        }
        Self::squeezed(cfg, (omega2 / cfg.omega()).ln() * lit(0.5), T::zero())
    }

    /// Gaussian ground state displaced to `(p0, q0)`.
    pub fn displaced(cfg: &SpaceConfig<T>, p0: T, q0: T) -> Result<Self> {
        let fam = CoherentFamily::new(cfg, Self::gaussian(cfg), Gauge::Zero);
        let v = fam.state(&CoherentLabel::cartesian(p0, q0))?;
        Self::new(v.normalized()?, cfg)
    }

    pub fn vec(&self) -> &StateVector<T> {
        &self.vec
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    pub fn means(&self) -> (T, T) {
        (self.mean_p, self.mean_q)
    }

    /// One past the largest occupied number-basis index.
    pub fn support(&self) -> usize {
        self.support
    }

    /// True when the fiducial is the Ω-basis ground state up to a phase.
    pub fn is_basis_ground(&self) -> bool {
        self.support == 1
    }
}

/// `|p|²/(2ħΩ) + Ω|q|²/(2ħ)`, the mean occupation of the Gaussian coherent state.
pub fn mean_occupation<T: Real>(p: T, q: T, cfg: &SpaceConfig<T>) -> T {
    let two: T = lit(2.0);
    p * p / (two * cfg.hbar() * cfg.omega()) + cfg.omega() * q * q / (two * cfg.hbar())
}

pub fn trusted_occupation<T: Real>(cfg: &SpaceConfig<T>) -> T {
    from_usize::<T>(cfg.dim()) / lit(8.0)
}

pub fn check_trusted<T: Real>(p: T, q: T, cfg: &SpaceConfig<T>) -> Result<()> {
    let occ = mean_occupation(p, q, cfg);
    let limit = trusted_occupation(cfg);
    if !(p.is_finite() && q.is_finite()) || occ > limit {
        return Err(Error::TruncationRadius {
            p: to_f64(p),
            q: to_f64(q),
            occupation: to_f64(occ),
            limit: to_f64(limit),
        });
    }
    Ok(())
}

/// A fiducial together with a gauge: the map `(p, q) ↦ |p, q⟩`.
#[derive(Debug, Clone)]
pub struct CoherentFamily<T: Real> {
    cfg: SpaceConfig<T>,
    fid: Fiducial<T>,
    gauge: Gauge<T>,
}

impl<T: Real> CoherentFamily<T> {
    pub fn new(cfg: &SpaceConfig<T>, fid: Fiducial<T>, gauge: Gauge<T>) -> Self {
        Self { cfg: *cfg, fid, gauge }
    }

    pub fn gaussian(cfg: &SpaceConfig<T>) -> Self {
        Self::new(cfg, Fiducial::gaussian(cfg), Gauge::Zero)
    }

    pub fn cfg(&self) -> &SpaceConfig<T> {
        &self.cfg
    }

    pub fn fiducial(&self) -> &Fiducial<T> {
        &self.fid
    }

    pub fn gauge(&self) -> &Gauge<T> {
        &self.gauge
    }

    /// Coherent state for a label inside the trusted radius.
    pub fn state(&self, label: &CoherentLabel<T>) -> Result<StateVector<T>> {
        if !label.is_finite() {
            return Err(Error::Invalid("label must be finite".into()));
        }
        let (p, q) = label.to_cartesian();
        check_trusted(p, q, &self.cfg)?;
        StateVector::new(self.amplitudes(p, q, self.cfg.dim()))
    }

    /// First `rows` number-basis amplitudes of `|p, q⟩` (Cartesian label).
    ///
    /// Each amplitude is the exact infinite-space value, so entries of a leading
    /// block stay accurate even for labels beyond the trusted radius.
    pub fn amplitudes(&self, p: T, q: T, rows: usize) -> DVector<C<T>> {
        let cfg = &self.cfg;
        let two: T = lit(2.0);
        let alpha = Complex::new(cfg.omega() * q, p) / (two * cfg.hbar() * cfg.omega()).sqrt();
        let cols = self.fid.support.max(1);
        let amps = self.fid.vec.amps();
        let disp = displacement_columns(alpha, rows, cols);
        let mut out = DVector::zeros(rows);
        for n in 0..cols {
            let c = amps[n];
            if c.norm_sqr() == T::zero() {
                continue;
            }
            for m in 0..rows {
                out[m] += disp[(m, n)] * c;
            }
        }
        let phase = -(p * q) / (two * cfg.hbar()) - self.gauge.eval(p, q) / cfg.hbar();
        let ph = cis(phase);
        out.apply(|z| *z *= ph);
        out
    }
}

/// `D_{m,n}(α) = ⟨m|exp(α a† − ᾱ a)|n⟩` for `m < rows`, `n < cols`.
pub fn displacement_columns<T: Real>(alpha: C<T>, rows: usize, cols: usize) -> DMatrix<C<T>> {
    let mut d = DMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return d;
    }
    let r2 = alpha.norm_sqr();
    let r = r2.sqrt();
    let phase = alpha.im.atan2(alpha.re);
    let half: T = lit(0.5);
    // Column 0 in log form: e^{-|α|²/2} α^m / √m!.
    let mut log_mag = -r2 * half;
    let log_r = if r > T::zero() { r.ln() } else { T::zero() };
    for m in 0..rows {
        if m > 0 {
            if r == T::zero() {
                break;
            }
            log_mag += log_r - from_usize::<T>(m).ln() * half;
        }
        d[(m, 0)] = cexp(Complex::new(log_mag, phase * from_usize::<T>(m)));
    }
    let neg_conj = -alpha.conj();
    let mut top = real((-r2 * half).exp());
    for n in 1..cols {
        top = top * neg_conj / from_usize::<T>(n).sqrt();
        d[(0, n)] = top;
        let sn = from_usize::<T>(n).sqrt();
        for m in 1..rows {
            let sm = from_usize::<T>(m).sqrt();
            d[(m, n)] = (alpha * d[(m - 1, n)] + d[(m - 1, n - 1)] * sn) / sm;
        }
    }
    d
}

/// Coherent state for the given fiducial and gauge.
pub fn coherent_state<T: Real>(
    label: &CoherentLabel<T>,
    fid: &Fiducial<T>,
    gauge: &Gauge<T>,
    cfg: &SpaceConfig<T>,
) -> Result<StateVector<T>> {
    CoherentFamily::new(cfg, fid.clone(), gauge.clone()).state(label)
}

/// `⟨p′,q′|p,q⟩` for the Gaussian fiducial at frequency Ω and zero gauge.
pub fn overlap_analytic<T: Real>(l1: &CoherentLabel<T>, l0: &CoherentLabel<T>, cfg: &SpaceConfig<T>) -> C<T> {
    let (p1, q1) = l1.to_cartesian();
    let (p0, q0) = l0.to_cartesian();
    let h = cfg.hbar();
    let w = cfg.omega();
    let dp = p1 - p0;
    let dq = q1 - q0;
    let re = -(dp * dp / w + w * dq * dq) / (lit::<T>(4.0) * h);
    let im = (p1 + p0) * dq / (lit::<T>(2.0) * h);
    cexp(Complex::new(re, im))
}

/// Minimal number of Gauss–Legendre nodes per axis used for `rows` block entries.
pub(crate) fn default_nodes<T: Real>(rho2: T, rows: usize, extra_degree: usize) -> usize {
    let r = to_f64(rho2);
    ((1.3 * r) as usize + rows + extra_degree + 24).max(16)
}

/// Squared α-radius beyond which the Poisson tail of block entries is below `tol`.
pub(crate) fn tail_radius2(rows: usize, tol: f64) -> f64 {
    let mut x = (rows as f64).max(1.0);
    while poisson_cdf(rows, x) > tol {
        x *= 1.05;
    }
    x
}

/// Rectangle in `(p, q)` matching an α-disk of squared radius `rho2`.
pub(crate) fn alpha_box<T: Real>(rho2: f64, cfg: &SpaceConfig<T>) -> (T, T) {
    let rho: T = lit(rho2.sqrt());
    let two: T = lit(2.0);
    (rho * (two * cfg.hbar() * cfg.omega()).sqrt(), rho * (two * cfg.hbar() / cfg.omega()).sqrt())
}

/// Default quadrature for block-accurate integrals of `|p,q⟩⟨p,q|` against degree-`degree` symbols.
pub fn default_quadrature<T: Real>(fam: &CoherentFamily<T>, degree: usize) -> Result<PhaseQuadrature<T>> {
    let rows = fam.cfg().trusted_block() + fam.fiducial().support() + degree / 2;
    let rho2 = tail_radius2(rows, 1e-14);
    let (rp, rq) = alpha_box(rho2, fam.cfg());
    let n = default_nodes::<T>(lit(rho2), rows, degree);
    PhaseQuadrature::rectangle(rp, rq, n, n)
}

/// `Σ w_k f(label_k) |ψ_k⟩⟨ψ_k| / 2πħ` restricted to the leading `rows` x `rows` block.
///
/// Nodes are processed in fixed chunks and the chunk sums are combined in index order,
/// so the result does not depend on the worker count.
pub(crate) fn projector_sum<T, F>(
    fam: &CoherentFamily<T>,
    quad: &PhaseQuadrature<T>,
    rows: usize,
    f: F,
) -> DMatrix<C<T>>
where
    T: Real,
    F: Fn(&CoherentLabel<T>) -> C<T> + Sync,
{
    let nodes = quad.nodes();
    let chunk = (nodes.len() / 64).max(256);
    let norm = T::one() / (T::two_pi() * fam.cfg().hbar());
    let partials: Vec<DMatrix<C<T>>> = nodes
        .par_chunks(chunk)
        .map(|ch| {
            let mut acc = DMatrix::<C<T>>::zeros(rows, rows);
            for node in ch {
                let weight = f(&node.label) * (node.weight * norm);
                if weight.norm_sqr() == T::zero() {
                    continue;
                }
                let (p, q) = node.label.to_cartesian();
                let psi = fam.amplitudes(p, q, rows);
                acc.gerc(weight, &psi, &psi, real(T::one()));
            }
            acc
        })
        .collect();
    tree_sum(partials).unwrap_or_else(|| DMatrix::zeros(rows, rows))
}

pub(crate) fn tree_sum<T: Real>(mut items: Vec<DMatrix<C<T>>>) -> Option<DMatrix<C<T>>> {
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

/// `max |∫|p,q⟩⟨p,q| dμ − 𝟙|` on the leading D/2 block.
pub fn resolution_check<T: Real>(
    fid: &Fiducial<T>,
    gauge: &Gauge<T>,
    quad: &PhaseQuadrature<T>,
    cfg: &SpaceConfig<T>,
) -> Result<T> {
    let fam = CoherentFamily::new(cfg, fid.clone(), gauge.clone());
    let k = cfg.trusted_block();
    let s = projector_sum(&fam, quad, k, |_| real(T::one()));
    let mut worst = T::zero();
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((s[(i, j)] - real(target)).modulus());
        }
    }
    Ok(worst)
}

/// Largest `|𝒦(a; b) − ∫𝒦(a; l)𝒦(l; b) dμ(l)|` over the given label pairs (Gaussian fiducial).
pub fn reproducing_kernel_check<T: Real>(
    pairs: &[(CoherentLabel<T>, CoherentLabel<T>)],
    quad: &PhaseQuadrature<T>,
    cfg: &SpaceConfig<T>,
) -> Result<T> {
    let norm = T::one() / (T::two_pi() * cfg.hbar());
    let mut worst = T::zero();
    for (a, b) in pairs {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Invalid("labels must be finite".into()));
        }
        let direct = overlap_analytic(a, b, cfg);
        let mut acc = real(T::zero());
        for node in quad.nodes() {
            let w = node.weight * norm;
            acc += overlap_analytic(a, &node.label, cfg) * overlap_analytic(&node.label, b, cfg) * w;
        }
        worst = worst.max((acc - direct).modulus());
    }
    Ok(worst)
}
