//! One-forms and symmetric two-tensors from coherent-state differentials.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::coherent::{check_trusted, CoherentFamily, Fiducial, Gauge};
use crate::error::{Error, Result};
use crate::hilbert::{canonical_ops, SpaceConfig, StateVector};
use crate::scalar::{lit, to_f64, Real, C};
use crate::symbols::Grid2;

pub type FormFn<T> = Arc<dyn Fn(T, T) -> [T; 2] + Send + Sync>;
pub type TensorFn<T> = Arc<dyn Fn(T, T) -> Sym2<T> + Send + Sync>;

/// `θ = θ_p dp + θ_q dq` on a named chart.
#[derive(Clone)]
pub struct OneForm<T: Real> {
    chart: String,
    eval: FormFn<T>,
}

impl<T: Real> fmt::Debug for OneForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OneForm({})", self.chart)
    }
}

impl<T: Real> OneForm<T> {
    pub fn new(chart: &str, f: impl Fn(T, T) -> [T; 2] + Send + Sync + 'static) -> Self {
        Self { chart: chart.into(), eval: Arc::new(f) }
    }

    pub fn chart(&self) -> &str {
        &self.chart
    }

    /// `[θ_p, θ_q]`.
    pub fn at(&self, p: T, q: T) -> [T; 2] {
        (self.eval)(p, q)
    }

    pub fn tabulate(&self, grid: &Grid2<T>) -> Vec<[T; 2]> {
        grid.points().map(|(_, _, p, q)| self.at(p, q)).collect()
    }

    /// `∂_p θ_q − ∂_q θ_p` by fourth-order central differences with step `h`.
    pub fn exterior_derivative(&self, p: T, q: T, h: T) -> T {
        let d = |f: &dyn Fn(T) -> T| {
            let eight: T = lit(8.0);
            (f(-h - h) - eight * f(-h) + eight * f(h) - f(h + h)) / (lit::<T>(12.0) * h)
        };
        let dq_dp = d(&|s| self.at(p + s, q)[1]);
        let dp_dq = d(&|s| self.at(p, q + s)[0]);
        dq_dp - dp_dq
    }
}

/// `A dx² + B dx dy + C dy²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    /// Components `g_ij` (off-diagonal is `B/2`).
    pub fn matrix(&self) -> [[T; 2]; 2] {
        let h = self.b * lit(0.5);
        [[self.a, h], [h, self.c]]
    }

    pub fn from_matrix(m: [[T; 2]; 2]) -> Self {
        Self { a: m[0][0], b: m[0][1] + m[1][0], c: m[1][1] }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > T::zero() && lit::<T>(4.0) * self.a * self.c - self.b * self.b > T::zero()
    }

    pub fn max_distance(&self, o: &Self) -> T {
        (self.a - o.a).abs().max((self.b - o.b).abs()).max((self.c - o.c).abs())
    }
}

/// Symmetric two-tensor field on a named chart.
#[derive(Clone)]
pub struct MetricTensor<T: Real> {
    chart: String,
    eval: TensorFn<T>,
}

impl<T: Real> fmt::Debug for MetricTensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricTensor({})", self.chart)
    }
}

impl<T: Real> MetricTensor<T> {
    pub fn new(chart: &str, f: impl Fn(T, T) -> Sym2<T> + Send + Sync + 'static) -> Self {
        Self { chart: chart.into(), eval: Arc::new(f) }
    }

    pub fn constant(chart: &str, s: Sym2<T>) -> Self {
        Self::new(chart, move |_, _| s)
    }

    pub fn chart(&self) -> &str {
        &self.chart
    }

    pub fn at(&self, p: T, q: T) -> Sym2<T> {
        (self.eval)(p, q)
    }

    pub fn tabulate(&self, grid: &Grid2<T>) -> Vec<Sym2<T>> {
        grid.points().map(|(_, _, p, q)| self.at(p, q)).collect()
    }
}

pub(crate) const DEFAULT_STEP: f64 = 1e-4;

/// Central-difference derivatives of `|p,q⟩` at steps `δ` and `δ/2`.
struct Differentials<T: Real> {
    psi: DVector<C<T>>,
    coarse: [DVector<C<T>>; 2],
    fine: [DVector<C<T>>; 2],
}

fn differentials<T: Real>(fam: &CoherentFamily<T>, p: T, q: T, step: T) -> Differentials<T> {
    let d = fam.cfg().dim();
    let delta = step * T::one().max(p.abs().max(q.abs()));
    let two: T = lit(2.0);
    let amp = |a: T, b: T| fam.amplitudes(a, b, d);
    let cd = |h: T| -> [DVector<C<T>>; 2] {
        let s = C::new(T::one() / (two * h), T::zero());
        [(amp(p + h, q) - amp(p - h, q)) * s, (amp(p, q + h) - amp(p, q - h)) * s]
    };
    Differentials { psi: amp(p, q), coarse: cd(delta), fine: cd(delta * lit(0.5)) }
}

fn richardson<T: Real>(coarse: &DVector<C<T>>, fine: &DVector<C<T>>) -> DVector<C<T>> {
    let three = C::new(lit::<T>(3.0), T::zero());
    (fine * C::new(lit::<T>(4.0), T::zero()) - coarse) / three
}

fn theta_from<T: Real>(psi: &DVector<C<T>>, d: &[DVector<C<T>>; 2], hbar: T) -> [T; 2] {
    [-hbar * psi.dotc(&d[0]).im, -hbar * psi.dotc(&d[1]).im]
}

fn metric_from<T: Real>(psi: &DVector<C<T>>, d: &[DVector<C<T>>; 2], hbar: T) -> Sym2<T> {
    let g = |i: usize, j: usize| {
        let a = d[i].dotc(&d[j]);
        let b = d[i].dotc(psi) * psi.dotc(&d[j]);
        (a - b).re * lit::<T>(2.0) * hbar * hbar
    };
    Sym2 { a: g(0, 0), b: g(0, 1) * lit(2.0), c: g(1, 1) }
}

fn richardson_tol<T: Real>(scale: T) -> T {
    lit::<T>(1e-6) * T::one().max(scale)
}

/// `θ = iħ⟨p,q|d|p,q⟩` by finite differences, validated on `grid`.
pub fn canonical_one_form<T: Real>(
    fid: &Fiducial<T>,
    gauge: &Gauge<T>,
    cfg: &SpaceConfig<T>,
    grid: &Grid2<T>,
) -> Result<OneForm<T>> {
    canonical_one_form_with_step(fid, gauge, cfg, grid, lit(DEFAULT_STEP))
}

pub fn canonical_one_form_with_step<T: Real>(
    fid: &Fiducial<T>,
    gauge: &Gauge<T>,
    cfg: &SpaceConfig<T>,
    grid: &Grid2<T>,
    step: T,
) -> Result<OneForm<T>> {
    let fam = CoherentFamily::new(cfg, fid.clone(), gauge.clone());
    let hbar = cfg.hbar();
    for (_, _, p, q) in grid.points() {
        check_trusted(p, q, cfg)?;
        let d = differentials(&fam, p, q, step);
        let a = theta_from(&d.psi, &d.coarse, hbar);
        let b = theta_from(&d.psi, &d.fine, hbar);
        let gap = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
        if !(gap <= richardson_tol(a[0].abs().max(a[1].abs()))) {
            return Err(Error::Richardson(to_f64(gap)));
        }
    }
    Ok(OneForm::new("cartesian", move |p, q| {
        let d = differentials(&fam, p, q, step);
        let r = [richardson(&d.coarse[0], &d.fine[0]), richardson(&d.coarse[1], &d.fine[1])];
        theta_from(&d.psi, &r, hbar)
    }))
}

/// `dσ² = 2ħ²[‖d|p,q⟩‖² − |⟨p,q|d|p,q⟩|²]` with zero gauge.
pub fn fubini_study_metric<T: Real>(
    fid: &Fiducial<T>,
    cfg: &SpaceConfig<T>,
    grid: &Grid2<T>,
) -> Result<MetricTensor<T>> {
    fubini_study_metric_gauged(&CoherentFamily::new(cfg, fid.clone(), Gauge::Zero), grid, lit(DEFAULT_STEP))
}

pub fn fubini_study_metric_gauged<T: Real>(
    fam: &CoherentFamily<T>,
    grid: &Grid2<T>,
    step: T,
) -> Result<MetricTensor<T>> {
    let fam = fam.clone();
    let cfg = *fam.cfg();
    let hbar = cfg.hbar();
    for (_, _, p, q) in grid.points() {
        check_trusted(p, q, &cfg)?;
        let d = differentials(&fam, p, q, step);
        let a = metric_from(&d.psi, &d.coarse, hbar);
        let b = metric_from(&d.psi, &d.fine, hbar);
        let gap = a.max_distance(&b);
        if !(gap <= richardson_tol(a.a.abs().max(a.c.abs()))) {
            return Err(Error::Richardson(to_f64(gap)));
        }
        let r = [richardson(&d.coarse[0], &d.fine[0]), richardson(&d.coarse[1], &d.fine[1])];
        if !metric_from(&d.psi, &r, hbar).is_positive_definite() {
            return Err(Error::DegenerateMetric { p: to_f64(p), q: to_f64(q) });
        }
    }
    Ok(MetricTensor::new("cartesian", move |p, q| {
        let d = differentials(&fam, p, q, step);
        let r = [richardson(&d.coarse[0], &d.fine[0]), richardson(&d.coarse[1], &d.fine[1])];
        metric_from(&d.psi, &r, hbar)
    }))
}

/// Constant metric `2⟨(ΔQ)²⟩ dp² − 2⟨ΔPΔQ+ΔQΔP⟩ dp dq + 2⟨(ΔP)²⟩ dq²` from fiducial moments.
pub fn variance_metric<T: Real>(fid: &Fiducial<T>, cfg: &SpaceConfig<T>) -> Result<MetricTensor<T>> {
    let (p, q) = canonical_ops(cfg)?;
    let v: &StateVector<T> = fid.vec();
    let mp = v.expect(&p).re;
    let mq = v.expect(&q).re;
    let pv = p.apply(v);
    let qv = q.apply(v);
    let qq = qv.inner(&qv).re - mq * mq;
    let pp = pv.inner(&pv).re - mp * mp;
    // ⟨PQ + QP⟩ = 2 Re⟨Pv|Qv⟩.
    let sym = lit::<T>(2.0) * pv.inner(&qv).re - lit::<T>(2.0) * mp * mq;
    let two: T = lit(2.0);
    Ok(MetricTensor::constant("cartesian", Sym2 { a: two * qq, b: -two * sym, c: two * pp }))
}
