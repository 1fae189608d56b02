//! Upper symbols, Toeplitz (anti-Wick) quantization and exact polynomial lower symbols.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::One;

use crate::coherent::{default_quadrature, projector_sum, CoherentFamily, CoherentLabel, Fiducial, Gauge};
use crate::error::{Error, Result};
use crate::hilbert::{Operator, SpaceConfig};
use crate::poly::{parse_planar, Coeff, PlanarPoly};
use crate::quadrature::PhaseQuadrature;
use crate::scalar::{lit, real, to_f64, Modulus, Real, C};

/// Growth declaration `|h(p,q)| ≤ c·e^{rate·(p²+q²)}` for closure symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth<T> {
    Polynomial { degree: u32 },
    Gaussian { rate: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2<T> {
    pub p: Vec<T>,
    pub q: Vec<T>,
}

impl<T: Real> Grid2<T> {
    pub fn uniform(p_range: (T, T), np: usize, q_range: (T, T), nq: usize) -> Result<Self> {
        Ok(Self { p: linspace(p_range.0, p_range.1, np)?, q: linspace(q_range.0, q_range.1, nq)? })
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize, T, T)> + '_ {
        self.p.iter().enumerate().flat_map(move |(i, &p)| self.q.iter().enumerate().map(move |(j, &q)| (i, j, p, q)))
    }

    pub fn len(&self) -> usize {
        self.p.len() * self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Result<Vec<T>> {
    if n == 0 || !(a.is_finite() && b.is_finite()) {
        return Err(Error::Invalid("grid axis needs finite bounds and at least one node".into()));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = (b - a) / nalgebra::convert::<f64, T>((n - 1) as f64);
    Ok((0..n).map(|i| a + step * nalgebra::convert::<f64, T>(i as f64)).collect())
}

/// Values on a rectangular grid; evaluation is bilinear inside and zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable<T: Real> {
    pub grid: Grid2<T>,
    /// Row-major in `p`: `values[i * q.len() + j]`.
    pub values: Vec<C<T>>,
}

impl<T: Real> SymbolTable<T> {
    pub fn at(&self, i: usize, j: usize) -> C<T> {
        self.values[i * self.grid.q.len() + j]
    }

    pub fn max_imag(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.im.abs()))
    }

    pub fn eval(&self, p: T, q: T) -> C<T> {
        let (Some((i, s)), Some((j, t))) = (locate(&self.grid.p, p), locate(&self.grid.q, q)) else {
            return real(T::zero());
        };
        let nq = self.grid.q.len();
        let v = |a: usize, b: usize| self.values[a * nq + b];
        let i1 = (i + 1).min(self.grid.p.len() - 1);
        let j1 = (j + 1).min(nq - 1);
        let one = T::one();
        v(i, j) * ((one - s) * (one - t))
            + v(i1, j) * (s * (one - t))
            + v(i, j1) * ((one - s) * t)
            + v(i1, j1) * (s * t)
    }
}

fn locate<T: Real>(axis: &[T], x: T) -> Option<(usize, T)> {
    let n = axis.len();
    if n == 1 {
        return (x == axis[0]).then_some((0, T::zero()));
    }
    if x < axis[0] || x > axis[n - 1] {
        return None;
    }
    let k = axis.partition_point(|&a| a <= x).saturating_sub(1).min(n - 2);
    let s = (x - axis[k]) / (axis[k + 1] - axis[k]);
    Some((k, s))
}

pub type SymbolClosure<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// A function on phase space: polynomial, tabulated, or a closure with declared growth.
#[derive(Clone)]
pub enum SymbolFn<T: Real> {
    Poly(PlanarPoly<T>),
    Table(SymbolTable<T>),
    Func { f: SymbolClosure<T>, growth: Option<Growth<T>> },
}

impl<T: Real> fmt::Debug for SymbolFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolFn::Poly(p) => write!(f, "SymbolFn::Poly({p:?})"),
            SymbolFn::Table(t) => write!(f, "SymbolFn::Table({}x{})", t.grid.p.len(), t.grid.q.len()),
            SymbolFn::Func { growth, .. } => write!(f, "SymbolFn::Func(growth={growth:?})"),
        }
    }
}

impl<T: Real> SymbolFn<T> {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(SymbolFn::Poly(parse_planar(text)?.to_real()))
    }

    pub fn constant(c: T) -> Self {
        SymbolFn::Poly(PlanarPoly::constant(c))
    }

    pub fn func(f: impl Fn(T, T) -> T + Send + Sync + 'static, growth: Option<Growth<T>>) -> Self {
        SymbolFn::Func { f: Arc::new(f), growth }
    }

    pub fn as_poly(&self) -> Option<&PlanarPoly<T>> {
        match self {
            SymbolFn::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            SymbolFn::Table(t) => t.max_imag() == T::zero(),
            _ => true,
        }
    }

    pub fn eval_complex(&self, p: T, q: T) -> C<T> {
        match self {
            SymbolFn::Table(t) => t.eval(p, q),
            _ => real(self.eval(p, q)),
        }
    }

    /// Real part of the value.
    pub fn eval(&self, p: T, q: T) -> T {
        match self {
            SymbolFn::Poly(h) => h.eval([p, q]),
            SymbolFn::Table(t) => t.eval(p, q).re,
            SymbolFn::Func { f, .. } => f(p, q),
        }
    }

    pub fn gradient(&self, p: T, q: T) -> (T, T) {
        match self {
            SymbolFn::Poly(h) => (h.derivative(0).eval([p, q]), h.derivative(1).eval([p, q])),
            _ => {
                let d = fd_step(p, q);
                let two: T = lit(2.0);
                (
                    (self.eval(p + d, q) - self.eval(p - d, q)) / (two * d),
                    (self.eval(p, q + d) - self.eval(p, q - d)) / (two * d),
                )
            }
        }
    }

    /// `(h_pp, h_pq, h_qq)`.
    pub fn hessian(&self, p: T, q: T) -> (T, T, T) {
        match self {
            SymbolFn::Poly(h) => {
                let hp = h.derivative(0);
                let hq = h.derivative(1);
                (hp.derivative(0).eval([p, q]), hp.derivative(1).eval([p, q]), hq.derivative(1).eval([p, q]))
            }
            _ => {
                let d = fd_step(p, q) * lit(10.0);
                let f = |a: T, b: T| self.eval(a, b);
                let c = f(p, q);
                let two: T = lit(2.0);
                let four: T = lit(4.0);
                let hpp = (f(p + d, q) - two * c + f(p - d, q)) / (d * d);
                let hqq = (f(p, q + d) - two * c + f(p, q - d)) / (d * d);
                let hpq = (f(p + d, q + d) - f(p + d, q - d) - f(p - d, q + d) + f(p - d, q - d)) / (four * d * d);
                (hpp, hpq, hqq)
            }
        }
    }
}

fn fd_step<T: Real>(p: T, q: T) -> T {
    let scale = T::one().max(p.abs()).max(q.abs());
    T::default_epsilon().cbrt() * scale
}

/// `H(p,q) = ⟨p,q|H|p,q⟩` tabulated on a grid inside the trusted radius.
pub fn upper_symbol<T: Real>(
    h: &Operator<T>,
    fid: &Fiducial<T>,
    grid: &Grid2<T>,
    cfg: &SpaceConfig<T>,
) -> Result<SymbolFn<T>> {
    if h.dim() != cfg.dim() {
        return Err(Error::Invalid("operator dimension does not match configuration".into()));
    }
    let fam = CoherentFamily::new(cfg, fid.clone(), Gauge::Zero);
    let mut values = Vec::with_capacity(grid.len());
    for (_, _, p, q) in grid.points() {
        let psi = fam.state(&CoherentLabel::cartesian(p, q))?;
        values.push(psi.expect(h));
    }
    Ok(SymbolFn::Table(SymbolTable { grid: grid.clone(), values }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionsReport {
    pub cond1: bool,
    pub cond2: bool,
    /// Condition (1) fails for every damping `A` below this value.
    pub cond1_fails_below: Option<f64>,
    /// Member of the semibounded-polynomial whitelist.
    pub semibounded_polynomial: bool,
}

/// Square-integrability conditions against Gaussian damping.
pub fn conditions_check<T: Real>(h: &SymbolFn<T>) -> Result<ConditionsReport> {
    match h {
        SymbolFn::Poly(poly) => Ok(ConditionsReport {
            cond1: true,
            cond2: true,
            cond1_fails_below: None,
            semibounded_polynomial: is_semibounded_polynomial(poly),
        }),
        SymbolFn::Table(_) => {
            Ok(ConditionsReport { cond1: true, cond2: true, cond1_fails_below: None, semibounded_polynomial: false })
        }
        SymbolFn::Func { growth, .. } => match growth {
            None => Err(Error::Inadmissible("closure symbol without a growth declaration".into())),
            Some(Growth::Polynomial { .. }) => Ok(ConditionsReport {
                cond1: true,
                cond2: true,
                cond1_fails_below: None,
                semibounded_polynomial: false,
            }),
            Some(Growth::Gaussian { rate }) => {
                let k = to_f64(*rate);
                // h² e^{-A r²} needs A > 2k for every A > 0; h⁴ e^{-B r²} needs 4k < B < 1/2.
                Ok(ConditionsReport {
                    cond1: k <= 0.0,
                    cond2: k < 0.125,
                    cond1_fails_below: (k > 0.0).then_some(2.0 * k),
                    semibounded_polynomial: false,
                })
            }
        },
    }
}

/// Newton-polygon test: `h` or `−h` is dominated at infinity by even monomials with
/// positive coefficients. Sufficient (not necessary) for semiboundedness.
pub fn is_semibounded_polynomial<T: Real>(h: &PlanarPoly<T>) -> bool {
    let pts: Vec<([i64; 2], T)> = h.terms().map(|(e, c)| ([e[0] as i64, e[1] as i64], *c)).collect();
    dominated(&pts, T::one()) || dominated(&pts, -T::one())
}

fn dominated<T: Real>(pts: &[([i64; 2], T)], sign: T) -> bool {
    let mut cloud: Vec<[i64; 2]> = pts.iter().map(|(e, _)| *e).collect();
    cloud.push([0, 0]);
    let hull = convex_hull(&cloud);
    let coeff = |e: [i64; 2]| pts.iter().find(|(x, _)| *x == e).map(|(_, c)| *c * sign);
    let even = |e: [i64; 2]| e[0] % 2 == 0 && e[1] % 2 == 0;
    for v in &hull {
        if *v == [0, 0] {
            continue;
        }
        match coeff(*v) {
            Some(c) if even(*v) && c > T::zero() => {}
            _ => return false,
        }
    }
    let m = hull.len();
    for (e, _) in pts {
        if hull.contains(e) {
            continue;
        }
        for k in 0..m {
            let (a, b) = (hull[k], hull[(k + 1) % m]);
            if a == [0, 0] || b == [0, 0] {
                continue;
            }
            if on_segment(a, b, *e) {
                match coeff(*e) {
                    Some(c) if even(*e) && c >= T::zero() => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

fn cross(o: [i64; 2], a: [i64; 2], b: [i64; 2]) -> i64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(a: [i64; 2], b: [i64; 2], x: [i64; 2]) -> bool {
    cross(a, b, x) == 0
        && x[0] >= a[0].min(b[0])
        && x[0] <= a[0].max(b[0])
        && x[1] >= a[1].min(b[1])
        && x[1] <= a[1].max(b[1])
}

/// Strict convex hull vertices in counter-clockwise order.
fn convex_hull(points: &[[i64; 2]]) -> Vec<[i64; 2]> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<[i64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[i64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// `∫ h |p,q⟩⟨p,q| dμ` on a given node set. `h` is evaluated in each node's chart.
pub fn toeplitz_quantize<T: Real>(
    h: &SymbolFn<T>,
    fid: &Fiducial<T>,
    quad: &PhaseQuadrature<T>,
    cfg: &SpaceConfig<T>,
) -> Result<Operator<T>> {
    let report = conditions_check(h)?;
    if !(report.cond1 && report.cond2) {
        return Err(Error::Inadmissible(format!(
            "growth violates the square-integrability conditions (cond1={}, cond2={})",
            report.cond1, report.cond2
        )));
    }
    let fam = CoherentFamily::new(cfg, fid.clone(), Gauge::Zero);
    let m = projector_sum(&fam, quad, cfg.dim(), |l| h.eval_complex(l.p, l.q));
    if h.is_real() {
        Operator::hermitian(m)
    } else {
        Operator::new(m)
    }
}

fn symbol_degree<T: Real>(h: &SymbolFn<T>) -> usize {
    match h {
        SymbolFn::Poly(p) => p.degree() as usize,
        SymbolFn::Func { growth: Some(Growth::Polynomial { degree }), .. } => *degree as usize,
        _ => 0,
    }
}

/// Toeplitz quantization on an automatically sized Cartesian rule, verified by one refinement.
pub fn toeplitz_quantize_auto<T: Real>(
    h: &SymbolFn<T>,
    fid: &Fiducial<T>,
    cfg: &SpaceConfig<T>,
) -> Result<Operator<T>> {
    let fam = CoherentFamily::new(cfg, fid.clone(), Gauge::Zero);
    let deg = symbol_degree(h);
    let coarse = default_quadrature(&fam, deg)?;
    let a = toeplitz_quantize(h, fid, &coarse, cfg)?;
    let n = (coarse.len() as f64).sqrt().round() as usize;
    let node = coarse.nodes().last().expect("non-empty rule").label;
    // Finer and 10% wider than the default rule.
    let grow: T = lit(1.1);
    let m = n + n / 4 + 2;
    let fine = PhaseQuadrature::rectangle(node.p.abs() * grow, node.q.abs() * grow, m, m)?;
    let b = toeplitz_quantize(h, fid, &fine, cfg)?;
    let k = cfg.trusted_block();
    let scale = T::one().max(a.block(k).iter().fold(T::zero(), |m, z| m.max(z.modulus())));
    let dev = a.block_distance(&b, k);
    if dev > lit::<T>(1e-6) * scale {
        return Err(Error::Quadrature(format!(
            "Toeplitz quadrature not converged: refinement moved the block by {:e}",
            to_f64(dev)
        )));
    }
    Ok(b)
}

/// `exp(σ·[(ħΩ/2)∂²_p + (ħ/2Ω)∂²_q]) h` as a terminating series; `σ = +1` smooths, `σ = −1` inverts.
pub fn heat_flow<C: Coeff>(h: &PlanarPoly<C>, hbar: &C, omega: &C, sign: i32) -> PlanarPoly<C> {
    let two = C::one() + C::one();
    let ap = hbar.clone() * omega.clone() / two.clone();
    let aq = hbar.clone() / (two * omega.clone());
    let mut out = h.clone();
    let mut term = h.clone();
    let mut k: u32 = 0;
    loop {
        k += 1;
        let lap = &term.derivative(0).derivative(0).scale(&ap) + &term.derivative(1).derivative(1).scale(&aq);
        if lap.is_zero() {
            break;
        }
        let mut f = C::one() / C::from_u32(k).expect("small integer");
        if sign < 0 {
            f = -f;
        }
        term = lap.scale(&f);
        out = &out + &term;
    }
    out
}

/// Exact upper symbol of `toeplitz(h)` for the Gaussian fiducial.
pub fn upper_of_toeplitz_poly<C: Coeff>(h: &PlanarPoly<C>, hbar: &C, omega: &C) -> PlanarPoly<C> {
    heat_flow(h, hbar, omega, 1)
}

/// Canonical operator letter in an ordered word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canon {
    P,
    Q,
}

/// Explicitly ordered polynomial `Σ c_k · X_{k1} X_{k2} ⋯` in `P` and `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedPoly<C> {
    pub terms: Vec<(C, Vec<Canon>)>,
}

impl<C: Coeff> OrderedPoly<C> {
    pub fn new(terms: Vec<(C, Vec<Canon>)>) -> Self {
        Self { terms }
    }

    /// Word read left to right, e.g. `"PQQP"`.
    pub fn word(c: C, w: &str) -> Result<Self> {
        let letters = w
            .chars()
            .map(|ch| match ch {
                'P' => Ok(Canon::P),
                'Q' => Ok(Canon::Q),
                _ => Err(Error::Invalid(format!("unknown operator letter '{ch}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms: vec![(c, letters)] })
    }

    pub fn plus(mut self, other: Self) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Matrix of the ordered product on the truncated basis.
    pub fn to_operator<T: Real>(&self, cfg: &SpaceConfig<T>, coeff: impl Fn(&C) -> T) -> Result<Operator<T>> {
        let (p, q) = crate::hilbert::canonical_ops(cfg)?;
        let mut acc = Operator::zeros(cfg.dim());
        for (c, w) in &self.terms {
            let mut m = Operator::identity(cfg.dim());
            for l in w {
                m = m.compose(if *l == Canon::P { &p } else { &q });
            }
            acc = acc.add(&m.scale(coeff(c)));
        }
        Ok(acc)
    }
}

/// Exact upper symbol `⟨p,q|𝓗|p,q⟩` of an ordered polynomial for the Gaussian fiducial.
/// Errors if the result is not real (non-hermitian ordering).
pub fn upper_symbol_poly<C: Coeff>(op: &OrderedPoly<C>, hbar: &C, omega: &C) -> Result<PlanarPoly<C>> {
    let two = C::one() + C::one();
    let qq = hbar.clone() / (two.clone() * omega.clone());
    let pp = hbar.clone() * omega.clone() / two.clone();
    let half_h = hbar.clone() / two;
    let contraction = |a: Canon, b: Canon| -> Complex<C> {
        match (a, b) {
            (Canon::Q, Canon::Q) => Complex::new(qq.clone(), C::zero()),
            (Canon::P, Canon::P) => Complex::new(pp.clone(), C::zero()),
            (Canon::Q, Canon::P) => Complex::new(C::zero(), half_h.clone()),
            (Canon::P, Canon::Q) => Complex::new(C::zero(), -half_h.clone()),
        }
    };
    let mut total: PlanarPoly<Complex<C>> = PlanarPoly::zero();
    for (c, w) in &op.terms {
        let e = wick(w, &contraction);
        total = &total + &e.scale(&Complex::new(c.clone(), C::zero()));
    }
    if total.terms().any(|(_, z)| !z.im.is_zero()) {
        return Err(Error::Invalid("ordered polynomial is not hermitian: upper symbol has an imaginary part".into()));
    }
    Ok(total.map_coeffs(|z| z.re.clone()))
}

fn wick<C: Coeff>(word: &[Canon], contraction: &impl Fn(Canon, Canon) -> Complex<C>) -> PlanarPoly<Complex<C>> {
    if word.is_empty() {
        return PlanarPoly::constant(Complex::one());
    }
    let first = word[0];
    let rest = &word[1..];
    let var = PlanarPoly::var(if first == Canon::P { 0 } else { 1 });
    let mut out = &var * &wick(rest, contraction);
    for j in 0..rest.len() {
        let mut remaining = rest.to_vec();
        remaining.remove(j);
        let sub = wick(&remaining, contraction);
        out = &out + &sub.scale(&contraction(first, rest[j]));
    }
    out
}

/// Target of lower-symbol deconvolution.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolTarget<C: Coeff> {
    /// Upper symbol as a polynomial in `(p, q)`.
    Upper(PlanarPoly<C>),
    /// Ordered operator polynomial in `(P, Q)`.
    Ordered(OrderedPoly<C>),
}

/// Polynomial `h` with `toeplitz(h)` equal to the target (Gaussian fiducial).
pub fn lower_symbol_poly<C: Coeff>(target: &SymbolTarget<C>, hbar: &C, omega: &C) -> Result<PlanarPoly<C>> {
    let upper = match target {
        SymbolTarget::Upper(u) => u.clone(),
        SymbolTarget::Ordered(op) => upper_symbol_poly(op, hbar, omega)?,
    };
    Ok(heat_flow(&upper, hbar, omega, -1))
}

/// Lower symbol of an upper symbol given as a `SymbolFn`; only polynomials are supported.
pub fn lower_symbol<T: Real>(upper: &SymbolFn<T>, cfg: &SpaceConfig<T>) -> Result<SymbolFn<T>> {
    match upper {
        SymbolFn::Poly(p) => Ok(SymbolFn::Poly(heat_flow(p, &cfg.hbar(), &cfg.omega(), -1))),
        _ => Err(Error::Unsupported("lower symbols are only available for polynomial input".into())),
    }
}
