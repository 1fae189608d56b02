//! Coordinate maps on phase space and pushforward of symbols, one-forms and metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::forms::{MetricTensor, OneForm, Sym2};
use crate::scalar::{lit, to_f64, Real};
use crate::symbols::{Growth, SymbolFn};

pub type PointMap<T> = Arc<dyn Fn(T, T) -> (T, T) + Send + Sync>;
pub type JacobianFn<T> = Arc<dyn Fn(T, T) -> [[T; 2]; 2] + Send + Sync>;
pub type ScalarFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Shape of a chart's coordinate domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartDomain<T> {
    Plane,
    /// First coordinate `≥ min`, second coordinate periodic with period 2π on (−π, π].
    Cylinder {
        min: T,
    },
}

/// Invertible map `(p, q) ↦ (p̄, q̄)` from Cartesian coordinates to chart coordinates.
#[derive(Clone)]
pub struct CoordinateMap<T: Real> {
    name: String,
    forward: PointMap<T>,
    inverse: PointMap<T>,
    jacobian: JacobianFn<T>,
    generating: Option<ScalarFn<T>>,
    canonical: bool,
    domain: ChartDomain<T>,
}

impl<T: Real> fmt::Debug for CoordinateMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoordinateMap")
            .field("name", &self.name)
            .field("canonical", &self.canonical)
            .field("domain", &self.domain)
            .finish()
    }
}

fn canonical_probe<T: Real>(jac: &JacobianFn<T>, domain: ChartDomain<T>, inverse: &PointMap<T>) -> bool {
    // Fixed probe points in chart coordinates, mapped back to the source.
    let pts: [(f64, f64); 8] =
        [(0.3, 0.7), (-1.2, 0.4), (2.0, -1.5), (0.9, 2.6), (-0.4, -2.2), (1.7, 1.1), (3.1, -0.2), (0.05, 0.5)];
    pts.iter().all(|&(a, b)| {
        let (a, b) = match domain {
            ChartDomain::Plane => (lit::<T>(a), lit::<T>(b)),
            ChartDomain::Cylinder { min } => (min + lit::<T>(a.abs() + 0.1), lit::<T>(b)),
        };
        let (p, q) = inverse(a, b);
        let j = jac(p, q);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        (det - T::one()).abs() <= lit(1e-8)
    })
}

impl<T: Real> CoordinateMap<T> {
    pub fn cartesian() -> Self {
        Self {
            name: "cartesian".into(),
            forward: Arc::new(|p, q| (p, q)),
            inverse: Arc::new(|a, b| (a, b)),
            jacobian: Arc::new(|_, _| [[T::one(), T::zero()], [T::zero(), T::one()]]),
            generating: Some(Arc::new(|_, _| T::zero())),
            canonical: true,
            domain: ChartDomain::Plane,
        }
    }

    /// `p̃ = (p²+q²)/2`, `q̃ = atan2(q, p)`; excludes `p̃ < 1e−3`.
    pub fn action_angle() -> Self {
        let half: T = lit(0.5);
        Self {
            name: "action-angle".into(),
            forward: Arc::new(move |p, q| ((p * p + q * q) * half, q.atan2(p))),
            inverse: Arc::new(|a, b| {
                let r = (lit::<T>(2.0) * a).sqrt();
                (r * b.cos(), r * b.sin())
            }),
            jacobian: Arc::new(|p, q| {
                let r2 = p * p + q * q;
                [[p, q], [-q / r2, p / r2]]
            }),
            generating: Some(Arc::new(move |p, q| -p * q * half)),
            canonical: true,
            domain: ChartDomain::Cylinder { min: lit(1e-3) },
        }
    }

    /// `p̄ = (p+q)/√2`, `q̄ = (q−p)/√2`.
    pub fn rotation45() -> Self {
        let s = T::FRAC_1_SQRT_2();
        let quarter: T = lit(0.25);
        let half: T = lit(0.5);
        Self {
            name: "rotation-45".into(),
            forward: Arc::new(move |p, q| ((p + q) * s, (q - p) * s)),
            inverse: Arc::new(move |a, b| ((a - b) * s, (a + b) * s)),
            jacobian: Arc::new(move |_, _| [[s, s], [-s, s]]),
            generating: Some(Arc::new(move |p, q| (q * q - p * p) * quarter - p * q * half)),
            canonical: true,
            domain: ChartDomain::Plane,
        }
    }

    /// User-defined planar chart; the Jacobian is taken by central differences and the
    /// canonical flag is decided by probing the determinant.
    pub fn custom(
        name: &str,
        forward: impl Fn(T, T) -> (T, T) + Send + Sync + 'static,
        inverse: impl Fn(T, T) -> (T, T) + Send + Sync + 'static,
    ) -> Self {
        let forward: PointMap<T> = Arc::new(forward);
        let inverse: PointMap<T> = Arc::new(inverse);
        let fw = forward.clone();
        let jacobian: JacobianFn<T> = Arc::new(move |p, q| {
            let h = T::default_epsilon().cbrt() * T::one().max(p.abs()).max(q.abs());
            let two: T = lit(2.0);
            let (a1, b1) = fw(p + h, q);
            let (a0, b0) = fw(p - h, q);
            let (a3, b3) = fw(p, q + h);
            let (a2, b2) = fw(p, q - h);
            [[(a1 - a0) / (two * h), (a3 - a2) / (two * h)], [(b1 - b0) / (two * h), (b3 - b2) / (two * h)]]
        });
        let canonical = canonical_probe(&jacobian, ChartDomain::Plane, &inverse);
        Self { name: name.into(), forward, inverse, jacobian, generating: None, canonical, domain: ChartDomain::Plane }
    }

    pub fn with_generating_function(mut self, f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        self.generating = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn forward(&self, p: T, q: T) -> (T, T) {
        (self.forward)(p, q)
    }

    pub fn inverse(&self, a: T, b: T) -> (T, T) {
        (self.inverse)(a, b)
    }

    /// `∂(p̄, q̄)/∂(p, q)` at a source point.
    pub fn jacobian(&self, p: T, q: T) -> [[T; 2]; 2] {
        (self.jacobian)(p, q)
    }

    pub fn jacobian_det(&self, p: T, q: T) -> T {
        let j = self.jacobian(p, q);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn domain(&self) -> ChartDomain<T> {
        self.domain
    }

    /// `F` with `p̄ dq̄ = p dq + dF`, as a function of the source point.
    pub fn generating_function(&self, p: T, q: T) -> Option<T> {
        self.generating.as_ref().map(|f| f(p, q))
    }

    pub fn check_chart_point(&self, a: T, b: T) -> Result<()> {
        let ok = a.is_finite()
            && b.is_finite()
            && match self.domain {
                ChartDomain::Plane => true,
                ChartDomain::Cylinder { min } => a >= min,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::ChartDomain { p: to_f64(a), q: to_f64(b) })
        }
    }

    /// `∂(p, q)/∂(p̄, q̄)` at a chart point.
    pub fn inverse_jacobian(&self, a: T, b: T) -> [[T; 2]; 2] {
        let (p, q) = self.inverse(a, b);
        let j = self.jacobian(p, q);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]]
    }
}

/// Named charts selectable at run time.
#[derive(Clone, Debug)]
pub struct ChartRegistry<T: Real> {
    maps: BTreeMap<String, CoordinateMap<T>>,
}

impl<T: Real> Default for ChartRegistry<T> {
    fn default() -> Self {
        let mut maps = BTreeMap::new();
        for m in [CoordinateMap::cartesian(), CoordinateMap::action_angle(), CoordinateMap::rotation45()] {
            maps.insert(m.name().to_string(), m);
        }
        Self { maps }
    }
}

impl<T: Real> ChartRegistry<T> {
    pub fn register(&mut self, map: CoordinateMap<T>) {
        self.maps.insert(map.name().to_string(), map);
    }

    pub fn get(&self, name: &str) -> Result<&CoordinateMap<T>> {
        self.maps.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.maps.keys().map(|s| s.as_str()).collect();
            Error::Invalid(format!("unknown chart '{name}' (known: {})", known.join(", ")))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.maps.keys().map(|s| s.as_str())
    }
}

/// Expresses a Cartesian-chart object in the coordinates of a map.
pub trait Pushforward<T: Real>: Sized {
    fn pushforward(&self, map: &CoordinateMap<T>) -> Result<Self>;
}

impl<T: Real> Pushforward<T> for SymbolFn<T> {
    fn pushforward(&self, map: &CoordinateMap<T>) -> Result<Self> {
        if map.name() == "cartesian" {
            return Ok(self.clone());
        }
        let growth = match self {
            SymbolFn::Poly(p) => Some(Growth::Polynomial { degree: p.degree() }),
            SymbolFn::Func { growth, .. } => *growth,
            SymbolFn::Table(_) => None,
        };
        let h = self.clone();
        let inv = map.inverse.clone();
        Ok(SymbolFn::func(
            move |a, b| {
                let (p, q) = inv(a, b);
                h.eval(p, q)
            },
            growth,
        ))
    }
}

impl<T: Real> Pushforward<T> for OneForm<T> {
    fn pushforward(&self, map: &CoordinateMap<T>) -> Result<Self> {
        if map.name() == "cartesian" {
            return Ok(self.clone());
        }
        let src = self.clone();
        let m = map.clone();
        Ok(OneForm::new(map.name(), move |a, b| {
            let (p, q) = m.inverse(a, b);
            let th = src.at(p, q);
            let ji = m.inverse_jacobian(a, b);
            [th[0] * ji[0][0] + th[1] * ji[1][0], th[0] * ji[0][1] + th[1] * ji[1][1]]
        }))
    }
}

impl<T: Real> Pushforward<T> for MetricTensor<T> {
    fn pushforward(&self, map: &CoordinateMap<T>) -> Result<Self> {
        if map.name() == "cartesian" {
            return Ok(self.clone());
        }
        let src = self.clone();
        let m = map.clone();
        Ok(MetricTensor::new(map.name(), move |a, b| {
            let (p, q) = m.inverse(a, b);
            let g = src.at(p, q).matrix();
            let ji = m.inverse_jacobian(a, b);
            let mut out = [[T::zero(); 2]; 2];
            for (r, row) in out.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    let mut s = T::zero();
                    for i in 0..2 {
                        for j in 0..2 {
                            s += ji[i][r] * g[i][j] * ji[j][c];
                        }
                    }
                    *v = s;
                }
            }
            Sym2::from_matrix(out)
        }))
    }
}
