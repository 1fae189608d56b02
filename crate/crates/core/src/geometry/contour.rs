//! Enclosed symplectic area of energy contours and the Bohr–Sommerfeld rule.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::charts::{ChartDomain, CoordinateMap};
use crate::hilbert::SpaceConfig;
use crate::roots::brent;
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::symbols::SymbolFn;

pub const DEFAULT_RESOLUTION: usize = 512;

/// `∮ p dq` over `{h < E}` in the chart's coordinates (positive orientation).
pub fn loop_action<T: Real>(h: &SymbolFn<T>, e: T, chart: &CoordinateMap<T>) -> Result<T> {
    loop_action_with(h, e, chart, DEFAULT_RESOLUTION)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum EdgeKey {
    /// Between nodes (i, j) and (i + 1, j).
    X(usize, usize),
    /// Between nodes (i, j) and (i, j + 1).
    Y(usize, usize),
}

struct Lattice<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    periodic: bool,
    values: Vec<T>,
    ny: usize,
}

impl<T: Real> Lattice<T> {
    fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.ny + (j % self.ny)]
    }

    /// y coordinate of node index `j`, continued past the periodic seam.
    fn y(&self, j: usize) -> T {
        if j < self.ys.len() {
            self.ys[j]
        } else {
            self.ys[j % self.ny] + T::two_pi()
        }
    }
}

pub fn loop_action_with<T: Real>(h: &SymbolFn<T>, e: T, chart: &CoordinateMap<T>, resolution: usize) -> Result<T> {
    if !e.is_finite() {
        return Err(Error::Invalid("energy must be finite".into()));
    }
    let res = resolution.max(8);
    let inside = |x: T, y: T| h.eval(x, y) < e;
    let lattice = match chart.domain() {
        ChartDomain::Plane => {
            let Some(l) = plane_box(&inside)? else {
                return Ok(T::zero());
            };
            let xs: Vec<T> =
                (0..=res).map(|i| -l + lit::<T>(2.0) * l * from_usize::<T>(i) / from_usize::<T>(res)).collect();
            let ys = xs.clone();
            sample(h, xs, ys, false)
        }
        ChartDomain::Cylinder { min } => {
            let ring = |a: T| -> (bool, bool) {
                let mut any_in = false;
                let mut any_out = false;
                for k in 0..256 {
                    let y = -T::pi() + T::two_pi() * from_usize::<T>(k) / lit(256.0);
                    if inside(a, y) {
                        any_in = true;
                    } else {
                        any_out = true;
                    }
                }
                (any_in, any_out)
            };
            let (in0, out0) = ring(min);
            if in0 && out0 {
                return Err(Error::LevelSet("level set reaches the excluded disk of the chart".into()));
            }
            let mut top = min + T::one();
            let mut grew = 0;
            while ring(top).0 {
                top = min + (top - min) * lit(2.0);
                grew += 1;
                if grew > 60 {
                    return Err(Error::LevelSet("open or unbounded level set".into()));
                }
            }
            top = min + (top - min) * lit(1.05);
            let xs: Vec<T> = (0..=res).map(|i| min + (top - min) * from_usize::<T>(i) / from_usize::<T>(res)).collect();
            let ys: Vec<T> =
                (0..res).map(|j| -T::pi() + T::two_pi() * from_usize::<T>(j) / from_usize::<T>(res)).collect();
            // A region wrapping the excluded disk still has its full area in ∮ x dy.
            sample(h, xs, ys, true)
        }
    };
    trace_area(h, e, &lattice)
}

/// Half-width of an origin-centred square whose boundary lies outside `{h < E}`;
/// `None` when the region is empty at every scale tried.
fn plane_box<T: Real>(inside: &impl Fn(T, T) -> bool) -> Result<Option<T>> {
    let boundary_outside = |l: T| {
        (0..64).all(|k| {
            let t = -l + lit::<T>(2.0) * l * from_usize::<T>(k) / lit(63.0);
            !inside(t, -l) && !inside(t, l) && !inside(-l, t) && !inside(l, t)
        })
    };
    let mut l = T::one();
    if boundary_outside(l) {
        let probe = |l: T| {
            (0..=32).any(|i| {
                (0..=32).any(|j| {
                    let x = -l + lit::<T>(2.0) * l * from_usize::<T>(i) / lit(32.0);
                    let y = -l + lit::<T>(2.0) * l * from_usize::<T>(j) / lit(32.0);
                    inside(x, y)
                })
            })
        };
        if !probe(l) {
            return Ok(None);
        }
        while l > lit(1e-6) && boundary_outside(l * lit(0.5)) && probe(l * lit(0.5)) {
            l *= lit(0.5);
        }
    } else {
        let mut n = 0;
        while !boundary_outside(l) {
            l *= lit(2.0);
            n += 1;
            if n > 40 {
                return Err(Error::LevelSet("open or unbounded level set".into()));
            }
        }
    }
    Ok(Some(l * lit(1.05)))
}

fn sample<T: Real>(h: &SymbolFn<T>, xs: Vec<T>, ys: Vec<T>, periodic: bool) -> Lattice<T> {
    let ny = ys.len();
    let mut values = Vec::with_capacity(xs.len() * ny);
    for &x in &xs {
        for &y in &ys {
            values.push(h.eval(x, y));
        }
    }
    Lattice { xs, ys, periodic, values, ny }
}

fn edge_point<T: Real>(lat: &Lattice<T>, key: EdgeKey, e: T) -> (T, T) {
    let ((i0, j0), (i1, j1)) = match key {
        EdgeKey::X(i, j) => ((i, j), (i + 1, j)),
        EdgeKey::Y(i, j) => ((i, j), (i, j + 1)),
    };
    let f0 = lat.value(i0, j0);
    let f1 = lat.value(i1, j1);
    let t = if f1 != f0 { ((e - f0) / (f1 - f0)).max(T::zero()).min(T::one()) } else { lit(0.5) };
    let x0 = lat.xs[i0];
    let x1 = lat.xs[i1];
    let y0 = lat.y(j0);
    let y1 = lat.y(j1);
    (x0 + (x1 - x0) * t, y0 + (y1 - y0) * t)
}

fn project<T: Real>(h: &SymbolFn<T>, e: T, mut x: T, mut y: T, cell: T) -> (T, T) {
    let (x0, y0) = (x, y);
    for _ in 0..4 {
        let f = h.eval(x, y) - e;
        let (gx, gy) = h.gradient(x, y);
        let g2 = gx * gx + gy * gy;
        if g2 <= T::zero() {
            break;
        }
        let nx = x - f * gx / g2;
        let ny = y - f * gy / g2;
        if (nx - x0).abs() > cell || (ny - y0).abs() > cell {
            return (x0, y0);
        }
        x = nx;
        y = ny;
    }
    (x, y)
}

fn trace_area<T: Real>(h: &SymbolFn<T>, e: T, lat: &Lattice<T>) -> Result<T> {
    let nx = lat.xs.len();
    let ncy = if lat.periodic { lat.ny } else { lat.ny - 1 };
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ncy {
            let v = [lat.value(i, j), lat.value(i + 1, j), lat.value(i + 1, j + 1), lat.value(i, j + 1)];
            let ins = v.map(|f| f < e);
            // Edges: bottom, right, top, left.
            let top = if lat.periodic && j + 1 == lat.ny { 0 } else { j + 1 };
            let edges = [EdgeKey::X(i, j), EdgeKey::Y(i + 1, j), EdgeKey::X(i, top), EdgeKey::Y(i, j)];
            let crosses = [ins[0] != ins[1], ins[1] != ins[2], ins[3] != ins[2], ins[0] != ins[3]];
            let n = crosses.iter().filter(|&&c| c).count();
            if n == 2 {
                let idx: Vec<usize> = (0..4).filter(|&k| crosses[k]).collect();
                segments.push((edges[idx[0]], edges[idx[1]]));
            } else if n == 4 {
                let center_in = (v[0] + v[1] + v[2] + v[3]) * lit(0.25) < e;
                // Cut off the corners whose state differs from the centre.
                let corner_edges = [(3, 0), (0, 1), (1, 2), (2, 3)];
                for (k, &(a, b)) in corner_edges.iter().enumerate() {
                    if ins[k] != center_in {
                        segments.push((edges[a], edges[b]));
                    }
                }
            }
        }
    }
    if segments.is_empty() {
        return Ok(T::zero());
    }
    let cell = (lat.xs[1] - lat.xs[0]).abs().max((lat.y(1) - lat.y(0)).abs());
    let delta = |pa: (T, T), pb: (T, T)| {
        let mut dy = pb.1 - pa.1;
        if lat.periodic {
            if dy > T::pi() {
                dy -= T::two_pi();
            } else if dy < -T::pi() {
                dy += T::two_pi();
            }
        }
        (pb.0 - pa.0, dy)
    };
    let mut points: HashMap<EdgeKey, (T, T)> = HashMap::new();
    let mut point = |k: EdgeKey| -> (T, T) {
        *points.entry(k).or_insert_with(|| {
            let (x, y) = edge_point(lat, k, e);
            project(h, e, x, y, cell)
        })
    };
    // Orient each segment with {h < E} on its left.
    let mut directed: Vec<(EdgeKey, EdgeKey)> = Vec::with_capacity(segments.len());
    for (a, b) in segments {
        let pa = point(a);
        let pb = point(b);
        let (dx, dy) = delta(pa, pb);
        let (gx, gy) = h.gradient(pa.0 + dx * lit(0.5), pa.1 + dy * lit(0.5));
        if dy * gx - dx * gy >= T::zero() {
            directed.push((a, b));
        } else {
            directed.push((b, a));
        }
    }
    let mut next: HashMap<EdgeKey, usize> = HashMap::with_capacity(directed.len());
    for (k, (a, _)) in directed.iter().enumerate() {
        if next.insert(*a, k).is_some() {
            return Err(Error::LevelSet("ambiguous contour topology".into()));
        }
    }
    let mut used = vec![false; directed.len()];
    let mut total = T::zero();
    let twelve: T = lit(12.0);
    for start in 0..directed.len() {
        if used[start] {
            continue;
        }
        let mut k = start;
        loop {
            used[k] = true;
            let (a, b) = directed[k];
            let pa = point(a);
            let pb = point(b);
            let (dx, dy) = delta(pa, pb);
            total += (pa.0 + pb.0) * lit(0.5) * dy;
            // Area between chord and arc, from the level-set curvature at the midpoint.
            let mx = pa.0 + dx * lit(0.5);
            let my = pa.1 + dy * lit(0.5);
            let (gx, gy) = h.gradient(mx, my);
            let (hxx, hxy, hyy) = h.hessian(mx, my);
            let g = (gx * gx + gy * gy).sqrt();
            if g > T::zero() {
                let kappa = (hxx * gy * gy - lit::<T>(2.0) * gx * gy * hxy + hyy * gx * gx) / (g * g * g);
                let s = (dx * dx + dy * dy).sqrt();
                total += kappa * s * s * s / twelve;
            }
            match next.get(&b) {
                Some(&n) if n == start => break,
                Some(&n) if !used[n] => k = n,
                _ => return Err(Error::LevelSet("open level set: contour leaves the chart domain".into())),
            }
        }
    }
    Ok(total)
}

/// Energies with `∮ p dq = (n + ½) 2πħ` for `n = 0..=n_max` in Cartesian coordinates.
pub fn bohr_sommerfeld<T: Real>(h: &SymbolFn<T>, n_max: usize, cfg: &SpaceConfig<T>) -> Result<Vec<T>> {
    bohr_sommerfeld_in(h, n_max, cfg.hbar(), &CoordinateMap::cartesian())
}

pub fn bohr_sommerfeld_in<T: Real>(h: &SymbolFn<T>, n_max: usize, hbar: T, chart: &CoordinateMap<T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut lo: Option<T> = None;
    for n in 0..=n_max {
        let target = (from_usize::<T>(n) + lit(0.5)) * T::two_pi() * hbar;
        let f = |en: T| loop_action(h, en, chart).map(|a| a - target);
        let mut a = match lo {
            Some(v) => v,
            None => {
                let mut a = T::zero();
                let mut step = T::one();
                let mut k = 0;
                while f(a)? >= T::zero() {
                    a -= step;
                    step *= lit(2.0);
                    k += 1;
                    if k > 60 {
                        return Err(Error::NotBracketed { lo: to_f64(a), hi: 0.0 });
                    }
                }
                a
            }
        };
        let mut b = a.max(T::zero()) + T::one();
        let mut k = 0;
        while f(b)? <= T::zero() {
            let width = b - a;
            a = b;
            b += width * lit(2.0);
            k += 1;
            if k > 60 {
                return Err(Error::NotBracketed { lo: to_f64(a), hi: to_f64(b) });
            }
        }
        let xtol = lit::<T>(1e-12) * T::one().max(b.abs());
        let en = brent(f, a, b, xtol, 200)?;
        out.push(en);
        lo = Some(en);
    }
    Ok(out)
}
