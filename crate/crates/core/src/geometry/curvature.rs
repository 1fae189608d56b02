use crate::error::{Error, Result};
use crate::geometry::forms::MetricTensor;
use crate::scalar::{lit, to_f64, Real};

/// Gaussian curvature by the Brioschi formula with fourth-order central differences.
pub fn gaussian_curvature<T: Real>(m: &MetricTensor<T>, p: T, q: T) -> Result<T> {
    gaussian_curvature_with_step(m, p, q, lit(1e-2))
}

pub fn gaussian_curvature_with_step<T: Real>(m: &MetricTensor<T>, u: T, v: T, h: T) -> Result<T> {
    let half: T = lit(0.5);
    let comps = |a: T, b: T| {
        let s = m.at(a, b);
        [s.a, s.b * half, s.c]
    };
    let c0 = comps(u, v);
    let (e, f, g) = (c0[0], c0[1], c0[2]);
    let det = e * g - f * f;
    if !(det > T::zero()) || !(e > T::zero()) {
        return Err(Error::DegenerateMetric { p: to_f64(u), q: to_f64(v) });
    }
    let w1 = [lit::<T>(1.0), lit(-8.0), lit(8.0), lit(-1.0)];
    let o1 = [lit::<T>(-2.0), lit(-1.0), lit(1.0), lit(2.0)];
    let d1 = |fun: &dyn Fn(T) -> [T; 3]| {
        let mut acc = [T::zero(); 3];
        for (w, o) in w1.iter().zip(&o1) {
            let val = fun(*o * h);
            for k in 0..3 {
                acc[k] += *w * val[k];
            }
        }
        acc.map(|x| x / (lit::<T>(12.0) * h))
    };
    let w2 = [lit::<T>(-1.0), lit(16.0), lit(-30.0), lit(16.0), lit(-1.0)];
    let o2 = [lit::<T>(-2.0), lit(-1.0), lit(0.0), lit(1.0), lit(2.0)];
    let d2 = |fun: &dyn Fn(T) -> [T; 3]| {
        let mut acc = [T::zero(); 3];
        for (w, o) in w2.iter().zip(&o2) {
            let val = fun(*o * h);
            for k in 0..3 {
                acc[k] += *w * val[k];
            }
        }
        acc.map(|x| x / (lit::<T>(12.0) * h * h))
    };
    let du = d1(&|s| comps(u + s, v));
    let dv = d1(&|s| comps(u, v + s));
    let duu = d2(&|s| comps(u + s, v));
    let dvv = d2(&|s| comps(u, v + s));
    let duv = d1(&|s| d1(&|t| comps(u + s, v + t)));
    let (eu, fu, gu) = (du[0], du[1], du[2]);
    let (ev, fv, gv) = (dv[0], dv[1], dv[2]);
    let evv = dvv[0];
    let guu = duu[2];
    let fuv = duv[1];
    let det3 = |m: [[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m1 = [[-half * evv + fuv - half * guu, half * eu, fu - half * ev], [fv - half * gu, e, f], [half * gv, f, g]];
    let m2 = [[T::zero(), half * ev, half * gu], [half * ev, e, f], [half * gu, f, g]];
    Ok((det3(m1) - det3(m2)) / (det * det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::forms::Sym2;

    #[test]
    fn constant_metric_is_flat() {
        let m = MetricTensor::constant("cartesian", Sym2::new(2.0f64, 0.3, 1.5));
        assert!(gaussian_curvature(&m, 0.4, -0.2).unwrap().abs() < 1e-20);
    }

    #[test]
    fn sphere_curvature() {
        let s = 3.0f64;
        let m = MetricTensor::new("sphere", move |th: f64, _| Sym2::new(s, 0.0, s * th.sin().powi(2)));
        let k = gaussian_curvature(&m, 1.0, 0.0).unwrap();
        assert!((k - 1.0 / s).abs() < 1e-6, "{k}");
    }

    #[test]
    fn degenerate_rejected() {
        let m = MetricTensor::constant("cartesian", Sym2::new(1.0f64, 2.0, 1.0));
        assert!(gaussian_curvature(&m, 0.0, 0.0).is_err());
    }
}
