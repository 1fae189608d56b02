use coherent_quant::coherent::*;
use coherent_quant::geometry::CoordinateMap;
use coherent_quant::hilbert::*;
use coherent_quant::pathint::sample_bridge;
use coherent_quant::poly::{parse_planar, PlanarPoly, Rational, PLANAR_VARS};
use coherent_quant::quadrature::PhaseQuadrature;
use coherent_quant::symbols::*;
use proptest::prelude::*;

fn cfg() -> SpaceConfig<f64> {
    SpaceConfig::new(96, 0.8, 1.7).unwrap()
}

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_is_hermitian(a in coord(), b in coord(), c in coord(), d in coord()) {
        let cfg = cfg();
        let (x, y) = (CoherentLabel::cartesian(a, b), CoherentLabel::cartesian(c, d));
        let lhs = overlap_analytic(&x, &y, &cfg);
        let rhs = overlap_analytic(&y, &x, &cfg).conj();
        prop_assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn overlap_modulus_is_translation_invariant(a in coord(), b in coord(), c in coord(), d in coord(), s in coord(), t in coord()) {
        let cfg = cfg();
        let shifted = overlap_analytic(&CoherentLabel::cartesian(a + s, b + t), &CoherentLabel::cartesian(c + s, d + t), &cfg);
        let plain = overlap_analytic(&CoherentLabel::cartesian(a, b), &CoherentLabel::cartesian(c, d), &cfg);
        prop_assert!((shifted.norm() - plain.norm()).abs() < 1e-13);
        prop_assert!(plain.norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn coherent_states_are_normalized(a in coord(), b in coord()) {
        let cfg = cfg();
        let v = coherent_state(&CoherentLabel::cartesian(a, b), &Fiducial::gaussian(&cfg), &Gauge::Zero, &cfg).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let u = coherent_state(&CoherentLabel::cartesian(a, b), &Fiducial::gaussian(&cfg), &Gauge::Zero, &cfg).unwrap();
        let w = coherent_state(&CoherentLabel::cartesian(0.0, 0.0), &Fiducial::gaussian(&cfg), &Gauge::Zero, &cfg).unwrap();
        let o = overlap_analytic(&CoherentLabel::cartesian(0.0, 0.0), &CoherentLabel::cartesian(a, b), &cfg);
        prop_assert!((w.inner(&u) - o).norm() < 1e-12);
    }

    #[test]
    fn charts_invert(a in 0.05..3.0f64, b in -3.0..3.0f64) {
        for map in [CoordinateMap::<f64>::action_angle(), CoordinateMap::rotation45()] {
            let (p, q) = map.inverse(a, b);
            let (x, y) = map.forward(p, q);
            let (p2, q2) = map.inverse(x, y);
            prop_assert!((p - p2).abs() < 1e-12 && (q - q2).abs() < 1e-12, "{}", map.name());
        }
        let rot = CoordinateMap::<f64>::rotation45();
        let (x, y) = rot.forward(rot.inverse(a, b).0, rot.inverse(a, b).1);
        prop_assert!((x - a).abs() < 1e-12 && (y - b).abs() < 1e-12);
    }

    #[test]
    fn bridges_hit_their_endpoints(p0 in coord(), q0 in coord(), p1 in coord(), q1 in coord(), seed in any::<u64>(), nu in 0.1..50.0f64) {
        let b = sample_bridge(nu, 0.7, (p0, q0), (p1, q1), 32, seed).unwrap();
        prop_assert_eq!((b.p[0], b.q[0]), (p0, q0));
        prop_assert_eq!((b.p[32], b.q[32]), (p1, q1));
        prop_assert_eq!(b.times.len(), 33);
    }
}

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn polynomial_text_round_trips(terms in prop::collection::vec(((0u32..5, 0u32..5), rational()), 0..6)) {
        let poly: PlanarPoly<Rational> = PlanarPoly::from_terms(terms.into_iter().map(|((a, b), c)| ([a, b], c)));
        let text = poly.to_text(&PLANAR_VARS);
        let back = parse_planar(&text).unwrap();
        prop_assert_eq!(back, poly, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn toeplitz_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, c0 in -1.0..1.0f64, c1 in -1.0..1.0f64) {
        let cfg = SpaceConfig::new(12, 1.0, 1.0).unwrap();
        let fid = Fiducial::gaussian(&cfg);
        let quad = PhaseQuadrature::square(8.0, 48).unwrap();
        let f = SymbolFn::parse(&format!("{c0} p^2 + q")).unwrap();
        let g = SymbolFn::parse(&format!("{c1} p q + q^2")).unwrap();
        let combo = SymbolFn::func(move |p, q| a * (c0 * p * p + q) + b * (c1 * p * q + q * q), Some(Growth::Polynomial { degree: 2 }));
        let tf = toeplitz_quantize(&f, &fid, &quad, &cfg).unwrap();
        let tg = toeplitz_quantize(&g, &fid, &quad, &cfg).unwrap();
        let tc = toeplitz_quantize(&combo, &fid, &quad, &cfg).unwrap();
        let lin = tf.scale(a).add(&tg.scale(b));
        prop_assert!(tc.sub(&lin).max_abs() < 1e-10 * (1.0 + lin.max_abs()));
    }
}
