use coherent_quant::coherent::*;
use coherent_quant::hilbert::*;
use coherent_quant::poly::{parse_planar, Rational, PLANAR_VARS};
use coherent_quant::quadrature::PhaseQuadrature;
use coherent_quant::symbols::*;
use coherent_quant::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::One;

fn cfg(d: usize, hbar: f64) -> SpaceConfig<f64> {
    SpaceConfig::new(d, hbar, 1.0).unwrap()
}

fn oscillator(c: &SpaceConfig<f64>, shift: f64) -> Operator<f64> {
    let (p, q) = canonical_ops(c).unwrap();
    let id = Operator::identity(c.dim()).scale(shift * c.hbar());
    p.compose(&p).add(&q.compose(&q)).add(&id).scale(0.5)
}

fn grid() -> Grid2<f64> {
    Grid2::uniform((-2.0, 2.0), 9, (-2.0, 2.0), 9).unwrap()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Anti-normally ordered image of `(α + ᾱ)^4` times `(ħ/2Ω)^2`, built in a padded space.
fn anti_wick_q4(c: &SpaceConfig<f64>) -> DMatrix<Complex64> {
    let big = c.dim() + 8;
    let a = annihilation::<f64>(big);
    let ad = a.adjoint();
    let pow = |m: &DMatrix<Complex64>, k: u32| (0..k).fold(DMatrix::identity(big, big), |acc, _| acc * m);
    let mut out = DMatrix::zeros(big, big);
    for k in 0..=4u32 {
        out += (pow(&a, k) * pow(&ad, 4 - k)) * Complex64::new(binomial(4, k), 0.0);
    }
    let s = c.hbar() / (2.0 * c.omega());
    out.scale(s * s).view((0, 0), (c.dim(), c.dim())).into_owned()
}

#[test]
fn upper_symbols_of_basic_operators() {
    let c = cfg(48, 1.0);
    let fid = Fiducial::gaussian(&c);
    let h = upper_symbol(&oscillator(&c, -1.0), &fid, &grid(), &c).unwrap();
    let (_, q) = canonical_ops(&c).unwrap();
    let hq = upper_symbol(&q, &fid, &grid(), &c).unwrap();
    let one = upper_symbol(&Operator::identity(48), &fid, &grid(), &c).unwrap();
    for (_, _, p, qq) in grid().points() {
        assert!((h.eval(p, qq) - 0.5 * (p * p + qq * qq)).abs() < 1e-7);
        assert!((hq.eval(p, qq) - qq).abs() < 1e-8);
        assert!((one.eval(p, qq) - 1.0).abs() < 1e-10);
    }
    assert!(h.is_real() || matches!(&h, SymbolFn::Table(t) if t.max_imag() < 1e-10));
}

#[test]
fn upper_symbol_checks_trusted_radius() {
    let c = cfg(16, 1.0);
    let far = Grid2::uniform((0.0, 4.0), 2, (0.0, 0.0), 1).unwrap();
    let r = upper_symbol(&Operator::identity(16), &Fiducial::gaussian(&c), &far, &c);
    assert!(matches!(r, Err(Error::TruncationRadius { .. })));
}

#[test]
fn toeplitz_of_constant_and_oscillator() {
    let c = cfg(32, 1.0);
    let fid = Fiducial::gaussian(&c);
    let one = toeplitz_quantize_auto(&SymbolFn::constant(1.0), &fid, &c).unwrap();
    assert!(one.block_distance(&Operator::identity(32), 16) < 1e-6);
    let h = toeplitz_quantize_auto(&SymbolFn::parse("1/2 p^2 + 1/2 q^2").unwrap(), &fid, &c).unwrap();
    assert!(h.block_distance(&oscillator(&c, 1.0), 16) < 1e-6);
}

#[test]
fn toeplitz_q4_matches_anti_wick_oracle() {
    for hbar in [1.0, 0.6] {
        let c = cfg(32, hbar);
        let t = toeplitz_quantize_auto(&SymbolFn::parse("q^4").unwrap(), &Fiducial::gaussian(&c), &c).unwrap();
        let oracle = Operator::new(anti_wick_q4(&c)).unwrap();
        assert!(t.block_distance(&oracle, 16) < 1e-6, "{}", t.block_distance(&oracle, 16));
    }
}

#[test]
fn toeplitz_is_linear() {
    let c = cfg(24, 1.0);
    let fid = Fiducial::gaussian(&c);
    let quad = PhaseQuadrature::square(8.0, 70).unwrap();
    let t = |s: &str| toeplitz_quantize(&SymbolFn::parse(s).unwrap(), &fid, &quad, &c).unwrap();
    let combo = t("2 p^2 q - 3 q^3 + 0.5");
    let parts = t("p^2 q").scale(2.0).add(&t("q^3").scale(-3.0)).add(&t("1").scale(0.5));
    assert!(combo.block_distance(&parts, 24) < 1e-10);
}

#[test]
fn nonnegative_symbol_gives_nonnegative_operator() {
    let c = cfg(32, 1.0);
    let h = SymbolFn::parse("p^4 - 2 p^2 + 1 + p^2 q^2").unwrap();
    let t = toeplitz_quantize_auto(&h, &Fiducial::gaussian(&c), &c).unwrap();
    let block = Operator::hermitian(t.block(16)).unwrap();
    assert!(spectrum(&block).unwrap()[0] > -1e-8);
}

#[test]
fn action_angle_quadrature_gives_same_operator() {
    let c = cfg(32, 1.0);
    let fid = Fiducial::gaussian(&c);
    let quad = PhaseQuadrature::action_angle(0.0, 60.0, 120, 80).unwrap();
    let h = SymbolFn::func(|a, _| a, Some(Growth::Polynomial { degree: 2 }));
    let t = toeplitz_quantize(&h, &fid, &quad, &c).unwrap();
    assert!(t.block_distance(&oscillator(&c, 1.0), 16) < 1e-6);
}

#[test]
fn lower_symbols_round_trip() {
    let one = Rational::one();
    let q2 = SymbolTarget::Ordered(OrderedPoly::word(one, "QQ").unwrap());
    let h = lower_symbol_poly(&q2, &one, &one).unwrap();
    assert_eq!(h, parse_planar("q^2 - 1/2").unwrap());
    let id = SymbolTarget::Ordered(OrderedPoly::new(vec![(one, vec![])]));
    assert_eq!(lower_symbol_poly(&id, &one, &one).unwrap().to_text(&PLANAR_VARS), "1");

    let c = cfg(32, 1.0);
    let (_, q) = canonical_ops(&c).unwrap();
    let t = toeplitz_quantize_auto(&SymbolFn::Poly(h.to_real()), &Fiducial::gaussian(&c), &c).unwrap();
    assert!(t.block_distance(&q.compose(&q), 16) < 1e-6);

    let upper = SymbolFn::parse("1/2 p^2 + 1/2 q^2 + 1").unwrap();
    let lower = lower_symbol(&upper, &c).unwrap();
    let expected = parse_planar("1/2 p^2 + 1/2 q^2").unwrap().to_real::<f64>();
    assert_eq!(lower.as_poly().unwrap(), &expected);
}

#[test]
fn lower_symbol_rejects_tables() {
    let c = cfg(64, 1.0);
    let table = upper_symbol(&Operator::identity(64), &Fiducial::gaussian(&c), &grid(), &c).unwrap();
    assert!(matches!(lower_symbol(&table, &c), Err(Error::Unsupported(_))));
}

#[test]
fn sandwich_discrepancy_is_first_order_in_hbar() {
    for text in ["q^2", "q^4", "1/2 p^2 + 1/2 q^2 + q^4"] {
        let h = parse_planar(text).unwrap();
        let lead = |hbar: Rational| {
            let d = &upper_of_toeplitz_poly(&h, &hbar, &Rational::one()) - &h;
            let top = d.degree();
            d.terms().filter(|(e, _)| e[0] + e[1] == top).map(|(_, c)| *c).max().unwrap()
        };
        assert_eq!(lead(Rational::one()), lead(Rational::new(1, 2)) * Rational::from_integer(2));
    }
}

#[test]
fn admissibility_conditions() {
    let r = conditions_check(&SymbolFn::<f64>::parse("p^2 q^4").unwrap()).unwrap();
    assert!(r.cond1 && r.cond2);
    let r = conditions_check(&SymbolFn::<f64>::constant(0.0)).unwrap();
    assert!(r.cond1 && r.cond2);
    let g = SymbolFn::func(|p: f64, _| (p * p).exp(), Some(Growth::Gaussian { rate: 1.0 }));
    let r = conditions_check(&g).unwrap();
    assert!(!r.cond1 && !r.cond2);
    assert_eq!(r.cond1_fails_below, Some(2.0));
    let bare = SymbolFn::func(|p: f64, _| p, None);
    assert!(matches!(conditions_check(&bare), Err(Error::Inadmissible(_))));
    let c = cfg(8, 1.0);
    let quad = PhaseQuadrature::square(4.0, 10).unwrap();
    assert!(toeplitz_quantize(&g, &Fiducial::gaussian(&c), &quad, &c).is_err());
}

#[test]
fn semibounded_whitelist() {
    for yes in ["p^2 + q^4", "p^2 q^2", "-q^2 - p^4", "p^2 q^2 - p q", "7"] {
        let h = SymbolFn::<f64>::parse(yes).unwrap();
        assert!(is_semibounded_polynomial(h.as_poly().unwrap()), "{yes}");
    }
    for no in ["q^3", "p q", "p^2 - q^4", "p^2 q^2 - p^3 q"] {
        let h = SymbolFn::<f64>::parse(no).unwrap();
        assert!(!is_semibounded_polynomial(h.as_poly().unwrap()), "{no}");
    }
}
