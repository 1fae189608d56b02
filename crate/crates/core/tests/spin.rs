use coherent_quant::hilbert::*;
use coherent_quant::quadrature::SphereQuadrature;
use coherent_quant::spin::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

fn max_dev(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn eye(d: usize) -> DMatrix<Complex64> {
    DMatrix::identity(d, d)
}

#[test]
fn casimir_and_commutators() {
    let i = Complex64::new(0.0, 1.0);
    for twice in 1..=40 {
        let hbar = 0.7;
        let cfg = SpinConfig::new(twice, hbar).unwrap();
        let (s1, s2, s3) = spin_ops(&cfg);
        let (a, b, c) = (s1.mat(), s2.mat(), s3.mat());
        let cas = a * a + b * b + c * c;
        let s = twice as f64 / 2.0;
        let target = eye(cfg.dim()) * Complex64::new(s * (s + 1.0) * hbar * hbar, 0.0);
        assert!(max_dev(&cas, &target) < 1e-12, "2s={twice}");
        // Products carry entries of size s(s+1)ħ², so exactness is checked relative to that scale.
        let tol = 1e-14 * (s * (s + 1.0) * hbar * hbar).max(1.0);
        assert!(max_dev(&(a * b - b * a), &(c * (i * hbar))) < tol);
        assert!(max_dev(&(b * c - c * b), &(a * (i * hbar))) < tol);
        assert!(max_dev(&(c * a - a * c), &(b * (i * hbar))) < tol);
    }
}

#[test]
fn spin_half_is_pauli() {
    let cfg = SpinConfig::from_spin(0.5, 1.0).unwrap();
    let (s1, s2, s3) = spin_ops(&cfg);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let x = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0.5, 0.), c(0.5, 0.), c(0., 0.)]);
    let y = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -0.5), c(0., 0.5), c(0., 0.)]);
    let z = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0., 0.), c(0., 0.), c(-0.5, 0.)]);
    assert!(max_dev(s1.mat(), &x) < 1e-15);
    assert!(max_dev(s2.mat(), &y) < 1e-15);
    assert!(max_dev(s3.mat(), &z) < 1e-15);
    let v = spin_coherent(&SpinLabel::new(PI / 2.0, 0.0).unwrap(), &cfg);
    assert!((v.expect(&s1).re - 0.5).abs() < 1e-15);
}

#[test]
fn coherent_expectations_follow_the_unit_vector() {
    for twice in [1, 2, 5, 12] {
        let cfg = SpinConfig::new(twice, 1.3).unwrap();
        let (s1, s2, s3) = spin_ops(&cfg);
        let sh = cfg.s() * cfg.hbar();
        for (th, ph) in [(0.0, 0.0), (0.4, 1.1), (1.9, 5.0), (PI, 0.3)] {
            let l = SpinLabel::new(th, ph).unwrap();
            let v = spin_coherent(&l, &cfg);
            assert!((v.norm() - 1.0).abs() < 1e-13);
            let n = l.unit_vector();
            assert!((v.expect(&s3).re - sh * th.cos()).abs() < 1e-12);
            assert!((v.expect(&s1).re - sh * n[0]).abs() < 1e-12);
            assert!((v.expect(&s2).re - sh * n[1]).abs() < 1e-12);
        }
    }
}

#[test]
fn resolution_of_unity() {
    let half = SpinConfig::new(1, 1.0f64).unwrap();
    assert!(spin_resolution_check(&half, &SphereQuadrature::product(64, 64).unwrap()) <= 1e-10);
    let five = SpinConfig::new(10, 1.0f64).unwrap();
    let coarse = spin_resolution_check(&five, &SphereQuadrature::product(64, 64).unwrap());
    let fine = spin_resolution_check(&five, &SphereQuadrature::product(128, 128).unwrap());
    assert!(coarse <= 1e-9 && fine <= coarse.max(1e-13), "{coarse} {fine}");
    for twice in [2, 7, 20, 40] {
        let cfg = SpinConfig::new(twice, 0.5).unwrap();
        assert!(spin_resolution_check(&cfg, &spin_quadrature(&cfg, 0).unwrap()) <= 1e-10, "2s={twice}");
    }
}

/// `(2s+1)/4π ∫ cosθ cos^{4s}(θ/2) dΩ` by composite Simpson.
fn top_entry_oracle(twice: usize) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let f = |t: f64| t.cos() * (t / 2.0).cos().powi(2 * twice as i32) * t.sin();
    let mut acc = f(0.0) + f(PI);
    for k in 1..n {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    (twice as f64 + 1.0) / (4.0 * PI) * 2.0 * PI * acc * h / 3.0
}

#[test]
fn toeplitz_of_height_is_proportional_to_s3() {
    for twice in [1, 2, 4, 9] {
        let hbar = 0.8;
        let cfg = SpinConfig::new(twice, hbar).unwrap();
        let (_, _, s3) = spin_ops(&cfg);
        let sh = cfg.s() * hbar;
        let coeff = top_entry_oracle(twice) / sh;
        let expected = s3.scale(coeff);
        let poly = spin_toeplitz(&SphereSymbol::parse("n3").unwrap(), &cfg).unwrap();
        assert!(poly.sub(&expected).max_abs() < 1e-8, "2s={twice}");
        let func = spin_toeplitz(&SphereSymbol::func(|t: f64, _| t.cos()), &cfg).unwrap();
        assert!(func.sub(&expected).max_abs() < 1e-8);
    }
}

#[test]
fn toeplitz_of_one_is_identity() {
    let cfg = SpinConfig::new(6, 1.0).unwrap();
    let one = spin_toeplitz(&SphereSymbol::parse("1").unwrap(), &cfg).unwrap();
    assert!(one.sub(&Operator::identity(7)).max_abs() < 1e-12);
    let sq = spin_toeplitz(&SphereSymbol::parse("n1^2 + n2^2 + n3^2").unwrap(), &cfg).unwrap();
    assert!(sq.sub(&Operator::identity(7)).max_abs() < 1e-12);
}

#[test]
fn toeplitz_is_rotation_covariant() {
    let alpha: f64 = 0.7;
    for twice in [1, 3, 6] {
        let cfg = SpinConfig::new(twice, 1.0).unwrap();
        let (_, s2, _) = spin_ops(&cfg);
        let space = SpaceConfig::new(cfg.dim(), 1.0, 1.0).unwrap();
        let u = evolve(&s2, alpha, &space).unwrap();
        let h = |n: [f64; 3]| n[2] + 0.5 * n[0] * n[1] + n[0] * n[0] * n[2];
        let base = spin_toeplitz(
            &SphereSymbol::func(move |t: f64, p: f64| h([t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])),
            &cfg,
        )
        .unwrap();
        let (ca, sa) = (alpha.cos(), alpha.sin());
        // h composed with the inverse rotation about the 2-axis.
        let rotated = spin_toeplitz(
            &SphereSymbol::func(move |t: f64, p: f64| {
                let n = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
                h([ca * n[0] - sa * n[2], n[1], sa * n[0] + ca * n[2]])
            }),
            &cfg,
        )
        .unwrap();
        let conj = u.compose(&base).compose(&u.adjoint());
        assert!(conj.sub(&rotated).max_abs() < 1e-8, "2s={twice}: {}", conj.sub(&rotated).max_abs());
    }
}

#[test]
fn unresolved_closure_is_reported() {
    let cfg = SpinConfig::new(2, 1.0).unwrap();
    let spiky =
        SphereSymbol::func(|t: f64, p: f64| (40.0 * t).sin() * (37.0 * p).cos() + if t < 0.05 { 1.0 } else { 0.0 });
    assert!(spin_toeplitz(&spiky, &cfg).is_err());
}
