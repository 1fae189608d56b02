use coherent_quant::coherent::*;
use coherent_quant::hilbert::*;
use coherent_quant::pathint::*;
use coherent_quant::spin::*;
use coherent_quant::symbols::*;
use coherent_quant::{Operator32, SpaceConfig32};

#[test]
fn oscillator_spectrum_in_f32() {
    let cfg = SpaceConfig32::new(24, 1.0, 1.0).unwrap();
    let h: Operator32 =
        toeplitz_quantize_auto(&SymbolFn::parse("1/2 p^2 + 1/2 q^2").unwrap(), &Fiducial::gaussian(&cfg), &cfg)
            .unwrap();
    let ev = spectrum(&h).unwrap();
    for (n, e) in ev.iter().take(6).enumerate() {
        assert!((e - (n as f32 + 1.0)).abs() < 1e-3, "{n}: {e}");
    }
}

#[test]
fn overlaps_in_f32() {
    let cfg = SpaceConfig32::new(48, 1.0, 1.0).unwrap();
    let (a, b) = (CoherentLabel::cartesian(0.5f32, -0.4), CoherentLabel::cartesian(-0.2f32, 0.7));
    let va = coherent_state(&a, &Fiducial::gaussian(&cfg), &Gauge::Zero, &cfg).unwrap();
    let vb = coherent_state(&b, &Fiducial::gaussian(&cfg), &Gauge::Zero, &cfg).unwrap();
    assert!((vb.inner(&va) - overlap_analytic(&b, &a, &cfg)).norm() < 1e-5);
}

#[test]
fn lattice_and_spin_in_f32() {
    let h = SymbolFn::<f32>::parse("1/2 p^2").unwrap();
    let k = lattice_propagator(&h, &LatticeConfig::new(3, 1.0f32, 0.0, 0.5).unwrap(), 1.0).unwrap();
    assert!((k.norm() - (1.0 / (2.0 * std::f32::consts::PI)).sqrt()).abs() < 1e-4);
    let cfg = SpinConfig::new(4, 1.0f32).unwrap();
    let (s1, s2, s3) = spin_ops(&cfg);
    let cas = s1.compose(&s1).add(&s2.compose(&s2)).add(&s3.compose(&s3));
    assert!(cas.sub(&Operator::identity(5).scale(6.0)).max_abs() < 1e-5);
}
