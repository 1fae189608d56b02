use std::f64::consts::PI;

use coherent_quant::coherent::{default_quadrature, resolution_check, CoherentFamily, CoherentLabel, Fiducial, Gauge};
use coherent_quant::geometry::{
    bohr_sommerfeld_in, fubini_study_metric, gaussian_curvature, ChartRegistry, CoordinateMap, MetricTensor,
    Pushforward,
};
use coherent_quant::hilbert::{spectrum, Operator, SpaceConfig};
use coherent_quant::pathint::{dk_expected, dk_propagator, lattice_propagator, Estimator, LatticeConfig, McConfig};
use coherent_quant::poly::{format_rational, parse_planar, PlanarPoly, Rational, PLANAR_VARS};
use coherent_quant::quadrature::{PhaseQuadrature, SphereQuadrature};
use coherent_quant::spin::{spin_resolution_check, spin_toeplitz, SphereSymbol, SpinConfig};
use coherent_quant::symbols::{
    lower_symbol_poly, toeplitz_quantize_auto, upper_of_toeplitz_poly, upper_symbol, Grid2, SymbolFn, SymbolTarget,
};
use num_traits::ToPrimitive;

use crate::error::CliError;
use crate::output::{num, Context, Plot, Table};
use crate::spec::*;

/// Seed and worker count after command-line overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub seed: u64,
    pub workers: usize,
}

pub fn dispatch(spec: &ExperimentSpec, settings: RunSettings) -> Result<Table, CliError> {
    match spec.command.as_str() {
        "quantize" => quantize(&spec.params()?),
        "spectrum" => spectrum_cmd(&spec.params()?),
        "symbols" => symbols(&spec.params()?),
        "metric" => metric(&spec.params()?),
        "chart" => chart(&spec.params()?),
        "bohr" => bohr(&spec.params()?),
        "lattice" => lattice(&spec.params()?),
        "dk" => dk(&spec.params()?, settings),
        "spin" => spin(&spec.params()?),
        "resolution" => resolution(&spec.params()?),
        other => Err(CliError::Spec(format!(
            "unknown command {other:?}; expected one of quantize, spectrum, symbols, metric, chart, bohr, lattice, dk, spin, resolution"
        ))),
    }
}

fn space(dim: usize, hbar: f64, omega: f64) -> Result<SpaceConfig<f64>, CliError> {
    Ok(SpaceConfig::new(dim, hbar, omega)?)
}

fn context(cfg: &SpaceConfig<f64>, units: &'static str) -> Context {
    Context { hbar: cfg.hbar(), omega: Some(cfg.omega()), dim: Some(cfg.dim()), units }
}

fn fiducial(f: FiducialSpec, cfg: &SpaceConfig<f64>) -> Result<Fiducial<f64>, CliError> {
    Ok(match f {
        FiducialSpec::Gaussian => Fiducial::gaussian(cfg),
        FiducialSpec::Fock { n } => Fiducial::fock(cfg, n)?,
        FiducialSpec::Squeezed { r, theta } => Fiducial::squeezed(cfg, r, theta)?,
        FiducialSpec::Frequency { omega } => Fiducial::with_frequency(cfg, omega)?,
        FiducialSpec::Displaced { p, q } => Fiducial::displaced(cfg, p, q)?,
    })
}

fn grid(g: &GridSpec) -> Result<Grid2<f64>, CliError> {
    Ok(Grid2::uniform((g.p[0], g.p[1]), g.n, (g.q[0], g.q[1]), g.n)?)
}

fn chart_map(name: &str) -> Result<CoordinateMap<f64>, CliError> {
    Ok(ChartRegistry::default().get(name)?.clone())
}

/// Exact rational for a decimal literal such as `0.5`.
fn exact(x: f64) -> Result<Rational, CliError> {
    Ok(parse_planar(&format!("{x}"))?.coeff([0, 0]))
}

fn quantize(p: &QuantizeParams) -> Result<Table, CliError> {
    let cfg = space(p.dim, p.hbar, p.omega)?;
    let h = SymbolFn::parse(&p.symbol)?;
    let op = toeplitz_quantize_auto(&h, &fiducial(p.fiducial, &cfg)?, &cfg)?;
    let rows = p.rows.unwrap_or(cfg.trusted_block()).min(cfg.dim());
    let mut t = Table::new(
        format!("Toeplitz operator of {}", p.symbol),
        &["row", "col", "re", "im"],
        context(&cfg, "symbol units"),
    );
    let block = op.block(rows);
    for r in 0..rows {
        for c in 0..rows {
            let z = block[(r, c)];
            t.push(vec![r.to_string(), c.to_string(), num(z.re), num(z.im)]);
        }
    }
    Ok(t.with_plot(Plot::Heat { x: 1, y: 0, z: 2 }))
}

fn spectrum_cmd(p: &SpectrumParams) -> Result<Table, CliError> {
    let cfg = space(p.dim, p.hbar, p.omega)?;
    let h = SymbolFn::parse(&p.symbol)?;
    let op = toeplitz_quantize_auto(&h, &fiducial(p.fiducial, &cfg)?, &cfg)?;
    let k = cfg.trusted_block();
    let ev = spectrum(&Operator::hermitian(op.block(k))?)?;
    let levels = p.levels.unwrap_or(k).min(k);
    let mut t = Table::new(
        format!("spectrum of the Toeplitz operator of {}", p.symbol),
        &["n", "energy"],
        context(&cfg, "energy in symbol units"),
    );
    for (n, e) in ev.iter().take(levels).enumerate() {
        t.push(vec![n.to_string(), num(*e)]);
    }
    Ok(t.with_plot(Plot::Lines { x: 0, ys: vec![1] }))
}

fn poly_rows(t: &mut Table, poly: &PlanarPoly<Rational>) {
    for (e, c) in poly.terms() {
        let value = c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN);
        t.push(vec![e[0].to_string(), e[1].to_string(), format_rational(c), num(value)]);
    }
}

fn symbols(p: &SymbolsParams) -> Result<Table, CliError> {
    let cfg = space(p.dim, p.hbar, p.omega)?;
    let ctx = context(&cfg, "symbol units; p,q in phase-space units");
    match p.kind {
        SymbolKind::Upper => {
            let h = SymbolFn::parse(&p.symbol)?;
            let fid = Fiducial::gaussian(&cfg);
            let op = toeplitz_quantize_auto(&h, &fid, &cfg)?;
            let g = grid(&p.grid)?;
            let SymbolFn::Table(table) = upper_symbol(&op, &fid, &g, &cfg)? else {
                unreachable!("upper symbols are tabulated")
            };
            let mut t = Table::new(
                format!("upper symbol of the Toeplitz operator of {}", p.symbol),
                &["p", "q", "symbol", "upper_re", "upper_im", "discrepancy"],
                ctx,
            );
            for (i, j, pp, qq) in g.points() {
                let z = table.at(i, j);
                let h0 = h.eval(pp, qq);
                t.push(vec![num(pp), num(qq), num(h0), num(z.re), num(z.im), num(z.re - h0)]);
            }
            Ok(t.with_plot(Plot::Heat { x: 0, y: 1, z: 5 }))
        }
        SymbolKind::Lower | SymbolKind::Sandwich => {
            let h = parse_planar(&p.symbol)?;
            let (hb, om) = (exact(p.hbar)?, exact(p.omega)?);
            let (title, poly) = if p.kind == SymbolKind::Lower {
                (
                    format!("lower symbol with upper symbol {}", p.symbol),
                    lower_symbol_poly(&SymbolTarget::Upper(h), &hb, &om)?,
                )
            } else {
                (
                    format!("upper symbol of Toeplitz({}) minus the symbol", p.symbol),
                    &upper_of_toeplitz_poly(&h, &hb, &om) - &h,
                )
            };
            let mut t = Table::new(
                format!("{title}: {}", poly.to_text(&PLANAR_VARS)),
                &["p_power", "q_power", "coeff", "value"],
                ctx,
            );
            poly_rows(&mut t, &poly);
            Ok(t)
        }
    }
}

fn metric(p: &MetricParams) -> Result<Table, CliError> {
    let cfg = space(p.dim, p.hbar, p.omega)?;
    let fid = fiducial(p.fiducial, &cfg)?;
    let map = chart_map(&p.chart)?;
    let g = grid(&p.grid)?;
    let images: Vec<(f64, f64)> = g
        .points()
        .map(|(_, _, a, b)| {
            map.check_chart_point(a, b)?;
            Ok(map.inverse(a, b))
        })
        .collect::<Result<_, CliError>>()?;
    let bound = |f: fn(&(f64, f64)) -> f64| {
        images.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    };
    let (pr, qr) = (bound(|x| x.0), bound(|x| x.1));
    let check = Grid2::uniform(pr, 5, qr, 5)?;
    let cart = fubini_study_metric(&fid, &cfg, &check)?;
    let m: MetricTensor<f64> = cart.pushforward(&map)?;
    let mut t = Table::new(
        format!("coherent-state metric in the {} chart", p.chart),
        &["x", "y", "A", "B", "C", "curvature"],
        context(&cfg, "metric in action units"),
    );
    for (_, _, a, b) in g.points() {
        let s = m.at(a, b);
        let k = gaussian_curvature(&m, a, b)?;
        t.push(vec![num(a), num(b), num(s.a), num(s.b), num(s.c), num(k)]);
    }
    Ok(t.with_plot(Plot::Heat { x: 0, y: 1, z: 2 }))
}

fn chart(p: &ChartParams) -> Result<Table, CliError> {
    let map = chart_map(&p.map)?;
    let h = p.symbol.as_deref().map(SymbolFn::<f64>::parse).transpose()?;
    let pushed = h.as_ref().map(|h| h.pushforward(&map)).transpose()?;
    let mut cols = vec!["p", "q", "x", "y", "jacobian_det", "canonical", "generating_function"];
    if pushed.is_some() {
        cols.push("symbol");
    }
    let ctx = Context { hbar: 1.0, omega: None, dim: None, units: "phase-space coordinates" };
    let mut t = Table::new(format!("coordinate map {}", p.map), &cols, ctx);
    for &[pp, qq] in &p.points {
        let (x, y) = map.forward(pp, qq);
        map.check_chart_point(x, y)?;
        let mut row = vec![
            num(pp),
            num(qq),
            num(x),
            num(y),
            num(map.jacobian_det(pp, qq)),
            map.is_canonical().to_string(),
            map.generating_function(pp, qq).map(num).unwrap_or_default(),
        ];
        if let Some(s) = &pushed {
            row.push(num(s.eval(x, y)));
        }
        t.push(row);
    }
    Ok(t.with_plot(Plot::Lines { x: 2, ys: vec![3] }))
}

fn bohr(p: &BohrParams) -> Result<Table, CliError> {
    let map = chart_map(&p.chart)?;
    let h = SymbolFn::parse(&p.symbol)?.pushforward(&map)?;
    let energies = bohr_sommerfeld_in(&h, p.n_max, p.hbar, &map)?;
    let ctx =
        Context { hbar: p.hbar, omega: None, dim: None, units: "energy in symbol units; action in units of hbar" };
    let mut t = Table::new(format!("Bohr-Sommerfeld levels of {}", p.symbol), &["n", "energy", "action"], ctx);
    for (n, e) in energies.iter().enumerate() {
        t.push(vec![n.to_string(), num(*e), num(2.0 * PI * p.hbar * (n as f64 + 0.5))]);
    }
    Ok(t.with_plot(Plot::Lines { x: 0, ys: vec![1] }))
}

fn lattice(p: &LatticeParams) -> Result<Table, CliError> {
    let h = SymbolFn::parse(&p.symbol)?;
    let ctx = Context { hbar: p.hbar, omega: None, dim: None, units: "kernel in inverse length" };
    let mut t = Table::new(format!("time-sliced kernel of {}", p.symbol), &["slices", "re", "im", "abs"], ctx);
    for n in p.slices.to_vec() {
        let mut lat = LatticeConfig::new(n, p.time, p.q_start, p.q_end)?;
        if let Some(tail) = p.tail_threshold {
            lat.tail_threshold = tail;
        }
        let k = lattice_propagator(&h, &lat, p.hbar)?;
        t.push(vec![n.to_string(), num(k.re), num(k.im), num(k.norm())]);
    }
    Ok(t.with_plot(Plot::Lines { x: 0, ys: vec![1, 2] }))
}

fn dk(p: &DkParams, settings: RunSettings) -> Result<Table, CliError> {
    let cfg = space(p.dim, p.hbar, p.omega)?;
    let h = SymbolFn::parse(&p.symbol)?;
    let gauge = match &p.gauge {
        Some(g) => Gauge::Poly(parse_planar(g)?.to_real()),
        None => Gauge::Zero,
    };
    let mc = McConfig {
        samples: p.samples,
        steps: p.steps,
        seed: settings.seed,
        workers: settings.workers,
        chunk: p.chunk,
        estimator: match p.estimator {
            EstimatorSpec::Marginal => Estimator::MomentumMarginal,
            EstimatorSpec::Plain => Estimator::PlainBridge,
        },
        allow_non_semibounded: p.allow_non_semibounded,
        target_rel_stderr: p.target_rel_stderr,
    };
    let (from, to) = (CoherentLabel::cartesian(p.from[0], p.from[1]), CoherentLabel::cartesian(p.to[0], p.to[1]));
    let mut t = Table::new(
        format!("path-integral propagator of {}", p.symbol),
        &["nu", "re", "im", "stderr", "n_samples", "seed", "workers", "discrete_re", "discrete_im", "warning"],
        context(&cfg, "dimensionless amplitude"),
    );
    for nu in p.nu.to_vec() {
        let est = dk_propagator(&h, nu, p.time, &from, &to, &mc, &gauge, &cfg)?;
        let exact = dk_expected(&h, nu, p.time, &from, &to, p.steps, &gauge, &cfg)?;
        t.push(vec![
            num(nu),
            num(est.mean.re),
            num(est.mean.im),
            num(est.stderr),
            est.n_samples.to_string(),
            est.seed.seed.to_string(),
            est.seed.workers.to_string(),
            exact.map(|z| num(z.re)).unwrap_or_default(),
            exact.map(|z| num(z.im)).unwrap_or_default(),
            est.warning.unwrap_or_default(),
        ]);
    }
    Ok(t.with_plot(Plot::Lines { x: 0, ys: vec![1, 2] }))
}

fn spin(p: &SpinParams) -> Result<Table, CliError> {
    let cfg = SpinConfig::from_spin(p.spin, p.hbar)?;
    let op = spin_toeplitz(&SphereSymbol::parse(&p.symbol)?, &cfg)?;
    let ev = spectrum(&op)?;
    let ctx = Context { hbar: p.hbar, omega: None, dim: Some(cfg.dim()), units: "symbol units" };
    let mut t = Table::new(format!("spin-{} Toeplitz operator of {}", p.spin, p.symbol), &["k", "eigenvalue"], ctx);
    for (k, e) in ev.iter().enumerate() {
        t.push(vec![k.to_string(), num(*e)]);
    }
    Ok(t.with_plot(Plot::Lines { x: 0, ys: vec![1] }))
}

fn resolution(p: &ResolutionParams) -> Result<Table, CliError> {
    match p.target {
        ResolutionTarget::Plane => {
            let cfg = space(p.dim, p.hbar, p.omega)?;
            let fid = fiducial(p.fiducial, &cfg)?;
            let mut t = Table::new(
                "resolution of unity on the plane",
                &["nodes", "radius", "deviation"],
                context(&cfg, "dimensionless"),
            );
            match (p.radius, &p.nodes) {
                (Some(r), Some(nodes)) => {
                    for n in nodes.to_vec() {
                        let quad = PhaseQuadrature::square(r, n)?;
                        t.push(vec![
                            quad.len().to_string(),
                            num(r),
                            num(resolution_check(&fid, &Gauge::Zero, &quad, &cfg)?),
                        ]);
                    }
                }
                (None, None) => {
                    let fam = CoherentFamily::new(&cfg, fid.clone(), Gauge::Zero);
                    let quad = default_quadrature(&fam, 0)?;
                    let radius = quad.nodes().iter().map(|n| n.label.p.abs()).fold(0.0, f64::max);
                    t.push(vec![
                        quad.len().to_string(),
                        num(radius),
                        num(resolution_check(&fid, &Gauge::Zero, &quad, &cfg)?),
                    ]);
                }
                _ => {
                    return Err(CliError::Spec("params for resolution: radius and nodes must be given together".into()))
                }
            }
            Ok(t.with_plot(Plot::Lines { x: 0, ys: vec![2] }))
        }
        ResolutionTarget::Sphere => {
            let s = p.spin.ok_or_else(|| CliError::Spec("params for resolution: sphere target needs spin".into()))?;
            let cfg = SpinConfig::from_spin(s, p.hbar)?;
            let nodes = p.nodes.as_ref().map(|n| n.to_vec()).unwrap_or_else(|| vec![16, 32, 64]);
            let ctx = Context { hbar: p.hbar, omega: None, dim: Some(cfg.dim()), units: "dimensionless" };
            let mut t = Table::new(
                format!("resolution of unity on the sphere, spin {s}"),
                &["n_theta", "n_phi", "deviation"],
                ctx,
            );
            for n in nodes {
                let quad = SphereQuadrature::product(n, 2 * n)?;
                t.push(vec![n.to_string(), (2 * n).to_string(), num(spin_resolution_check(&cfg, &quad))]);
            }
            Ok(t.with_plot(Plot::Lines { x: 0, ys: vec![2] }))
        }
    }
}
