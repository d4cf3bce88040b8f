use std::path::Path;

use qgraph::amo::{amo_bands_with, butterfly_with, AmoSpec};
use qgraph::chain::{chain_graph, constant_flux_bands, eta_energy, rational_flux_bands, JacobiOperatorSpec};
use qgraph::diophantine::{cf_expand, gamma_bounds, markov_constant, Real, Side};
use qgraph::graph_file::load_graph;
use qgraph::jacobi::BLOCH_PHASES;
use qgraph::lattice::{classify_golden, enumerate_gaps, RectLattice, Regime};
use qgraph::output::{fmt_real, write_butterfly_csv, write_gap_csv, write_scan_csv, write_spectral_csv, write_spectral_set};
use qgraph::par::Execution;
use qgraph::secular::{ScanOptions, SecularSystem};
use qgraph::trv::{lattice_bands, onshell_smatrix, star_eigenvalues, LatticeKind, LatticeSpec, StarGraph};
use qgraph::{Interval, SpectralSet};

use crate::svg::{render_butterfly, render_curve, short, CurvePlot};
use crate::{
    AmoArgs, BsWindowArgs, ButterflyArgs, ChainArgs, CliError, EnergyRange, Format, Kind, LatticeGapsArgs, Method,
    ScanArgs, StarArgs, TrvArgs,
};

/// Points per plotted curve.
const CURVE_POINTS: usize = 2000;

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                // a closed pipe (e.g. `| head`) is not a failure
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn energy_range(r: &EnergyRange) -> Result<Interval, CliError> {
    if r.emin < r.emax {
        Ok(Interval::new(r.emin, r.emax))
    } else {
        Err(CliError::Usage(format!(
            "--emin/--emax: empty energy range [{}, {}]",
            r.emin, r.emax
        )))
    }
}

fn format_set(set: &SpectralSet, format: Format) -> String {
    match format {
        Format::Text => write_spectral_set(set),
        Format::Csv => write_spectral_csv(set),
    }
}

/// Drops the sign of zero so that `-0` never reaches an output file.
fn num(x: f64) -> String {
    fmt_real(x + 0.0)
}

fn engine_scan(graph: qgraph::graph::MetricGraph, range: Interval, opts: &ScanOptions) -> Result<qgraph::secular::ScanResult, CliError> {
    let sys = SecularSystem::new(graph).map_err(|e| CliError::lib("graph", e))?;
    sys.spectrum_scan(range, opts).map_err(|e| CliError::lib("--emin/--emax", e))
}

fn curve(range: Interval, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..CURVE_POINTS)
        .map(|i| {
            let x = range.lo + (range.hi - range.lo) * i as f64 / (CURVE_POINTS - 1) as f64;
            (x, f(x))
        })
        .collect()
}

fn marks(set: &SpectralSet) -> (Vec<(f64, f64)>, Vec<f64>) {
    (
        set.bands.iter().map(|b| (b.lo, b.hi)).collect(),
        set.flat_bands.iter().map(|f| f.energy).collect(),
    )
}

pub fn chain(a: &ChainArgs) -> Result<(), CliError> {
    let range = energy_range(&a.range)?;
    let fluxes: Vec<f64> = match (a.flux, a.mu) {
        (Some(f), _) => vec![f],
        (None, Some((p, q))) => JacobiOperatorSpec::linear(p, q, a.theta)
            .map_err(|e| CliError::lib("--mu", e))?
            .fluxes,
        (None, None) => return Err(CliError::Usage("--flux or --mu is required".into())),
    };
    let set = match (a.method, a.mu) {
        (Method::Closed, None) => constant_flux_bands(a.alpha, fluxes[0], range).map_err(|e| CliError::lib("--flux", e))?,
        (Method::Closed, Some((p, q))) => {
            rational_flux_bands(a.alpha, p, q, a.theta, range).map_err(|e| CliError::lib("--mu", e))?
        }
        (Method::Engine, _) => {
            let g = chain_graph(a.alpha, &fluxes).map_err(|e| CliError::lib("--alpha", e))?;
            engine_scan(g, range, &ScanOptions::new(a.resolution))?.spectrum
        }
    };
    if let Some(path) = &a.output.svg {
        let strips: Vec<(f64, f64)> = match a.mu {
            None => {
                let w = 4.0 * (std::f64::consts::PI * fluxes[0]).cos().abs();
                vec![(-w, w)]
            }
            Some(_) => {
                let jac = JacobiOperatorSpec { fluxes: fluxes.clone() }
                    .operator()
                    .map_err(|e| CliError::lib("--mu", e))?;
                if jac.is_decoupled() {
                    jac.decoupled_eigenvalues().into_iter().map(|e| (e, e)).collect()
                } else {
                    jac.spectrum(BLOCH_PHASES).into_iter().map(|i| (i.lo, i.hi)).collect()
                }
            }
        };
        let top = strips.iter().map(|s| s.0.abs().max(s.1.abs())).fold(8.0, f64::max) * 1.25;
        let (m, p) = marks(&set);
        let flux = match a.mu {
            None => format!("A = {}", short(fluxes[0])),
            Some((p, q)) => format!("A_j = ({p}/{q}) j + {}", short(a.theta)),
        };
        let plot = CurvePlot {
            title: format!("eta(E) for alpha = {}, {flux}", short(a.alpha)),
            x_label: "E".into(),
            y_label: "eta".into(),
            x_range: (range.lo, range.hi),
            y_range: (-top, top),
            curve: curve(range, |e| eta_energy(e, a.alpha)),
            strips,
            marks: m,
            points: p,
        };
        emit(Some(path), &render_curve(&plot)?)?;
    }
    emit(a.output.out.as_deref(), &format_set(&set, a.format))
}

pub fn butterfly(a: &ButterflyArgs) -> Result<(), CliError> {
    if a.qmax == 0 {
        return Err(CliError::Usage("--qmax: must be at least 1".into()));
    }
    if a.phases == 0 {
        return Err(CliError::Usage("--phases: must be at least 1".into()));
    }
    let data = butterfly_with(a.qmax, a.phases, a.lambda, 0.0, Execution::default()).map_err(|e| CliError::lib("--qmax", e))?;
    if let Some(path) = &a.output.svg {
        emit(Some(path), &render_butterfly(&data)?)?;
    }
    emit(a.output.out.as_deref(), &write_butterfly_csv(&data))
}

pub fn amo(a: &AmoArgs) -> Result<(), CliError> {
    if a.phases == 0 {
        return Err(CliError::Usage("--phases: must be at least 1".into()));
    }
    let spec = AmoSpec::with_lambda(a.mu.0, a.mu.1, a.lambda, a.theta).map_err(|e| CliError::lib("--mu", e))?;
    let bands = amo_bands_with(&spec, a.phases);
    let e = 2.0 + a.lambda.abs();
    let set = SpectralSet::from_parts(Interval::new(-e, e), bands.iter().map(|b| (b.lo, b.hi)), [], 0.0);
    emit(a.out.as_deref(), &format_set(&set, a.format))
}

pub fn lattice_gaps(a: &LatticeGapsArgs) -> Result<(), CliError> {
    let lat = RectLattice::new(a.a.value, a.b.value, a.alpha).map_err(|e| CliError::lib("--a/--b", e))?;
    // golden-mean lattices also get the threshold prediction
    let longer = if a.a.is_golden_multiple_of(&a.b) {
        Some(a.a.value)
    } else if a.b.is_golden_multiple_of(&a.a) {
        Some(a.b.value)
    } else {
        None
    };
    let predicted = match longer {
        Some(l) => Some(classify_golden(a.alpha, l).map_err(|e| CliError::lib("--alpha", e))?.regime),
        None => None,
    };
    let report = enumerate_gaps(&lat, a.emax).map_err(|e| CliError::lib("--emax", e))?;
    if let Some(path) = &a.output.svg {
        if report.gaps.is_empty() {
            return Err(CliError::Usage("--svg: the gap list is empty, nothing to plot".into()));
        }
        let k_max = a.emax.sqrt();
        let level = a.alpha.abs();
        let plot = CurvePlot {
            title: format!("gap condition, a = {}, b = {}, alpha = {}", short(a.a.value), short(a.b.value), short(a.alpha)),
            x_label: "k".into(),
            y_label: "left-hand side".into(),
            x_range: (0.0, k_max),
            y_range: (0.0, (3.0 * level).max(1.0)),
            curve: curve(Interval::new(k_max / CURVE_POINTS as f64, k_max), |k| lat.lhs(k)),
            strips: vec![(0.0, level)],
            marks: report.gaps.iter().map(|g| (g.lo.sqrt(), g.hi.sqrt())).collect(),
            points: vec![],
        };
        emit(Some(path), &render_curve(&plot)?)?;
    }
    let regime = match report.regime {
        Regime::NoGaps => "no gaps",
        Regime::Finite(_) => "finitely many gaps",
        Regime::Infinite => "gaps keep opening up to E_max",
    };
    eprintln!("gap count in (0, {}]: {} ({regime})", a.emax, report.count);
    match predicted {
        Some(Regime::NoGaps) => eprintln!("golden-mean thresholds: no gaps"),
        Some(Regime::Finite(n)) => eprintln!("golden-mean thresholds: exactly {n} gap(s)"),
        Some(Regime::Infinite) => eprintln!("golden-mean thresholds: infinitely many gaps"),
        None => {}
    }
    if let Some(top) = report.negative_gap_top {
        eprintln!("the gap below the spectrum reaches E = {} (not listed)", num(top));
    }
    emit(a.output.out.as_deref(), &write_gap_csv(&report.gaps))
}

fn side(s: Side) -> &'static str {
    match s {
        Side::A => "a",
        Side::B => "b",
    }
}

pub fn bs_window(a: &BsWindowArgs) -> Result<(), CliError> {
    if a.mmax == 0 {
        return Err(CliError::Usage("--mmax: must be at least 1".into()));
    }
    if a.depth < 2 {
        return Err(CliError::Usage("--depth: must be at least 2".into()));
    }
    let g = gamma_bounds(a.a.value, a.b.value, a.mmax).map_err(|e| CliError::lib("--a/--b", e))?;
    let theta = a.a.ratio(&a.b);
    let cf = cf_expand(&theta, a.depth).map_err(|e| CliError::lib("--a/--b", e))?;
    let (mu, note) = match markov_constant(&cf) {
        Ok(m) => (m.value, format!("depth={} {}", m.depth, if m.exact { "exact" } else { "float" })),
        Err(qgraph::Error::Rational(_)) => (0.0, "rational".to_string()),
        Err(e) => return Err(CliError::lib("--a/--b", e)),
    };
    let threshold = std::f64::consts::PI.powi(2) * mu / a.a.value.max(a.b.value);
    let window = |lo: f64, hi: f64| {
        if lo < hi {
            format!("{} {}", num(lo), num(hi))
        } else {
            "empty".to_string()
        }
    };
    let mut s = String::new();
    s += &format!("a {}\n", num(a.a.value));
    s += &format!("b {}\n", num(a.b.value));
    s += &format!("theta {}{}\n", num(theta.to_f64()), if matches!(theta, Real::Float(_)) { " float" } else { "" });
    s += &format!("gamma_plus {} m={} side={}\n", num(g.gamma_plus), g.argmin_plus.0, side(g.argmin_plus.1));
    s += &format!("gamma_minus {} m={} side={}\n", num(g.gamma_minus), g.argmin_minus.0, side(g.argmin_minus.1));
    s += &format!("markov {} {note}\n", num(mu));
    s += &format!("threshold {}\n", num(threshold));
    // γ₋ < -α < T and γ₊ < α < T
    s += &format!("alpha_window_attractive {}\n", window(-threshold, -g.gamma_minus));
    s += &format!("alpha_window_repulsive {}\n", window(g.gamma_plus, threshold));
    emit(a.out.as_deref(), &s)
}

pub fn star(a: &StarArgs) -> Result<(), CliError> {
    let star = StarGraph::new(a.n).map_err(|e| CliError::lib("--n", e))?;
    let s = onshell_smatrix(&star, a.k).map_err(|e| CliError::lib("--k", e))?;
    let mut out = format!("n {}\nk {}\nsmatrix\n", a.n, num(a.k));
    for i in 0..s.nrows() {
        let row: Vec<String> = (0..s.ncols())
            .map(|j| {
                let z = s[(i, j)];
                let im = num(z.im);
                let sign = if im.starts_with('-') { "" } else { "+" };
                format!("{}{sign}{im}i", num(z.re))
            })
            .collect();
        out += &row.join(" ");
        out.push('\n');
    }
    out += "eigenvalues\n";
    for e in star_eigenvalues(&star) {
        out += &num(e);
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

pub fn trv_bands(a: &TrvArgs) -> Result<(), CliError> {
    let range = energy_range(&a.range)?;
    let kind = match a.kind {
        Kind::Square => LatticeKind::Square,
        Kind::Hex => LatticeKind::Hexagonal,
    };
    let spec = LatticeSpec::new(kind, a.length).map_err(|e| CliError::lib("--length", e))?;
    let set = match a.method {
        Method::Closed => lattice_bands(&spec, range).map_err(|e| CliError::lib("--emin/--emax", e))?,
        Method::Engine => {
            let g = spec.graph().map_err(|e| CliError::lib("--length", e))?;
            engine_scan(g, range, &ScanOptions::new(a.resolution))?.spectrum
        }
    };
    if let Some(path) = &a.output.svg {
        let (lo, hi) = spec.d_range();
        let (c, w) = (0.5 * (lo + hi), hi - lo);
        let (m, p) = marks(&set);
        let plot = CurvePlot {
            title: format!("{kind:?} lattice, edge length {}", short(a.length)),
            x_label: "E".into(),
            y_label: "quasimomentum term d".into(),
            x_range: (range.lo, range.hi),
            y_range: (c - 1.5 * w, c + 1.5 * w),
            curve: curve(range, |e| {
                let b0 = spec.secular_bracket(e, 0.0);
                -b0 / (spec.secular_bracket(e, 1.0) - b0)
            }),
            strips: vec![(lo, hi)],
            marks: m,
            points: p,
        };
        emit(Some(path), &render_curve(&plot)?)?;
    }
    emit(a.output.out.as_deref(), &format_set(&set, a.format))
}

pub fn scan(a: &ScanArgs) -> Result<(), CliError> {
    let range = energy_range(&a.range)?;
    if a.theta_grid == 0 {
        return Err(CliError::Usage("--theta-grid: must be at least 1".into()));
    }
    let g = load_graph(&a.graph).map_err(|e| CliError::lib("--graph", e))?;
    let opts = ScanOptions {
        theta_grid: a.theta_grid,
        ..ScanOptions::new(a.resolution)
    };
    let result = engine_scan(g, range, &opts)?;
    if let Some(path) = &a.samples {
        emit(Some(path), &write_scan_csv(&result.samples, result.rank_tol))?;
    }
    if let Some(path) = &a.output.svg {
        let tol = result.rank_tol.log10();
        let (m, p) = marks(&result.spectrum);
        let plot = CurvePlot {
            title: format!("secular indicator, {}", a.graph.display()),
            x_label: "E".into(),
            y_label: "log10 relative singular value".into(),
            x_range: (range.lo, range.hi),
            y_range: (tol - 2.0, 0.5),
            curve: result
                .samples
                .iter()
                .map(|s| (s.energy, s.singular_value.max(1e-300).log10().max(tol - 2.0)))
                .collect(),
            strips: vec![(tol - 2.0, tol)],
            marks: m,
            points: p,
        };
        emit(Some(path), &render_curve(&plot)?)?;
    }
    emit(a.output.out.as_deref(), &format_set(&result.spectrum, a.format))
}
