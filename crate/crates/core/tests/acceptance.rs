//! The nine acceptance criteria, run sequentially so that timings are
//! meaningful. Prints one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use qgraph::amo::{amo_bands, butterfly, total_bandwidth, AmoSpec};
use qgraph::chain::{chain_graph, constant_flux_bands, rational_flux_bands};
use qgraph::coupling::{boundary_form, VertexCoupling};
use qgraph::diophantine::{cf_expand, markov_constant, Real};
use qgraph::lattice::{classify_golden, enumerate_gaps, golden_a, golden_limit, golden_mean, RectLattice, Regime};
use qgraph::par::Execution;
use qgraph::secular::{ScanOptions, SecularSystem};
use qgraph::trv::*;
use qgraph::{CMatrix, Interval, SpectralSet};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{random_unitary, unitarity_error};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn run(id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let t = start.elapsed();
    let outcome = outcome.and_then(|()| {
        if t <= limit {
            Ok(())
        } else {
            Err(format!("took {:.2} s, limit {:.0} s", t.as_secs_f64(), limit.as_secs_f64()))
        }
    });
    match &outcome {
        Ok(()) => println!("PASS {id}. {title} ({:.2} s)", t.as_secs_f64()),
        Err(m) => println!("FAIL {id}. {title} ({:.2} s): {m}", t.as_secs_f64()),
    }
    outcome.is_ok()
}

/// Band edges agree within one grid step of signed momentum.
fn within_one_step(a: &SpectralSet, b: &SpectralSet, res: f64) -> Check {
    ensure!(a.bands.len() == b.bands.len(), "{} vs {} bands", a.bands.len(), b.bands.len());
    let k = |e: f64| e.signum() * e.abs().sqrt();
    for (x, y) in a.bands.iter().zip(&b.bands) {
        ensure!(
            (k(x.lo) - k(y.lo)).abs() <= res && (k(x.hi) - k(y.hi)).abs() <= res,
            "{x:?} vs {y:?}"
        );
    }
    Ok(())
}

/// Refines an isolated eigenvalue of a compact graph by minimising σ_min.
fn refine_eigenvalue(sys: &SecularSystem, guess: f64) -> f64 {
    let f = |e: f64| sys.relative_singular_value(e, &[]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (guess - 0.05, guess + 0.05);
    while b - a > 1e-13 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn star_eigenvalues_check() -> Check {
    for (n, want) in [(3, -3.0), (4, -1.0)] {
        let star = StarGraph::new(n).unwrap();
        let closed = star_eigenvalues(&star);
        ensure!(closed.len() == 1 && (closed[0] - want).abs() <= 1e-9, "N={n}: closed form {closed:?}");
        let sys = SecularSystem::new(star.graph().unwrap()).unwrap();
        let scan = sys.spectrum_scan(Interval::new(-10.0, -0.05), &ScanOptions::new(0.01)).unwrap();
        let found: Vec<f64> = scan.spectrum.flat_bands.iter().map(|f| f.energy).collect();
        ensure!(found.len() == 1 && scan.spectrum.bands.is_empty(), "N={n}: engine found {found:?}");
        let e = refine_eigenvalue(&sys, found[0]);
        ensure!((e - want).abs() <= 1e-9, "N={n}: engine {e}");
        ensure!(sys.relative_singular_value(e, &[]) <= 1e-8, "N={n}: not rank deficient");
    }
    Ok(())
}

fn smatrix_check() -> Check {
    let mut rng = StdRng::seed_from_u64(20);
    for n in 3..=8 {
        let star = StarGraph::new(n).unwrap();
        ensure!(&onshell_smatrix(&star, 1.0).unwrap() == star.coupling().matrix(), "N={n}: S(1) ≠ U");
        for _ in 0..20 {
            let k = 10f64.powf(rng.random_range(-2.0..3.0));
            let err = unitarity_error(&onshell_smatrix(&star, k).unwrap());
            ensure!(err <= 1e-10, "N={n} k={k}: unitarity defect {err}");
        }
        let dev = (onshell_smatrix(&star, 1e4).unwrap() - CMatrix::identity(n, n)).singular_values().max();
        if n % 2 == 1 {
            ensure!(dev <= 1e-3, "N={n}: ‖S - I‖ = {dev}");
        } else {
            ensure!(dev >= 0.5, "N={n}: ‖S - I‖ = {dev}");
        }
    }
    Ok(())
}

fn chain_check() -> Check {
    let e_max = 30.0;
    let range = Interval::new(0.0, e_max);
    let opts = ScanOptions::new(0.01);

    let free = constant_flux_bands(0.0, 0.0, range).unwrap();
    ensure!(free.bands.len() == 1 && free.bands[0].lo == 0.0 && free.bands[0].hi == e_max, "{:?}", free.bands);
    let flats: Vec<f64> = free.flat_bands.iter().map(|f| f.energy).collect();
    ensure!(flats == vec![1.0, 4.0, 9.0, 16.0, 25.0], "{flats:?}");
    let engine = SecularSystem::new(chain_graph(0.0, &[0.0]).unwrap()).unwrap().spectrum_scan(range, &opts).unwrap();
    ensure!(engine.spectrum.bands.len() == 1, "engine: {:?}", engine.spectrum.bands);
    ensure!(engine.spectrum.flat_bands.len() == 5, "engine flats: {:?}", engine.spectrum.flat_bands);

    for alpha in [-1.0, 1.0, 3.0] {
        let half = constant_flux_bands(alpha, 0.5, Interval::new(-5.0, e_max)).unwrap();
        ensure!(half.bands.is_empty() && !half.flat_bands.is_empty(), "A=1/2, α={alpha}: {:?}", half.bands);
    }
    let engine = SecularSystem::new(chain_graph(1.0, &[0.5]).unwrap())
        .unwrap()
        .spectrum_scan(Interval::new(0.1, e_max), &opts)
        .unwrap();
    ensure!(engine.spectrum.bands.is_empty(), "A=1/2 engine bands {:?}", engine.spectrum.bands);

    let third = rational_flux_bands(1.0, 1, 3, 0.0, Interval::new(-20.0, 49.0)).unwrap();
    ensure!(third.bands.iter().filter(|b| b.hi <= 1.0).count() == 3, "below 1: {:?}", third.bands);
    for n in 1..7 {
        let (lo, hi) = ((n * n) as f64, ((n + 1) * (n + 1)) as f64);
        let c = third.bands.iter().filter(|b| b.lo >= lo && b.hi <= hi).count();
        ensure!(c == 3, "window ({lo}, {hi}): {c} bands");
    }

    let mut rng = StdRng::seed_from_u64(33);
    let res = 0.01;
    let window = Interval::new(-2.0, 16.0);
    for _ in 0..20 {
        let alpha: f64 = rng.random_range(-4.0..4.0);
        let a: f64 = rng.random_range(0.0..0.48);
        let exact = constant_flux_bands(alpha, a, window).unwrap();
        let sys = SecularSystem::new(chain_graph(alpha, &[a]).unwrap()).unwrap();
        let scan = sys.spectrum_scan(window, &ScanOptions::new(res)).unwrap();
        within_one_step(&scan.spectrum, &exact, res).map_err(|m| format!("α={alpha:.4} A={a:.4}: {m}"))?;
    }
    Ok(())
}

fn golden_check() -> Check {
    let a1 = golden_a(1).unwrap();
    ensure!((a1 - 4.2985).abs() <= 5e-4, "A₁ = {a1}");
    // π²/√5 = 4.41382, the window edge to three decimals is 4.414
    ensure!((golden_limit() - 4.414).abs() <= 5e-4, "limit = {}", golden_limit());
    let a = golden_mean();
    let b = 1.0;
    let e_max = 1e6;
    // gap j sits at k = πF_{2j}/a, so E ≤ 10⁶ resolves N ≤ 7
    let top = golden_a(8).unwrap();
    for i in 0..10 {
        let x = a1 + (top - a1) * (i as f64 + 0.5) / 10.0;
        let alpha = -x / a;
        let Regime::Finite(n) = classify_golden(alpha, a).unwrap().regime else {
            return Err(format!("αa = {}: not in the finite regime", -x));
        };
        let r = enumerate_gaps(&RectLattice::new(a, b, alpha).unwrap(), e_max).unwrap();
        ensure!(r.count == n, "αa = {:.6}: {} gaps found, threshold count {n}", -x, r.count);
    }
    for x in [-4.29, -3.0, -1.0, 0.5, 2.0, 4.0, 4.41] {
        let alpha = x / a;
        ensure!(classify_golden(alpha, a).unwrap().regime == Regime::NoGaps, "αa = {x}: not regime (ii)");
        let r = enumerate_gaps(&RectLattice::new(a, b, alpha).unwrap(), e_max).unwrap();
        ensure!(r.count == 0, "αa = {x}: {} gaps", r.count);
    }
    Ok(())
}

fn rect_check() -> Check {
    let r = enumerate_gaps(&RectLattice::new(1.0, 1.0, 0.0).unwrap(), 1e5).unwrap();
    ensure!(r.count == 0, "α = 0: {} gaps", r.count);
    let lat = RectLattice::new(1.0, 1.0, 0.5).unwrap();
    let xs: Vec<f64> = (1..=10).map(|i| 100.0 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&k| enumerate_gaps(&lat, k * k).unwrap().count as f64).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    ensure!(syy > 0.0, "gap count does not grow: {ys:?}");
    let r2 = sxy * sxy / (sxx * syy);
    ensure!(r2 >= 0.99 && sxy > 0.0, "R² = {r2}, counts {ys:?}");
    Ok(())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 2]
}

fn trv_check() -> Check {
    let ell = 1.5;
    let sq = asymptotic_report(&LatticeSpec::new(LatticeKind::Square, ell).unwrap(), 10, 20).unwrap();
    let gaps: Vec<f64> = sq.iter().map(|r| r.gap_width).collect();
    let m = median(&gaps);
    ensure!(gaps.iter().all(|g| (g - m).abs() <= 0.1 * m), "square gaps {gaps:?}");
    ensure!(sq.windows(2).all(|w| w[1].band_width > w[0].band_width), "square bands do not grow");

    let hex = asymptotic_report(&LatticeSpec::new(LatticeKind::Hexagonal, ell).unwrap(), 10, 20).unwrap();
    let bands: Vec<f64> = hex.iter().map(|r| r.band_width).collect();
    let m = median(&bands);
    ensure!(bands.iter().all(|b| (b - m).abs() <= 0.1 * m), "hex bands {bands:?}");
    let open: Vec<f64> = hex.iter().filter(|r| !r.gap_has_flat_band).map(|r| r.gap_width).collect();
    ensure!(open.len() >= 4 && open.windows(2).all(|w| w[1] > w[0]), "hex gaps {open:?}");

    let e_max = 40.0;
    let range = Interval::new(-4.0, e_max);
    let res = 0.01;
    for kind in [LatticeKind::Square, LatticeKind::Hexagonal] {
        let spec = LatticeSpec::new(kind, ell).unwrap();
        let exact = lattice_bands(&spec, range).unwrap();
        let sys = SecularSystem::new(spec.graph().unwrap()).unwrap();
        let scan = sys.spectrum_scan(range, &ScanOptions::new(res)).unwrap().spectrum;
        within_one_step(&scan, &exact, res).map_err(|m| format!("{kind:?}: {m}"))?;
        let n_max = (e_max.sqrt() * ell / PI).floor() as usize;
        for n in 1..=n_max {
            let e = (n as f64 * PI / ell).powi(2);
            ensure!(
                scan.flat_bands.iter().any(|f| (f.energy - e).abs() <= 1e-8 * e && f.infinite_multiplicity),
                "{kind:?}: no flat band at k = {n}π/ℓ"
            );
        }
        for l in [0.5, 1.5, 6.0] {
            let neg = lattice_bands(&LatticeSpec::new(kind, l).unwrap(), Interval::new(-50.0, 0.0)).unwrap();
            ensure!(neg.bands.iter().any(|b| b.lo < 0.0), "{kind:?} ℓ={l}: no negative spectrum");
        }
    }
    Ok(())
}

fn amo_check() -> Check {
    let zero = amo_bands(&AmoSpec::new(0, 1, 0.0).unwrap());
    ensure!(zero.len() == 1 && zero[0].lo.abs() <= 1e-12 && (zero[0].hi - 4.0).abs() <= 1e-12, "{zero:?}");
    let data = butterfly(20, 512, Execution::default()).unwrap();
    for row in &data.rows {
        if row.p == 0 {
            continue;
        }
        let mirror = data
            .rows
            .iter()
            .find(|r| r.q == row.q && r.p == row.q as i64 - row.p)
            .ok_or(format!("no mirror for {}/{}", row.p, row.q))?;
        ensure!(mirror.bands.len() == row.bands.len(), "{}/{}", row.p, row.q);
        for (x, y) in row.bands.iter().zip(&mirror.bands) {
            ensure!((x.lo - y.lo).abs() <= 1e-9 && (x.hi - y.hi).abs() <= 1e-9, "{}/{}", row.p, row.q);
        }
    }
    let widths: Vec<f64> = [(1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]
        .iter()
        .map(|&(p, q)| total_bandwidth(&amo_bands(&AmoSpec::new(p, q, 0.0).unwrap())))
        .collect();
    ensure!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
    Ok(())
}

fn diophantine_check() -> Check {
    let golden = cf_expand(&Real::golden(), 40).unwrap();
    let m = markov_constant(&golden).unwrap();
    ensure!((m.value - 1.0 / 5f64.sqrt()).abs() <= 1e-6 && m.depth == 40, "{m:?}");
    for theta in [Real::golden(), Real::sqrt(2).unwrap(), Real::sqrt(7).unwrap()] {
        let cf = cf_expand(&theta, 40).unwrap();
        let inv = cf_expand(&theta.recip().unwrap(), 40).unwrap();
        let (x, y) = (markov_constant(&cf).unwrap().value, markov_constant(&inv).unwrap().value);
        ensure!((x - y).abs() <= 1e-9, "μ(θ) = {x}, μ(1/θ) = {y}");
        ensure!(cf.satisfies_convergent_bound() && inv.satisfies_convergent_bound(), "convergent bound");
    }
    Ok(())
}

fn coupling_check() -> Check {
    let mut rng = StdRng::seed_from_u64(9);
    for n in 1..=6 {
        for _ in 0..100 {
            let v = VertexCoupling::new(random_unitary(n, &mut rng)).map_err(|e| e.to_string())?;
            let basis = v.admissible_basis(1e-10);
            ensure!(basis.len() == n, "degree {n}: kernel dimension {}", basis.len());
            for x in &basis {
                for y in &basis {
                    let f = boundary_form(x, y).unwrap().norm();
                    ensure!(f <= 1e-10, "degree {n}: boundary form {f}");
                }
            }
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run(1, "star-graph eigenvalues", s(1), star_eigenvalues_check),
        run(2, "on-shell S-matrix", s(1), smatrix_check),
        run(3, "magnetic chain", s(30), chain_check),
        run(4, "golden-mean Bethe-Sommerfeld thresholds", s(120), golden_check),
        run(5, "rectangular lattice sanity", s(30), rect_check),
        run(6, "time-reversal-violating lattices", s(60), trv_check),
        run(7, "almost Mathieu", s(60), amo_check),
        run(8, "Diophantine", s(1), diophantine_check),
        run(9, "coupling algebra", s(10), coupling_check),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
