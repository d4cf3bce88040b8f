//! Floquet secular matrix of a periodic metric graph and the spectral scan.
//!
//! On every edge the solution of `-(d/dx - iA)²ψ = Eψ` is written as
//! `ψ(x) = e^{iAx} (c C(x) + s̃ κ_s S(x))` with `C = cos(√E x)`,
//! `S = sin(√E x)/√E` (analytically continued to `E ≤ 0`) and a fixed column
//! scale `κ_s = max(1, √|E|)`. This basis never divides by `sin(√E ℓ)`, so
//! Dirichlet-type flat bands appear as genuine rank drops. Every vertex
//! contributes `deg(v)` rows of `(U - I)ψ + i(U + I)ψ' = 0`; head ends of cut
//! edges carry the Floquet factor `e^{-iθ·shift}`. The matrix is square with
//! `2·#edges + #leads` columns.
//!
//! A spectral parameter belongs to the spectrum iff `M(E, θ)` is singular for
//! some quasimomentum `θ`; singularity is measured by the relative smallest
//! singular value `σ_min/max(σ_max, 1)`. When the shifts along the last axis
//! are all `0` or all-`0`-or-`1` in one direction, `M` is linear in
//! `e^{∓iθ_last}` and that axis is solved exactly as a matrix pencil.

use num_complex::Complex64;

use crate::graph::{EdgeEnd, MetricGraph};
use crate::numeric::{bisect_predicate, energy_of, golden_min, momentum_of, nelder_mead, NelderMead};
use crate::par::Execution;
use crate::spectral_set::{FlatBand, Interval, SpectralSet};
use crate::{CMatrix, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default rank-deficiency threshold on the relative singular value.
pub const RANK_TOL: f64 = 1e-8;

/// Secular matrix evaluator for one period cell.
#[derive(Debug, Clone)]
pub struct SecularSystem {
    graph: MetricGraph,
    blocks: Vec<(CMatrix, CMatrix)>,
    row_offsets: Vec<usize>,
    dim: usize,
    /// `±1` when every shift along the last axis lies in `{0, ±1}`, so that
    /// `M` is a linear pencil in `e^{∓iθ_last}`.
    pencil_sign: Option<f64>,
}

/// Smallest relative singular value of `M(E, θ)` at one sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSample {
    pub theta: Vec<f64>,
    /// Signed momentum: `k` for `E ≥ 0`, `-κ` for `E = -κ² < 0`.
    pub momentum: f64,
    pub energy: f64,
    /// `σ_min / σ_max` of the secular matrix.
    pub singular_value: f64,
}

impl DispersionSample {
    pub fn in_spectrum(&self, tol: f64) -> bool {
        self.singular_value <= tol
    }
}

/// Tuning of [`SecularSystem::spectrum_scan`].
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Grid step in signed momentum.
    pub resolution: f64,
    /// Threshold on `σ_min/σ_max` for rank deficiency.
    pub rank_tol: f64,
    /// Coarse quasimomentum grid points per dimension.
    pub theta_grid: usize,
    /// Number of coarse cells refined by Nelder–Mead.
    pub refine_starts: usize,
    /// Bisection tolerance (signed momentum) for band edges.
    pub edge_tol: f64,
    /// Grid-local minima of the indicator above this are not refined.
    pub refine_cap: f64,
    pub execution: Execution,
}

impl ScanOptions {
    pub fn new(resolution: f64) -> Self {
        Self {
            resolution,
            rank_tol: RANK_TOL,
            theta_grid: 32,
            refine_starts: 2,
            edge_tol: 1e-10,
            refine_cap: 0.1,
            execution: Execution::default(),
        }
    }
}

/// Output of a spectral scan: the spectrum and the raw grid samples.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub spectrum: SpectralSet,
    pub samples: Vec<DispersionSample>,
    /// Threshold used to classify samples.
    pub rank_tol: f64,
}

struct Basis {
    energy: Complex64,
    scale: f64,
    lead_derivative: Complex64,
    /// `(C(ℓ), S(ℓ))` per edge.
    edge_values: Vec<(Complex64, Complex64)>,
}

/// Builds the secular system of a graph.
pub fn assemble(graph: MetricGraph) -> Result<SecularSystem> {
    SecularSystem::new(graph)
}

impl SecularSystem {
    pub fn new(graph: MetricGraph) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(graph.vertices().len());
        let mut rows = 0;
        let mut blocks = Vec::with_capacity(graph.vertices().len());
        for v in graph.vertices() {
            row_offsets.push(rows);
            rows += v.degree();
            blocks.push(v.coupling.condition_blocks());
        }
        let dim = 2 * graph.edges().len() + graph.leads().len();
        if rows != dim {
            return Err(Error::Graph(format!(
                "{rows} vertex conditions for {dim} unknowns; every edge end must be attached once"
            )));
        }
        for e in graph.edges() {
            if e.length <= 0.0 {
                return Err(Error::Graph("zero-length edge".into()));
            }
        }
        let pencil_sign = match graph.dimension() {
            0 => None,
            d => {
                let last: Vec<i64> = graph.edges().iter().map(|e| e.shift[d - 1]).collect();
                if last.iter().all(|&n| n == 0 || n == 1) && last.contains(&1) {
                    Some(1.0)
                } else if last.iter().all(|&n| n == 0 || n == -1) && last.contains(&-1) {
                    Some(-1.0)
                } else {
                    None
                }
            }
        };
        Ok(Self {
            graph,
            blocks,
            row_offsets,
            dim,
            pencil_sign,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// Size of the (square) secular matrix.
    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Number of quasimomentum components.
    pub fn quasi_dimension(&self) -> usize {
        self.graph.dimension()
    }

    /// `M(E, θ)` for real energy, using `cosh`/`sinh` below zero.
    pub fn matrix(&self, energy: f64, theta: &[f64]) -> CMatrix {
        let c = |x: f64| Complex64::new(x, 0.0);
        let lead_derivative = if energy >= 0.0 {
            I * energy.sqrt()
        } else {
            c(-(-energy).sqrt())
        };
        let basis = Basis {
            energy: c(energy),
            scale: energy.abs().sqrt().max(1.0),
            lead_derivative,
            edge_values: self
                .graph
                .edges()
                .iter()
                .map(|e| (c(crate::numeric::cos_e(energy, e.length)), c(crate::numeric::sinc_e(energy, e.length))))
                .collect(),
        };
        self.fill(&basis, theta)
    }

    /// `M(k, θ)` for complex momentum `k` (energy `k²`, leads `∝ e^{ikx}`).
    pub fn matrix_at_momentum(&self, k: Complex64, theta: &[f64]) -> CMatrix {
        let basis = Basis {
            energy: k * k,
            scale: k.norm().max(1.0),
            lead_derivative: I * k,
            edge_values: self
                .graph
                .edges()
                .iter()
                .map(|e| {
                    let s = if k.norm() == 0.0 {
                        Complex64::new(e.length, 0.0)
                    } else {
                        (k * e.length).sin() / k
                    };
                    ((k * e.length).cos(), s)
                })
                .collect(),
        };
        self.fill(&basis, theta)
    }

    fn fill(&self, basis: &Basis, theta: &[f64]) -> CMatrix {
        assert_eq!(theta.len(), self.quasi_dimension(), "quasimomentum dimension");
        let ne = self.graph.edges().len();
        let mut m = CMatrix::zeros(self.dim, self.dim);
        let mut coeffs: Vec<(usize, Complex64, Complex64)> = Vec::with_capacity(2);
        for (vi, v) in self.graph.vertices().iter().enumerate() {
            let (a, d) = &self.blocks[vi];
            let r0 = self.row_offsets[vi];
            for (j, end) in v.slots.iter().enumerate() {
                coeffs.clear();
                // (column, value coefficient, outward-derivative coefficient)
                match *end {
                    EdgeEnd::Tail(e) => {
                        coeffs.push((2 * e, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
                        coeffs.push((2 * e + 1, Complex64::new(0.0, 0.0), Complex64::new(basis.scale, 0.0)));
                    }
                    EdgeEnd::Head(e) => {
                        let edge = &self.graph.edges()[e];
                        let floquet: f64 = edge.shift.iter().zip(theta).map(|(&n, &t)| n as f64 * t).sum();
                        let phase = Complex64::from_polar(1.0, edge.potential * edge.length - floquet);
                        let (cl, sl) = basis.edge_values[e];
                        coeffs.push((2 * e, phase * cl, phase * basis.energy * sl));
                        coeffs.push((2 * e + 1, phase * basis.scale * sl, -phase * basis.scale * cl));
                    }
                    EdgeEnd::Lead(l) => {
                        coeffs.push((2 * ne + l, Complex64::new(1.0, 0.0), basis.lead_derivative));
                    }
                }
                for r in 0..v.degree() {
                    for &(col, val, der) in &coeffs {
                        m[(r0 + r, col)] += a[(r, j)] * val + d[(r, j)] * der;
                    }
                }
            }
        }
        m
    }

    /// `σ_min / max(σ_max, 1)` of `M(E, θ)`.
    ///
    /// The floor matters where every row cancels (a loop at a Dirichlet
    /// point carries a two-dimensional solution space): `σ_max` is then
    /// rounding noise and the plain ratio would be meaningless. Away from
    /// such points the tail columns keep `σ_max ≳ 1`.
    pub fn relative_singular_value(&self, energy: f64, theta: &[f64]) -> f64 {
        let sv = self.matrix(energy, theta).singular_values();
        sv.min() / sv.max().max(1.0)
    }

    /// One dispersion sample at a signed momentum.
    pub fn sample(&self, momentum: f64, theta: &[f64]) -> DispersionSample {
        let energy = energy_of(momentum);
        DispersionSample {
            theta: theta.to_vec(),
            momentum,
            energy,
            singular_value: self.relative_singular_value(energy, theta),
        }
    }

    fn theta_grid(&self, n: usize) -> Vec<Vec<f64>> {
        self.theta_grid_dim(n, self.quasi_dimension())
    }

    fn theta_grid_dim(&self, n: usize, d: usize) -> Vec<Vec<f64>> {
        let axis: Vec<f64> = (0..n)
            .map(|j| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64)
            .collect();
        let mut pts = vec![Vec::new()];
        for _ in 0..d {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&t| {
                        let mut q = p.clone();
                        q.push(t);
                        q
                    })
                })
                .collect();
        }
        pts
    }

    fn refine(&self, energy: f64, start: &[f64], step: f64, target: f64) -> (Vec<f64>, f64) {
        nelder_mead(
            |t| self.relative_singular_value(energy, t),
            start,
            NelderMead {
                initial_step: step,
                max_iter: 150 * start.len().max(1),
                target,
                x_tol: 1e-12,
            },
        )
    }

    /// Exact candidates for the last quasimomentum component with the others
    /// fixed: writing `M = A + wB`, `w = e^{∓iθ_last}`, the roots of
    /// `det(A + wB)` come from the eigenvalues `μ` of `(A + cB)^{-1}B` as
    /// `w = c - 1/μ`. Returns `(θ_last, |ln|w||)` sorted by distance from the
    /// unit circle; empty when the pencil is singular or not available.
    fn pencil_roots(&self, energy: f64, prefix: &[f64]) -> Vec<(f64, f64)> {
        let Some(sign) = self.pencil_sign else {
            return Vec::new();
        };
        let mut theta = prefix.to_vec();
        theta.push(0.0);
        let m0 = self.matrix(energy, &theta);
        *theta.last_mut().unwrap() = -sign * std::f64::consts::FRAC_PI_2;
        let m1 = self.matrix(energy, &theta);
        let b = (&m0 - &m1) / (Complex64::new(1.0, 0.0) - I);
        let a = &m0 - &b;
        let scale = m0.norm().max(1.0);
        for c in [Complex64::new(0.43, 0.31), Complex64::new(-1.7, 2.3)] {
            let Some(k) = (&a + &b * c).lu().solve(&b) else {
                continue;
            };
            if !k.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || k.norm() > 1e12 * scale {
                continue;
            }
            let Some(schur) = nalgebra::Schur::try_new(k.clone(), f64::EPSILON, 2000) else {
                continue;
            };
            let Some(mu) = schur.eigenvalues() else {
                continue;
            };
            let floor = 1e-12 * k.norm().max(1e-300);
            let mut roots: Vec<(f64, f64)> = mu
                .iter()
                .filter(|m| m.norm() > floor)
                .map(|m| {
                    let w = c - Complex64::new(1.0, 0.0) / m;
                    (-w.arg() / sign, w.norm().ln().abs())
                })
                .filter(|r| r.1.is_finite())
                .collect();
            roots.sort_by(|x, y| x.1.total_cmp(&y.1));
            return roots;
        }
        Vec::new()
    }

    /// Starting points from the pencil roots over the given prefixes.
    fn pencil_starts(&self, energy: f64, prefixes: &[Vec<f64>], per_prefix: usize) -> Vec<(f64, Vec<f64>)> {
        let mut out = Vec::new();
        for p in prefixes {
            for (t, _) in self.pencil_roots(energy, p).into_iter().take(per_prefix) {
                let mut th = p.clone();
                th.push(t);
                out.push((self.relative_singular_value(energy, &th), th));
            }
        }
        out
    }

    /// Minimises the relative singular value over the Brillouin zone. The
    /// last axis is solved exactly through [`Self::pencil_roots`] when the
    /// shifts allow it; otherwise a coarse grid is searched. Nelder–Mead then
    /// polishes the best cells. Stops early once `target` is reached.
    pub fn min_over_theta(&self, momentum: f64, opts: &ScanOptions) -> DispersionSample {
        let energy = energy_of(momentum);
        let d = self.quasi_dimension();
        if d == 0 {
            return self.sample(momentum, &[]);
        }
        let target = opts.rank_tol * 1e-2;
        let done = |theta: Vec<f64>, v: f64| DispersionSample {
            theta,
            momentum,
            energy,
            singular_value: v,
        };
        let mut coarse: Vec<(f64, Vec<f64>)> = Vec::new();
        if self.pencil_sign.is_some() {
            let prefixes = self.theta_grid_dim(opts.theta_grid, d - 1);
            coarse = self.pencil_starts(energy, &prefixes, 2);
        }
        if coarse.is_empty() {
            coarse = self
                .theta_grid(opts.theta_grid)
                .into_iter()
                .map(|t| (self.relative_singular_value(energy, &t), t))
                .collect();
        }
        coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
        if coarse[0].0 <= target {
            let (v, t) = coarse.swap_remove(0);
            return done(t, v);
        }
        let step = 2.0 * std::f64::consts::PI / opts.theta_grid as f64;
        let mut best = (coarse[0].1.clone(), coarse[0].0);
        for (_, start) in coarse.iter().take(opts.refine_starts.max(1)) {
            let (t, v) = self.refine(energy, start, 0.5 * step, target);
            if v < best.1 {
                best = (t, v);
            }
            if best.1 <= target {
                break;
            }
        }
        done(best.0, best.1)
    }

    /// Local minimisation over θ from the given starting points only.
    fn warm_min(&self, momentum: f64, starts: &[&[f64]], opts: &ScanOptions) -> DispersionSample {
        let energy = energy_of(momentum);
        if self.quasi_dimension() == 0 {
            return self.sample(momentum, &[]);
        }
        let target = opts.rank_tol * 1e-2;
        let step = std::f64::consts::PI / opts.theta_grid as f64;
        let mut best: Option<(Vec<f64>, f64)> = None;
        // exact roots along the last axis at the warm prefixes
        let prefixes: Vec<Vec<f64>> = starts.iter().map(|s| s[..s.len() - 1].to_vec()).collect();
        let mut seeded = self.pencil_starts(energy, &prefixes, 2);
        seeded.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((v, t)) = seeded.first() {
            if *v <= target {
                return DispersionSample {
                    theta: t.clone(),
                    momentum,
                    energy,
                    singular_value: *v,
                };
            }
            best = Some((t.clone(), *v));
        }
        let seeded_starts: Vec<&[f64]> = seeded.iter().take(2).map(|(_, t)| t.as_slice()).collect();
        for s in seeded_starts.iter().chain(starts) {
            let (t, v) = self.refine(energy, s, step, target);
            if best.as_ref().is_none_or(|b| v < b.1) {
                best = Some((t, v));
            }
            if v <= target {
                break;
            }
        }
        let (theta, singular_value) = best.expect("at least one start");
        DispersionSample {
            theta,
            momentum,
            energy,
            singular_value,
        }
    }

    /// Whether `E = k0²` is a flat band: the secular matrix is rank deficient
    /// at three distinct quasimomenta. Requires `sin(k0 ℓ_e) = 0` on some edge.
    pub fn flat_band_test(&self, k0: f64) -> Result<bool> {
        let hits = self
            .graph
            .edges()
            .iter()
            .any(|e| (k0 * e.length).sin().abs() <= 1e-8);
        if !hits {
            return Err(Error::Precondition(format!(
                "k0 = {k0} is not a Dirichlet point of any edge (sin(k0 ℓ) ≠ 0)"
            )));
        }
        Ok(self.is_flat_at(k0 * k0, RANK_TOL))
    }

    fn is_flat_at(&self, energy: f64, tol: f64) -> bool {
        const PROBES: [[f64; 3]; 3] = [[0.0, 0.0, 0.0], [1.1, 0.4, -0.7], [-2.3, 2.9, 1.7]];
        let d = self.quasi_dimension();
        PROBES
            .iter()
            .all(|p| self.relative_singular_value(energy, &p[..d.min(3)]) <= tol)
    }

    /// Candidate Dirichlet momenta `mπ/ℓ_e` in `[k_lo, k_hi]`, `k > 0`.
    fn dirichlet_candidates(&self, k_lo: f64, k_hi: f64) -> Vec<f64> {
        let mut ks = Vec::new();
        for e in self.graph.edges() {
            let m0 = ((k_lo.max(0.0)) * e.length / std::f64::consts::PI).floor().max(1.0) as u64;
            let mut m = m0;
            loop {
                let k = m as f64 * std::f64::consts::PI / e.length;
                if k > k_hi {
                    break;
                }
                if k >= k_lo && k > 0.0 {
                    ks.push(k);
                }
                m += 1;
            }
        }
        ks.sort_by(|a, b| a.total_cmp(b));
        ks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        ks
    }

    /// Scans `range` (in energy) on a uniform signed-momentum grid and
    /// returns bands, flat bands and the raw samples.
    pub fn spectrum_scan(&self, range: Interval, opts: &ScanOptions) -> Result<ScanResult> {
        if !(range.lo < range.hi) || !range.lo.is_finite() || !range.hi.is_finite() {
            return Err(Error::param("E_range", format!("empty or unbounded range [{}, {}]", range.lo, range.hi)));
        }
        if !(opts.resolution > 0.0) {
            return Err(Error::param("resolution", "must be positive"));
        }
        let s_lo = momentum_of(range.lo);
        let s_hi = momentum_of(range.hi);
        let n = ((s_hi - s_lo) / opts.resolution).ceil().max(1.0) as usize;
        let grid: Vec<f64> = (0..=n)
            .map(|i| if i == n { s_hi } else { s_lo + i as f64 * opts.resolution })
            .collect();
        let samples: Vec<DispersionSample> = opts.execution.map(&grid, |&s| self.min_over_theta(s, opts));
        let tol = opts.rank_tol;
        let inside = |x: &DispersionSample| x.singular_value <= tol;

        // Accepted runs, edges polished by bisection with warm starts.
        let mut runs: Vec<(f64, f64)> = Vec::new();
        let mut start = if inside(&samples[0]) { Some(grid[0]) } else { None };
        for i in 1..samples.len() {
            let (a, b) = (&samples[i - 1], &samples[i]);
            let starts = [a.theta.as_slice(), b.theta.as_slice()];
            let pred = |s: f64| self.warm_min(s, &starts, opts).singular_value <= tol;
            match (inside(a), inside(b)) {
                (false, true) => start = Some(bisect_predicate(pred, b.momentum, a.momentum, opts.edge_tol)),
                (true, false) => {
                    let end = bisect_predicate(pred, a.momentum, b.momentum, opts.edge_tol);
                    runs.push((start.take().unwrap_or(a.momentum), end));
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, s_hi));
        }

        // Features narrower than one grid step: refine grid-local minima.
        let refined: Vec<Option<(f64, f64)>> = opts.execution.map_range(samples.len(), |i| {
            if i == 0 || i + 1 == samples.len() {
                return None;
            }
            let (l, c, r) = (&samples[i - 1], &samples[i], &samples[i + 1]);
            let v = c.singular_value;
            if v <= tol || v > opts.refine_cap || v > l.singular_value || v > r.singular_value {
                return None;
            }
            let starts = [l.theta.as_slice(), c.theta.as_slice(), r.theta.as_slice()];
            let f = |s: f64| self.warm_min(s, &starts, opts).singular_value;
            let (sm, fm) = golden_min(f, l.momentum, r.momentum, opts.edge_tol * 1e-2);
            if fm > tol {
                return None;
            }
            let pred = |s: f64| self.warm_min(s, &starts, opts).singular_value <= tol;
            let lo = bisect_predicate(pred, sm, l.momentum, opts.edge_tol);
            let hi = bisect_predicate(pred, sm, r.momentum, opts.edge_tol);
            Some((lo.min(sm), hi.max(sm)))
        });
        runs.extend(refined.into_iter().flatten());
        let runs = crate::numeric::merge_intervals(runs, 0.0);

        let d = self.quasi_dimension();
        let mut bands = Vec::new();
        let mut flats = Vec::new();
        for (lo, hi) in runs {
            if hi - lo < 1e-6 {
                let starts_theta = vec![0.0; d];
                let (sm, _) = golden_min(
                    |s| self.warm_min(s, &[starts_theta.as_slice()], opts).singular_value,
                    lo - opts.edge_tol,
                    hi + opts.edge_tol,
                    1e-14,
                );
                let e = energy_of(sm);
                if d == 0 {
                    flats.push(FlatBand {
                        energy: e,
                        infinite_multiplicity: false,
                    });
                    continue;
                }
                if self.is_flat_at(e, tol) || self.is_flat_at(energy_of(0.5 * (lo + hi)), tol) {
                    flats.push(FlatBand {
                        energy: e,
                        infinite_multiplicity: true,
                    });
                    continue;
                }
            }
            bands.push((energy_of(lo), energy_of(hi)));
        }
        if d > 0 {
            let k_lo = momentum_of(range.lo.max(0.0));
            for k in self.dirichlet_candidates(k_lo, s_hi) {
                if self.is_flat_at(k * k, tol) {
                    flats.push(FlatBand {
                        energy: k * k,
                        infinite_multiplicity: true,
                    });
                }
            }
        }
        // Slivers clipped by the window edge next to a flat band belong to it.
        let slack = |e: f64| 4.0 * opts.edge_tol * e.abs().sqrt().max(1.0);
        bands.retain(|&(lo, hi)| {
            momentum_of(hi) - momentum_of(lo) >= 1e-6
                || !flats.iter().any(|f| f.energy >= lo - slack(lo) && f.energy <= hi + slack(hi))
        });
        let spectrum = SpectralSet::from_parts(range, bands, flats, 0.0);
        Ok(ScanResult {
            spectrum,
            samples,
            rank_tol: tol,
        })
    }

    /// Whether `E` is in the spectrum: `∃θ` with `σ_min/σ_max ≤ rank_tol`.
    pub fn in_spectrum(&self, energy: f64, opts: &ScanOptions) -> bool {
        self.min_over_theta(momentum_of(energy), opts).singular_value <= opts.rank_tol
    }
}
