//! The magnetic ring chain: unit circles touching at δ-coupled vertices,
//! with a vector potential `±A_j` on the two half-circles of ring `j`.
//!
//! Away from the Dirichlet values `k ∈ ℤ` the chain is unitarily related to
//! the Jacobi operator `(L_A u)_j = 2cos(πA_j) u_{j+1} + 2cos(πA_{j-1}) u_{j-1}`
//! through the scalar function `η(k) = 4cos kπ + α sin kπ / k`: `k²` is in
//! the spectrum iff `η(k)` lies in the spectrum of `L_A`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::graph::{CouplingSpec, GraphBuilder, MetricGraph};
use crate::jacobi::{PeriodicJacobi, BLOCH_PHASES};
use crate::numeric::{bisect_root, cos_e, energy_of, merge_intervals, momentum_of, sinc_e};
use crate::spectral_set::{FlatBand, Interval, SpectralSet};
use crate::{Error, Result};

/// Grid step (in signed momentum) used to locate stationary points of `η`.
const STATIONARY_STEP: f64 = 1.0 / 64.0;

/// `η` as an entire function of the energy.
pub fn eta_energy(energy: f64, alpha: f64) -> f64 {
    4.0 * cos_e(energy, PI) + alpha * sinc_e(energy, PI)
}

/// `η` at signed momentum `s` (`k = s` for `s ≥ 0`, `k = i|s|` for `s < 0`).
///
/// `η(iκ) = 4cosh κπ + α sinh κπ / κ`, and `η(0) = 4 + απ`.
pub fn eta(s: f64, alpha: f64) -> f64 {
    eta_energy(energy_of(s), alpha)
}

/// `η` at complex momentum.
pub fn eta_complex(k: Complex64, alpha: f64) -> Complex64 {
    if k.norm() < 1e-300 {
        return Complex64::new(4.0 + alpha * PI, 0.0);
    }
    let kp = k * PI;
    kp.cos() * 4.0 + kp.sin() / k * alpha
}

/// `dη/dE`.
pub fn eta_prime_energy(energy: f64, alpha: f64) -> f64 {
    let s = sinc_e(energy, PI);
    let ds = if energy.abs() < 1e-4 {
        -PI.powi(3) / 6.0 + energy * PI.powi(5) / 60.0
    } else {
        (PI * cos_e(energy, PI) - s) / (2.0 * energy)
    };
    -2.0 * PI * s + alpha * ds
}

/// `dη/ds` in signed momentum.
pub fn eta_prime(s: f64, alpha: f64) -> f64 {
    2.0 * s.abs() * eta_prime_energy(energy_of(s), alpha)
}

/// Breakpoints in signed momentum splitting `[s_lo, s_hi]` into pieces on
/// which `η` is strictly monotone. Integers `k` are included as well so that
/// pieces never straddle a Dirichlet value.
pub fn monotone_pieces(s_lo: f64, s_hi: f64, alpha: f64) -> Vec<f64> {
    let mut cuts = vec![s_lo, s_hi];
    if s_lo < 0.0 && 0.0 < s_hi {
        cuts.push(0.0);
    }
    let first = s_lo.max(0.0).ceil() as i64;
    let last = s_hi.floor() as i64;
    for n in first.max(1)..=last {
        cuts.push(n as f64);
    }
    let g = |s: f64| eta_prime_energy(energy_of(s), alpha);
    let n = ((s_hi - s_lo) / STATIONARY_STEP).ceil().max(1.0) as usize;
    let h = (s_hi - s_lo) / n as f64;
    let mut prev = g(s_lo);
    for i in 1..=n {
        let x = s_lo + h * i as f64;
        let cur = g(x);
        if prev == 0.0 {
            cuts.push(x - h);
        } else if prev * cur < 0.0 {
            cuts.push(bisect_root(g, x - h, x, 1e-14));
        }
        prev = cur;
    }
    cuts.retain(|c| (s_lo..=s_hi).contains(c));
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    cuts
}

/// Energies `E ∈ range` with `η(√E) ∈ [target.lo, target.hi]`, as closed
/// intervals (degenerate targets give degenerate intervals).
pub fn eta_preimage(target: Interval, range: Interval, alpha: f64) -> Vec<Interval> {
    let cuts = monotone_pieces(momentum_of(range.lo), momentum_of(range.hi), alpha);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ea, eb) = (eta(a, alpha), eta(b, alpha));
        let (lo, hi) = (ea.min(eb), ea.max(eb));
        let t1 = target.lo.max(lo);
        let t2 = target.hi.min(hi);
        if t1 > t2 {
            continue;
        }
        let invert = |t: f64| -> f64 {
            if t <= lo {
                return if ea <= eb { a } else { b };
            }
            if t >= hi {
                return if ea <= eb { b } else { a };
            }
            bisect_root(|s| eta(s, alpha) - t, a, b, 1e-14)
        };
        let (s1, s2) = (invert(t1), invert(t2));
        out.push((energy_of(s1.min(s2)), energy_of(s1.max(s2))));
    }
    merge_intervals(out, 1e-12)
        .into_iter()
        .map(|(l, h)| Interval::new(l, h))
        .collect()
}

/// Dirichlet eigenvalues `n²` inside `range`; always flat bands of the chain.
pub fn dirichlet_flat_bands(range: Interval) -> Vec<FlatBand> {
    let first = momentum_of(range.lo).max(0.0).ceil().max(1.0) as u64;
    let last = momentum_of(range.hi).floor();
    if last < 1.0 {
        return Vec::new();
    }
    (first..=last as u64)
        .map(|n| FlatBand {
            energy: (n * n) as f64,
            infinite_multiplicity: true,
        })
        .collect()
}

/// Spectrum with the same flux `A` through every ring:
/// `|η(k)| ≤ 4|cos πA|` plus the flat bands `n²`.
///
/// For half-integer `A` the inequality degenerates to the zeros of `η`, which
/// are then flat bands too.
pub fn constant_flux_bands(alpha: f64, flux: f64, range: Interval) -> Result<SpectralSet> {
    check_range(range)?;
    let w = 4.0 * (PI * flux).cos().abs();
    let mut flat = dirichlet_flat_bands(range);
    let pieces = eta_preimage(Interval::new(-w, w), range, alpha);
    if w < 1e-12 {
        flat.extend(pieces.iter().map(|i| FlatBand {
            energy: 0.5 * (i.lo + i.hi),
            infinite_multiplicity: true,
        }));
        return Ok(SpectralSet::from_parts(range, std::iter::empty(), flat, 0.0));
    }
    Ok(SpectralSet::from_parts(range, pieces.iter().map(|i| (i.lo, i.hi)), flat, 1e-12))
}

/// The Jacobi operator `L_A` for one period of fluxes.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOperatorSpec {
    pub fluxes: Vec<f64>,
}

impl JacobiOperatorSpec {
    /// Fluxes `A_j = p j / q + θ`, `j = 0..q`.
    pub fn linear(p: i64, q: u64, theta: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("q", "must be positive"));
        }
        Ok(Self {
            fluxes: (0..q).map(|j| p as f64 * j as f64 / q as f64 + theta).collect(),
        })
    }

    pub fn hoppings(&self) -> Vec<f64> {
        self.fluxes.iter().map(|a| 2.0 * (PI * a).cos()).collect()
    }

    pub fn operator(&self) -> Result<PeriodicJacobi> {
        PeriodicJacobi::new(vec![0.0; self.fluxes.len()], self.hoppings())
    }
}

/// Flux rule along the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxSequence {
    Constant(f64),
    /// `A_j = μ j + θ`.
    Linear { mu: f64, theta: f64 },
}

impl FluxSequence {
    pub fn at(&self, j: i64) -> f64 {
        match *self {
            FluxSequence::Constant(a) => a,
            FluxSequence::Linear { mu, theta } => mu * j as f64 + theta,
        }
    }
}

/// Parameters of a chain model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainModel {
    pub alpha: f64,
    pub flux: FluxSequence,
}

/// Spectrum for the rational flux `A_j = (p/q) j + θ`.
///
/// If some hopping `2cos πA_j` vanishes the Jacobi operator splits into finite
/// blocks and the chain spectrum is pure point: every block eigenvalue pulls
/// back through `η` to infinitely degenerate eigenvalues.
pub fn rational_flux_bands(alpha: f64, p: i64, q: u64, theta: f64, range: Interval) -> Result<SpectralSet> {
    check_range(range)?;
    let jac = JacobiOperatorSpec::linear(p, q, theta)?.operator()?;
    let mut flat = dirichlet_flat_bands(range);
    if jac.is_decoupled() {
        for lambda in jac.decoupled_eigenvalues() {
            for i in eta_preimage(Interval::new(lambda, lambda), range, alpha) {
                flat.push(FlatBand {
                    energy: 0.5 * (i.lo + i.hi),
                    infinite_multiplicity: true,
                });
            }
        }
        return Ok(SpectralSet::from_parts(range, std::iter::empty(), flat, 0.0));
    }
    let mut bands = Vec::new();
    for b in jac.spectrum(BLOCH_PHASES) {
        bands.extend(eta_preimage(b, range, alpha).into_iter().map(|i| (i.lo, i.hi)));
    }
    Ok(SpectralSet::from_parts(range, bands, flat, 1e-12))
}

fn check_range(range: Interval) -> Result<()> {
    if !(range.lo.is_finite() && range.hi.is_finite() && range.lo < range.hi) {
        return Err(Error::param("energy range", "must be a finite interval with lo < hi"));
    }
    Ok(())
}

/// Period cell of the chain with `fluxes.len()` rings, for the generic engine.
///
/// Vertex `j` joins ring `j - 1` and ring `j`; ring `j` consists of an upper
/// edge with potential `A_j` and a lower edge with `-A_j`, both of length `π`
/// and directed from vertex `j` to vertex `j + 1`.
pub fn chain_graph(alpha: f64, fluxes: &[f64]) -> Result<MetricGraph> {
    if fluxes.is_empty() {
        return Err(Error::param("fluxes", "need at least one ring"));
    }
    let q = fluxes.len();
    let mut b = GraphBuilder::new(1);
    let vs: Vec<usize> = (0..q).map(|j| b.vertex(format!("v{j}"), CouplingSpec::Delta(alpha))).collect();
    for (j, &a) in fluxes.iter().enumerate() {
        let shift = [i64::from(j == q - 1)];
        let next = vs[(j + 1) % q];
        b.edge(vs[j], next, PI, a, &shift);
        b.edge(vs[j], next, PI, -a, &shift);
    }
    b.build()
}

/// Wavefunction on the two half-circles of one ring.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSamples {
    pub ring: i64,
    pub x: Vec<f64>,
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

/// Chain eigenfunction rebuilt from vertex values `ψ_j`, `j = first..first + n`.
///
/// On ring `j`, with local coordinate `x ∈ [0, π]` from vertex `j` to `j + 1`:
/// `ψ_{j,±}(x) = e^{∓iA_j x} [ψ_j sin k(π - x) + e^{±iA_jπ} ψ_{j+1} sin kx] / sin kπ`.
/// Samples are reported against the global coordinate `jπ + x`.
pub fn reconstruct_eigenfunction(
    values: &[Complex64],
    first: i64,
    k: f64,
    flux: impl Fn(i64) -> f64,
    samples_per_edge: usize,
) -> Result<Vec<RingSamples>> {
    let denom = (k * PI).sin();
    if denom.abs() < 1e-12 {
        return Err(Error::Precondition(format!("k = {k} is a Dirichlet value; vertex data do not determine the function")));
    }
    let n = samples_per_edge.max(2);
    let mut out = Vec::new();
    for (i, w) in values.windows(2).enumerate() {
        let j = first + i as i64;
        let a = flux(j);
        let x: Vec<f64> = (0..n).map(|t| PI * t as f64 / (n - 1) as f64).collect();
        let branch = |sign: f64| -> Vec<Complex64> {
            x.iter()
                .map(|&x| {
                    let far = Complex64::from_polar(1.0, sign * a * PI);
                    Complex64::from_polar(1.0, -sign * a * x)
                        * (w[0] * (k * (PI - x)).sin() + far * w[1] * (k * x).sin())
                        / denom
                })
                .collect()
        };
        out.push(RingSamples {
            ring: j,
            upper: branch(1.0),
            lower: branch(-1.0),
            x: x.iter().map(|t| j as f64 * PI + t).collect(),
        });
    }
    Ok(out)
}

/// `‖ψ‖²` by the trapezoid rule over all sampled half-circles.
pub fn l2_norm_squared(rings: &[RingSamples]) -> f64 {
    rings
        .iter()
        .map(|r| {
            let h = |v: &[Complex64]| -> f64 {
                r.x.windows(2)
                    .zip(v.windows(2))
                    .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0].norm_sqr() + f[1].norm_sqr()))
                    .sum()
            };
            h(&r.upper) + h(&r.lower)
        })
        .sum()
}
