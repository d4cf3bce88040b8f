//! Circulant-shift coupling `U_{j,j+1} = 1`, which breaks time-reversal
//! invariance: the star-graph S-matrix, its bound states, and the square
//! and honeycomb lattices built from it.
//!
//! With `η = (1-k)/(1+k)` the star S-matrix is
//! `S_ij = (1-η²)/(1-η^N) · [-η(1-η^{N-2})/(1-η²) δ_ij + (1-δ_ij) η^{(j-i-1) mod N}]`.
//! At high energy it tends to `I` for odd `N` but not for even `N`, which is
//! behind the different band/gap asymptotics of the two lattices.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::VertexCoupling;
use crate::graph::{CouplingSpec, GraphBuilder, MetricGraph};
use crate::numeric::{cos_e, energy_of, momentum_of, sublevel_intervals, SublevelOptions};
use crate::par::Execution;
use crate::spectral_set::{FlatBand, Interval, SpectralSet};
use crate::{CMatrix, Error, Result};

/// Range of `cos θ₁ + cos(θ₁ - θ₂) + cos θ₂` over the torus.
pub const HEX_D_RANGE: (f64, f64) = (-1.5, 3.0);
/// Range of `cos θ₁ + cos θ₂`.
pub const SQUARE_D_RANGE: (f64, f64) = (-2.0, 2.0);

/// `N` half-lines joined by the circulant coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarGraph {
    pub n: usize,
}

impl StarGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::param("N", "star graph needs at least 3 half-lines"));
        }
        Ok(Self { n })
    }

    pub fn coupling(&self) -> VertexCoupling {
        VertexCoupling::circulant_shift(self.n).expect("n ≥ 3")
    }

    /// The star as a compact graph with `n` leads, for the generic engine.
    pub fn graph(&self) -> Result<MetricGraph> {
        let mut b = GraphBuilder::new(0);
        let v = b.vertex("centre", CouplingSpec::CirculantShift);
        for _ in 0..self.n {
            b.lead(v);
        }
        b.build()
    }
}

fn check_momentum(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::param("k", "momentum must be positive and finite"));
    }
    Ok(())
}

/// On-shell S-matrix from the explicit entrywise formula.
pub fn onshell_smatrix(star: &StarGraph, k: f64) -> Result<CMatrix> {
    check_momentum(k)?;
    let n = star.n;
    let eta = (1.0 - k) / (1.0 + k);
    let denom = 1.0 - eta.powi(n as i32);
    if denom.abs() < 1e-300 {
        return Err(Error::Precondition("η^N = 1".into()));
    }
    let pre = (1.0 - eta * eta) / denom;
    // -η(1-η^{N-2})/(1-η²) · pre, written without the removable 1 - η² division
    let diag = -eta * (1.0 - eta.powi(n as i32 - 2)) / denom;
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let v = if i == j {
            diag
        } else {
            pre * eta.powi(((j + n - i - 1) % n) as i32)
        };
        Complex64::new(v, 0.0)
    }))
}

/// `S(k) = (k - 1 + (k + 1)U)(k + 1 + (k - 1)U)^{-1}` by a linear solve.
pub fn onshell_smatrix_inverse(star: &StarGraph, k: f64) -> Result<CMatrix> {
    check_momentum(k)?;
    let u = star.coupling().matrix().clone();
    let id = CMatrix::identity(star.n, star.n);
    let c = |x: f64| Complex64::new(x, 0.0);
    let num = &id * c(k - 1.0) + &u * c(k + 1.0);
    let den = &id * c(k + 1.0) + &u * c(k - 1.0);
    // the factors commute, so S = den^{-1} num
    den.lu()
        .solve(&num)
        .ok_or_else(|| Error::Precondition("singular denominator".into()))
}

/// Negative eigenvalues `-tan²(πm/N)`, `m = 1..⌊N/2⌋` (`N` odd) or
/// `1..⌊(N-1)/2⌋` (`N` even), in increasing order.
pub fn star_eigenvalues(star: &StarGraph) -> Vec<f64> {
    let n = star.n;
    let m_max = if n % 2 == 1 { n / 2 } else { (n - 1) / 2 };
    let mut ev: Vec<f64> = (1..=m_max)
        .map(|m| -(PI * m as f64 / n as f64).tan().powi(2))
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Lattice geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeKind {
    Square,
    Hexagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub length: f64,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::param("l", "edge length must be positive and finite"));
        }
        Ok(Self { kind, length })
    }

    /// Bracket of the secular condition as a function of `E` and the
    /// quasimomentum term `d`; linear in `d`.
    pub fn secular_bracket(&self, energy: f64, d: f64) -> f64 {
        let l = self.length;
        match self.kind {
            LatticeKind::Square => (energy - 1.0) * d + 2.0 * (energy + 1.0) * cos_e(energy, l),
            LatticeKind::Hexagonal => {
                let n = energy * energy - 6.0 * energy - 3.0 - (energy + 3.0).powi(2) * cos_e(energy, 2.0 * l);
                n - 4.0 * (energy - 1.0) * d
            }
        }
    }

    pub fn d_range(&self) -> (f64, f64) {
        match self.kind {
            LatticeKind::Square => SQUARE_D_RANGE,
            LatticeKind::Hexagonal => HEX_D_RANGE,
        }
    }

    /// `≤ 0` exactly when some quasimomentum solves the bracket.
    pub fn band_indicator(&self, energy: f64) -> f64 {
        let (lo, hi) = self.d_range();
        self.secular_bracket(energy, lo) * self.secular_bracket(energy, hi)
    }

    pub fn graph(&self) -> Result<MetricGraph> {
        match self.kind {
            LatticeKind::Square => square_lattice_graph(self.length),
            LatticeKind::Hexagonal => hex_lattice_graph(self.length),
        }
    }
}

/// Grid step (in signed momentum) for locating band edges of the closed forms.
const CLOSED_FORM_STEP: f64 = 2e-3;

fn closed_form_bands(spec: &LatticeSpec, range: Interval, execution: Execution) -> Result<SpectralSet> {
    if !(range.lo < range.hi && range.lo.is_finite() && range.hi.is_finite()) {
        return Err(Error::param("E_range", "must be a finite nonempty interval"));
    }
    let (s_lo, s_hi) = (momentum_of(range.lo), momentum_of(range.hi));
    let mut opts = SublevelOptions::new(CLOSED_FORM_STEP);
    opts.touch_tol = 0.0;
    opts.execution = execution;
    let spec = *spec;
    let runs = sublevel_intervals(move |s| spec.band_indicator(energy_of(s)), s_lo, s_hi, opts);
    let bands: Vec<(f64, f64)> = runs.into_iter().map(|(a, b)| (energy_of(a), energy_of(b))).collect();
    let n_max = (s_hi.max(0.0) * spec.length / PI).floor() as u64;
    let flat = (1..=n_max).map(|n| FlatBand {
        energy: (n as f64 * PI / spec.length).powi(2),
        infinite_multiplicity: true,
    });
    Ok(SpectralSet::from_parts(range, bands, flat, 0.0))
}

/// Square lattice: `k sin kℓ [(k² - 1)(cos θ₁ + cos θ₂) + 2(k² + 1) cos kℓ] = 0`.
pub fn square_bands(length: f64, range: Interval) -> Result<SpectralSet> {
    closed_form_bands(&LatticeSpec::new(LatticeKind::Square, length)?, range, Execution::default())
}

/// Honeycomb lattice:
/// `3 + 6k² - k⁴ + 4d_θ(k² - 1) + (k² + 3)² cos 2kℓ = 0`, `d_θ ∈ [-3/2, 3]`.
pub fn hex_bands(length: f64, range: Interval) -> Result<SpectralSet> {
    closed_form_bands(&LatticeSpec::new(LatticeKind::Hexagonal, length)?, range, Execution::default())
}

pub fn lattice_bands(spec: &LatticeSpec, range: Interval) -> Result<SpectralSet> {
    closed_form_bands(spec, range, Execution::default())
}

/// One vertex, edges along `x` (shift `(1, 0)`) and `y` (shift `(0, 1)`).
/// Default slot order (tails then heads) lists the four directions east,
/// north, west, south: counterclockwise.
pub fn square_lattice_graph(length: f64) -> Result<MetricGraph> {
    let mut b = GraphBuilder::new(2);
    let v = b.vertex("v", CouplingSpec::CirculantShift);
    b.edge(v, v, length, 0.0, &[1, 0]);
    b.edge(v, v, length, 0.0, &[0, 1]);
    b.build()
}

/// Two vertices joined by three edges at 90°, 210° and 330° from the first
/// one. The cyclic order at the second vertex (reached from the opposite
/// directions) is the same, so default slot ordering is counterclockwise at both.
pub fn hex_lattice_graph(length: f64) -> Result<MetricGraph> {
    let mut b = GraphBuilder::new(2);
    let a = b.vertex("a", CouplingSpec::CirculantShift);
    let c = b.vertex("b", CouplingSpec::CirculantShift);
    b.edge(a, c, length, 0.0, &[0, 0]);
    b.edge(a, c, length, 0.0, &[1, 0]);
    b.edge(a, c, length, 0.0, &[0, 1]);
    b.build()
}

/// One row of [`asymptotic_report`]; widths in energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    /// 1-based index among bands reaching into `E > 0`.
    pub index: usize,
    pub band: Interval,
    pub band_width: f64,
    /// Gap above this band (to the next band).
    pub gap_width: f64,
    pub gap_has_flat_band: bool,
}

/// Band and gap widths for bands `first..=last`.
pub fn asymptotic_report(spec: &LatticeSpec, first: usize, last: usize) -> Result<Vec<AsymptoticRow>> {
    if first == 0 || last < first {
        return Err(Error::param("band range", "need 1 ≤ first ≤ last"));
    }
    // enough momentum for last + 1 bands: at most two bands per π/ℓ
    let k_max = (last as f64 + 3.0) * PI / spec.length;
    let set = lattice_bands(spec, Interval::new(0.0, k_max * k_max))?;
    let positive: Vec<_> = set.bands.iter().filter(|b| b.hi > 0.0).collect();
    if positive.len() < last + 1 {
        return Err(Error::NonConvergence(format!(
            "found only {} bands below E = {}",
            positive.len(),
            k_max * k_max
        )));
    }
    Ok((first..=last)
        .map(|i| {
            let (b, next) = (positive[i - 1], positive[i]);
            AsymptoticRow {
                index: i,
                band: b.interval(),
                band_width: b.width(),
                gap_width: next.lo - b.hi,
                gap_has_flat_band: set.flat_bands.iter().any(|f| b.hi < f.energy && f.energy < next.lo),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smatrix_at_one_is_shift() {
        for n in 3..=8 {
            let star = StarGraph::new(n).unwrap();
            let s = onshell_smatrix(&star, 1.0).unwrap();
            assert_eq!(&s, star.coupling().matrix());
        }
    }

    #[test]
    fn star_values() {
        let e3 = star_eigenvalues(&StarGraph::new(3).unwrap());
        assert_eq!(e3.len(), 1);
        assert!((e3[0] + 3.0).abs() < 1e-12);
        let e4 = star_eigenvalues(&StarGraph::new(4).unwrap());
        assert_eq!(e4.len(), 1);
        assert!((e4[0] + 1.0).abs() < 1e-12);
        assert!(StarGraph::new(2).is_err());
    }

    #[test]
    fn unit_momentum_condition() {
        // at k = 1 the square bracket is 4cos ℓ
        let spec = LatticeSpec::new(LatticeKind::Square, PI / 2.0).unwrap();
        assert!(spec.band_indicator(1.0).abs() < 1e-20);
        let spec = LatticeSpec::new(LatticeKind::Square, 1.0).unwrap();
        assert!(spec.band_indicator(1.0) > 0.0);
    }
}
