//! Almost Mathieu operator `u_{n+1} + u_{n-1} + λ cos(2πμn + θ) u_n = ε u_n`
//! at rational frequency `μ = p/q`, the Hofstadter butterfly, and a numerical
//! look at its duality with the ring-chain Jacobi operator `L_A`.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::chain::{eta_preimage, JacobiOperatorSpec};
use crate::jacobi::{PeriodicJacobi, BLOCH_PHASES, MERGE_TOL};
use crate::numeric::merge_intervals;
use crate::par::Execution;
use crate::spectral_set::{hausdorff_distance, Interval};
use crate::{Error, Result};

/// Critical coupling.
pub const CRITICAL_LAMBDA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmoSpec {
    pub p: i64,
    pub q: u64,
    pub lambda: f64,
    pub theta: f64,
}

impl AmoSpec {
    /// Critical operator (`λ = 2`) at `μ = p/q`, phase `θ`.
    pub fn new(p: i64, q: u64, theta: f64) -> Result<Self> {
        Self::with_lambda(p, q, CRITICAL_LAMBDA, theta)
    }

    pub fn with_lambda(p: i64, q: u64, lambda: f64, theta: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("q", "must be at least 1"));
        }
        if p.unsigned_abs().gcd(&q) != 1 {
            return Err(Error::param("mu", format!("{p}/{q} is not in lowest terms")));
        }
        Ok(Self { p, q, lambda, theta })
    }

    pub fn mu(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn operator(&self) -> PeriodicJacobi {
        let q = self.q as usize;
        let diag = (0..q)
            .map(|n| self.lambda * (2.0 * PI * self.mu() * n as f64 + self.theta).cos())
            .collect();
        PeriodicJacobi::new(diag, vec![1.0; q]).expect("q ≥ 1")
    }
}

/// Spectrum of one rational operator as merged bands.
pub fn amo_bands(spec: &AmoSpec) -> Vec<Interval> {
    amo_bands_with(spec, BLOCH_PHASES)
}

/// As [`amo_bands`] with an explicit Bloch-phase grid.
pub fn amo_bands_with(spec: &AmoSpec, phase_points: usize) -> Vec<Interval> {
    spec.operator().spectrum(phase_points)
}

/// Sum of band widths.
pub fn total_bandwidth(bands: &[Interval]) -> f64 {
    bands.iter().map(Interval::width).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButterflyRow {
    pub p: i64,
    pub q: u64,
    pub bands: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButterflyDataset {
    pub lambda: f64,
    pub theta: f64,
    pub rows: Vec<ButterflyRow>,
}

/// Frequencies of the butterfly: `0/1`, then `p/q` with `1 ≤ p < q ≤ q_max` in
/// lowest terms, ordered by `q` then `p`.
pub fn butterfly_frequencies(q_max: u64) -> Vec<(i64, u64)> {
    let mut out = vec![(0, 1)];
    for q in 2..=q_max {
        out.extend((1..q).filter(|p| p.gcd(&q) == 1).map(|p| (p as i64, q)));
    }
    out
}

/// Hofstadter butterfly at `λ = 2`, `θ = 0`. `phase_points` is the Bloch grid
/// per row.
pub fn butterfly(q_max: u64, phase_points: usize, execution: Execution) -> Result<ButterflyDataset> {
    butterfly_with(q_max, phase_points, CRITICAL_LAMBDA, 0.0, execution)
}

pub fn butterfly_with(
    q_max: u64,
    phase_points: usize,
    lambda: f64,
    theta: f64,
    execution: Execution,
) -> Result<ButterflyDataset> {
    if q_max == 0 {
        return Err(Error::param("q_max", "must be at least 1"));
    }
    let freqs = butterfly_frequencies(q_max);
    let rows = execution.map(&freqs, |&(p, q)| {
        let spec = AmoSpec::with_lambda(p, q, lambda, theta).expect("coprime by construction");
        ButterflyRow {
            p,
            q,
            bands: amo_bands_with(&spec, phase_points),
        }
    });
    Ok(ButterflyDataset { lambda, theta, rows })
}

/// Outcome of [`duality_check`]; reports, never asserts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub p: i64,
    pub q: u64,
    pub theta_grid: usize,
    /// `∪_θ σ(L_A)` with `A_j = μj + θ`.
    pub jacobi_bands: Vec<Interval>,
    /// `∪_θ σ(H_{μ,2,θ})`.
    pub amo_bands: Vec<Interval>,
    pub distance: f64,
    /// Pull-backs of both unions through `η` into the energy window.
    pub energy_window: Interval,
    pub jacobi_energy_bands: Vec<Interval>,
    pub amo_energy_bands: Vec<Interval>,
    pub energy_distance: f64,
}

/// Compares the θ-unions of the spectra of `L_A` and the critical almost
/// Mathieu operator at `μ = p/q`, in the dual variable and after pulling both
/// back through `η` (coupling `alpha`) into `energy_window`.
pub fn duality_check(alpha: f64, p: i64, q: u64, theta_grid: usize, energy_window: Interval) -> Result<DualityReport> {
    if theta_grid == 0 {
        return Err(Error::param("theta_grid", "must be at least 1"));
    }
    AmoSpec::new(p, q, 0.0)?;
    let mut jac = Vec::new();
    let mut amo = Vec::new();
    for t in 0..theta_grid {
        let s = t as f64 / theta_grid as f64;
        let l = JacobiOperatorSpec::linear(p, q, s)?.operator()?;
        if l.is_decoupled() {
            jac.extend(l.decoupled_eigenvalues().into_iter().map(|e| (e, e)));
        } else {
            jac.extend(l.spectrum(BLOCH_PHASES).into_iter().map(|i| (i.lo, i.hi)));
        }
        let h = AmoSpec::new(p, q, 2.0 * PI * s)?;
        amo.extend(amo_bands(&h).into_iter().map(|i| (i.lo, i.hi)));
    }
    let merge = |v: Vec<(f64, f64)>| -> Vec<Interval> {
        merge_intervals(v, MERGE_TOL).into_iter().map(|(l, h)| Interval::new(l, h)).collect()
    };
    let jacobi_bands = merge(jac);
    let amo_bands = merge(amo);
    let pull = |bands: &[Interval]| -> Vec<Interval> {
        merge(
            bands
                .iter()
                .flat_map(|b| eta_preimage(*b, energy_window, alpha))
                .map(|i| (i.lo, i.hi))
                .collect(),
        )
    };
    let jacobi_energy_bands = pull(&jacobi_bands);
    let amo_energy_bands = pull(&amo_bands);
    Ok(DualityReport {
        p,
        q,
        theta_grid,
        distance: hausdorff_distance(&jacobi_bands, &amo_bands),
        energy_distance: hausdorff_distance(&jacobi_energy_bands, &amo_energy_bands),
        jacobi_bands,
        amo_bands,
        energy_window,
        jacobi_energy_bands,
        amo_energy_bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_reduced() {
        assert!(AmoSpec::new(2, 4, 0.0).is_err());
        assert!(AmoSpec::new(1, 0, 0.0).is_err());
        assert!(AmoSpec::new(0, 1, 0.0).is_ok());
    }

    #[test]
    fn frequencies() {
        assert_eq!(butterfly_frequencies(1), vec![(0, 1)]);
        assert_eq!(butterfly_frequencies(4), vec![(0, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)]);
    }
}
