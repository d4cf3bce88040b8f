//! Periodic Jacobi (tridiagonal) operators on `ℓ²(ℤ)` and their Bloch spectra.
//!
//! `(Hu)_j = t_j u_{j+1} + t_{j-1} u_{j-1} + v_j u_j` with `q`-periodic
//! coefficients. The spectrum is the union over the Bloch phase `φ` of the
//! eigenvalues of the `q × q` Bloch matrix; its band edges sit at `φ ∈ {0, π}`,
//! which the phase grid always contains.

use num_complex::Complex64;

use crate::numeric::merge_intervals;
use crate::spectral_set::Interval;
use crate::{CMatrix, Error, Result};

/// Number of Bloch phases sampled on `[0, π]`.
pub const BLOCH_PHASES: usize = 512;
/// Merge tolerance for Bloch bands.
pub const MERGE_TOL: f64 = 1e-9;
/// Hoppings below this magnitude decouple the chain.
pub const ZERO_HOPPING: f64 = 1e-12;

/// One period of a periodic Jacobi operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicJacobi {
    diagonal: Vec<f64>,
    hopping: Vec<f64>,
}

impl PeriodicJacobi {
    /// `hopping[j]` couples sites `j` and `j + 1` (the last one wraps into the next cell).
    pub fn new(diagonal: Vec<f64>, hopping: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::param("q", "period must be at least 1"));
        }
        if diagonal.len() != hopping.len() {
            return Err(Error::Dimension {
                expected: diagonal.len(),
                found: hopping.len(),
            });
        }
        Ok(Self { diagonal, hopping })
    }

    pub fn period(&self) -> usize {
        self.diagonal.len()
    }

    pub fn hopping(&self) -> &[f64] {
        &self.hopping
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Bloch matrix at phase `phi`.
    pub fn bloch_matrix(&self, phi: f64) -> CMatrix {
        let q = self.period();
        let mut h = CMatrix::zeros(q, q);
        for j in 0..q {
            h[(j, j)] += Complex64::new(self.diagonal[j], 0.0);
            let k = (j + 1) % q;
            let phase = if j == q - 1 {
                Complex64::from_polar(1.0, phi)
            } else {
                Complex64::new(1.0, 0.0)
            };
            h[(j, k)] += phase * self.hopping[j];
            h[(k, j)] += phase.conj() * self.hopping[j];
        }
        h
    }

    /// Sorted eigenvalues of the Bloch matrix.
    pub fn bloch_eigenvalues(&self, phi: f64) -> Vec<f64> {
        let mut ev: Vec<f64> = self.bloch_matrix(phi).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// The `q` band functions' ranges over `phase_points` phases in `[0, π]`
    /// (not merged; band `i` is the range of the `i`-th eigenvalue).
    pub fn raw_bands(&self, phase_points: usize) -> Vec<Interval> {
        let n = phase_points.max(2);
        let q = self.period();
        let mut lo = vec![f64::INFINITY; q];
        let mut hi = vec![f64::NEG_INFINITY; q];
        for i in 0..n {
            let phi = std::f64::consts::PI * i as f64 / (n - 1) as f64;
            for (b, e) in self.bloch_eigenvalues(phi).into_iter().enumerate() {
                lo[b] = lo[b].min(e);
                hi[b] = hi[b].max(e);
            }
        }
        lo.into_iter().zip(hi).map(|(l, h)| Interval::new(l, h)).collect()
    }

    /// Spectrum as merged closed intervals.
    pub fn spectrum(&self, phase_points: usize) -> Vec<Interval> {
        merge_intervals(
            self.raw_bands(phase_points).into_iter().map(|b| (b.lo, b.hi)).collect(),
            MERGE_TOL,
        )
        .into_iter()
        .map(|(l, h)| Interval::new(l, h))
        .collect()
    }

    /// Whether some hopping vanishes, so the operator is a direct sum of
    /// finite blocks (pure point spectrum).
    pub fn is_decoupled(&self) -> bool {
        self.hopping.iter().any(|t| t.abs() <= ZERO_HOPPING)
    }

    /// Eigenvalues of the finite blocks between vanishing hoppings (each is
    /// an infinitely degenerate eigenvalue of the full operator). Empty when
    /// no hopping vanishes.
    pub fn decoupled_eigenvalues(&self) -> Vec<f64> {
        let q = self.period();
        let Some(cut) = self.hopping.iter().position(|t| t.abs() <= ZERO_HOPPING) else {
            return Vec::new();
        };
        // Rotate so that the period starts right after a vanishing hopping.
        let order: Vec<usize> = (1..=q).map(|i| (cut + i) % q).collect();
        let mut out = Vec::new();
        let mut block: Vec<usize> = Vec::new();
        for &site in &order {
            block.push(site);
            if self.hopping[site].abs() <= ZERO_HOPPING {
                let n = block.len();
                let m = nalgebra::DMatrix::from_fn(n, n, |a, b| {
                    if a == b {
                        self.diagonal[block[a]]
                    } else if b == a + 1 {
                        self.hopping[block[a]]
                    } else if a == b + 1 {
                        self.hopping[block[b]]
                    } else {
                        0.0
                    }
                });
                out.extend(m.symmetric_eigenvalues().iter().copied());
                block.clear();
            }
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_band() {
        let j = PeriodicJacobi::new(vec![0.5], vec![1.5]).unwrap();
        let s = j.spectrum(BLOCH_PHASES);
        assert_eq!(s.len(), 1);
        assert!((s[0].lo - (0.5 - 3.0)).abs() < 1e-14);
        assert!((s[0].hi - (0.5 + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn two_site_gap_matches_closed_form() {
        // zero diagonal, alternating hoppings a, b: bands ±[|a-b|, a+b]
        let (a, b) = (1.3, 0.4);
        let j = PeriodicJacobi::new(vec![0.0, 0.0], vec![a, b]).unwrap();
        let s = j.spectrum(BLOCH_PHASES);
        assert_eq!(s.len(), 2);
        assert!((s[1].lo - (a - b)).abs() < 1e-12 && (s[1].hi - (a + b)).abs() < 1e-12);
        assert!((s[0].hi + (a - b)).abs() < 1e-12);
    }

    #[test]
    fn decoupled_blocks() {
        let j = PeriodicJacobi::new(vec![0.0; 3], vec![1.0, 2.0, 0.0]).unwrap();
        assert!(j.is_decoupled());
        let ev = j.decoupled_eigenvalues();
        assert_eq!(ev.len(), 3);
        // 3x3 path with hoppings 1, 2: eigenvalues 0, ±√5
        assert!((ev[0] + 5f64.sqrt()).abs() < 1e-12);
        assert!(ev[1].abs() < 1e-12);
        assert!((ev[2] - 5f64.sqrt()).abs() < 1e-12);
        // Bloch sweep degenerates to the same points
        for b in j.raw_bands(64) {
            assert!(b.width() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_period() {
        assert!(PeriodicJacobi::new(vec![], vec![]).is_err());
        assert!(PeriodicJacobi::new(vec![0.0], vec![]).is_err());
    }
}
