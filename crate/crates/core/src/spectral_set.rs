//! Band/gap descriptions of a spectrum.

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }
}

/// Widths below this are flagged as degenerate bands.
pub const DEGENERATE_WIDTH: f64 = 1e-9;

/// A closed spectral band in energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    /// Set when the band has (numerically) shrunk to a point.
    pub degenerate: bool,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            degenerate: hi - lo < DEGENERATE_WIDTH,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

/// An eigenvalue of the periodic operator, typically of infinite multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatBand {
    pub energy: f64,
    pub infinite_multiplicity: bool,
}

/// Sorted disjoint bands plus flat-band points inside a scan domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSet {
    pub bands: Vec<Band>,
    pub flat_bands: Vec<FlatBand>,
    pub domain: Interval,
}

impl SpectralSet {
    /// Normalises raw data: clips to the domain, merges overlapping bands
    /// (gap ≤ `merge_tol`), sorts and de-duplicates flat bands.
    pub fn from_parts(
        domain: Interval,
        bands: impl IntoIterator<Item = (f64, f64)>,
        flat: impl IntoIterator<Item = FlatBand>,
        merge_tol: f64,
    ) -> Self {
        let clipped: Vec<(f64, f64)> = bands
            .into_iter()
            .map(|(lo, hi)| (lo.max(domain.lo), hi.min(domain.hi)))
            .filter(|(lo, hi)| lo <= hi)
            .collect();
        let bands = crate::numeric::merge_intervals(clipped, merge_tol)
            .into_iter()
            .map(|(lo, hi)| Band::new(lo, hi))
            .collect();
        let mut flat: Vec<FlatBand> = flat.into_iter().filter(|f| domain.contains(f.energy)).collect();
        flat.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        flat.dedup_by(|a, b| {
            if (a.energy - b.energy).abs() <= 1e-9 * (1.0 + b.energy.abs()) {
                b.infinite_multiplicity |= a.infinite_multiplicity;
                true
            } else {
                false
            }
        });
        Self {
            bands,
            flat_bands: flat,
            domain,
        }
    }

    pub fn empty(domain: Interval) -> Self {
        Self {
            bands: Vec::new(),
            flat_bands: Vec::new(),
            domain,
        }
    }

    /// Whether `energy` lies in a band or on a flat band (tolerance `tol`).
    pub fn contains(&self, energy: f64, tol: f64) -> bool {
        self.bands
            .iter()
            .any(|b| b.lo - tol <= energy && energy <= b.hi + tol)
            || self.flat_bands.iter().any(|f| (f.energy - energy).abs() <= tol)
    }

    /// Open gaps between consecutive bands inside the domain (flat bands are
    /// ignored). Gaps touching the domain boundary are included.
    pub fn gaps(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut cursor = self.domain.lo;
        for b in &self.bands {
            if b.lo > cursor {
                out.push(Interval::new(cursor, b.lo));
            }
            cursor = cursor.max(b.hi);
        }
        if cursor < self.domain.hi {
            out.push(Interval::new(cursor, self.domain.hi));
        }
        out
    }

    /// Gaps strictly between two bands.
    pub fn interior_gaps(&self) -> Vec<Interval> {
        self.bands
            .windows(2)
            .map(|w| Interval::new(w[0].hi, w[1].lo))
            .collect()
    }

    /// Lebesgue measure of the band part.
    pub fn band_measure(&self) -> f64 {
        self.bands.iter().map(Band::width).sum()
    }

    /// Bands intersecting `(lo, hi)`.
    pub fn bands_within(&self, lo: f64, hi: f64) -> Vec<Band> {
        self.bands.iter().copied().filter(|b| b.hi > lo && b.lo < hi).collect()
    }
}

/// Hausdorff distance between two finite unions of closed intervals.
///
/// Returns `+∞` if exactly one of them is empty.
pub fn hausdorff_distance(a: &[Interval], b: &[Interval]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    directed_distance(a, b).max(directed_distance(b, a))
}

fn distance_to(x: f64, set: &[Interval]) -> f64 {
    set.iter()
        .map(|i| if i.contains(x) { 0.0 } else { (i.lo - x).abs().min((x - i.hi).abs()) })
        .fold(f64::INFINITY, f64::min)
}

/// `sup_{x ∈ a} dist(x, b)`: attained at an endpoint of `a` or at the centre
/// of a gap of `b` lying inside `a`.
fn directed_distance(a: &[Interval], b: &[Interval]) -> f64 {
    let mut sorted = b.to_vec();
    sorted.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut candidates: Vec<f64> = a.iter().flat_map(|i| [i.lo, i.hi]).collect();
    for w in sorted.windows(2) {
        let mid = 0.5 * (w[0].hi + w[1].lo);
        if a.iter().any(|i| i.contains(mid)) {
            candidates.push(mid);
        }
    }
    candidates.into_iter().map(|x| distance_to(x, b)).fold(0.0, f64::max)
}
