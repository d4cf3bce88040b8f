//! Rectangular lattice with edges `a`, `b` and a δ coupling of strength `α`
//! at the vertices.
//!
//! A momentum `k > 0` lies in a gap iff
//!
//! - `α > 0`: `2k[tan(x_a) + tan(x_b)] < α`,
//! - `α < 0`: `2k[cot(x_a) + cot(x_b)] < |α|`,
//!
//! with `x_ℓ = kℓ/2 - (π/2)⌊kℓ/π⌋ ∈ [0, π/2)`. Between consecutive points of
//! `{nπ/a} ∪ {nπ/b}` the left-hand side is monotone (increasing for the tan
//! variant, decreasing for the cot variant), so each piece holds at most one
//! gap, attached to one of its ends.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::graph::{CouplingSpec, GraphBuilder, MetricGraph};
use crate::spectral_set::Interval;
use crate::{Error, Result};

/// Pole proximity reported as `+∞`.
pub const POLE_TOL: f64 = 1e-12;

/// Low part of π: `PI + PI_LO` is π to about 1e-32.
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// `(n, r)` with `t = nπ + r`, `r ∈ [0, π)`. The product `nπ` is taken
/// with a fused multiply-add and a second correction term, so `r` stays
/// accurate when `t` is large.
fn reduce_pi(t: f64) -> (f64, f64) {
    let mut n = (t / PI).floor();
    let mut r = (-n).mul_add(PI, t) - n * PI_LO;
    if r < 0.0 {
        n -= 1.0;
        r += PI;
    } else if r >= PI {
        n += 1.0;
        r -= PI;
    }
    (n, r)
}

/// `x = kℓ/2 - (π/2)⌊kℓ/π⌋ ∈ [0, π/2)`.
pub fn reduced_half_angle(k: f64, len: f64) -> f64 {
    0.5 * reduce_pi(k * len).1
}

/// Which gap condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `tan`, for `α > 0`.
    Plus,
    /// `cot`, for `α < 0`.
    Minus,
}

impl Variant {
    pub fn for_alpha(alpha: f64) -> Self {
        if alpha < 0.0 {
            Variant::Minus
        } else {
            Variant::Plus
        }
    }

    fn term(self, x: f64) -> f64 {
        match self {
            Variant::Plus => {
                if PI / 2.0 - x < POLE_TOL {
                    f64::INFINITY
                } else {
                    x.tan()
                }
            }
            Variant::Minus => {
                if x < POLE_TOL {
                    f64::INFINITY
                } else {
                    1.0 / x.tan()
                }
            }
        }
    }
}

/// Left-hand side of the gap condition at `k > 0` (`+∞` near a pole).
pub fn gap_lhs(k: f64, a: f64, b: f64, variant: Variant) -> f64 {
    let ta = variant.term(reduced_half_angle(k, a));
    let tb = variant.term(reduced_half_angle(k, b));
    2.0 * k * (ta + tb)
}

/// The lattice `(a, b, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectLattice {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl RectLattice {
    pub fn new(a: f64, b: f64, alpha: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::param("a, b", "edge lengths must be positive and finite"));
        }
        if !alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        Ok(Self { a, b, alpha })
    }

    pub fn lhs(&self, k: f64) -> f64 {
        gap_lhs(k, self.a, self.b, Variant::for_alpha(self.alpha))
    }

    /// Signed distance from the gap condition's boundary at `k` (negative in a gap).
    pub fn gap_residual(&self, k: f64) -> f64 {
        self.lhs(k) - self.alpha.abs()
    }

    /// One-sided limit of the left-hand side at a point of `{nπ/ℓ}`: `k → d⁺`
    /// for the tan variant, `k → d⁻` for the cot variant. The wrapping terms
    /// take their finite limit `0`.
    fn lhs_at_breakpoint(&self, d: f64, on_a: bool, on_b: bool) -> f64 {
        let variant = Variant::for_alpha(self.alpha);
        let term = |len: f64, wraps: bool| if wraps { 0.0 } else { variant.term(reduced_half_angle(d, len)) };
        2.0 * d * (term(self.a, on_a) + term(self.b, on_b))
    }
}

/// Regime of the gap structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    NoGaps,
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// Open gaps in energy, sorted, inside `(0, E_max]`.
    pub gaps: Vec<Interval>,
    pub count: usize,
    /// Regime suggested by the scan. Only a finite window was examined, so
    /// `Infinite` here means "gaps keep appearing up to `E_max`".
    pub regime: Regime,
    pub heuristic: bool,
    /// When `α < 0` and the gap below the spectrum reaches into `E > 0`,
    /// its positive part `(0, top)`; not counted among `gaps`.
    pub negative_gap_top: Option<f64>,
    pub e_max: f64,
}

struct Breakpoint {
    k: f64,
    on_a: bool,
    on_b: bool,
}

fn breakpoints(lat: &RectLattice, k_max: f64) -> Vec<Breakpoint> {
    let mut pts: Vec<(f64, bool)> = Vec::new();
    for (len, is_a) in [(lat.a, true), (lat.b, false)] {
        let n_max = (k_max * len / PI).floor() as u64;
        pts.extend((1..=n_max).map(|n| (n as f64 * PI / len, is_a)));
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<Breakpoint> = Vec::new();
    for (k, is_a) in pts {
        match out.last_mut() {
            Some(last) if (last.k - k).abs() <= 1e-12 * k => {
                last.on_a |= is_a;
                last.on_b |= !is_a;
            }
            _ => out.push(Breakpoint {
                k,
                on_a: is_a,
                on_b: !is_a,
            }),
        }
    }
    out
}

/// Root of the monotone `f` on `(lo, hi)` to machine precision. The sign
/// at the ends is passed in because `f` is singular at one of them.
fn polish(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, f_lo_neg: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == f_lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All gaps with `0 < E ≤ e_max`.
pub fn enumerate_gaps(lat: &RectLattice, e_max: f64) -> Result<GapReport> {
    if !(e_max > 0.0 && e_max.is_finite()) {
        return Err(Error::param("E_max", "must be positive and finite"));
    }
    let mut report = GapReport {
        gaps: Vec::new(),
        count: 0,
        regime: Regime::NoGaps,
        heuristic: true,
        negative_gap_top: None,
        e_max,
    };
    if lat.alpha == 0.0 {
        return Ok(report);
    }
    let k_max = e_max.sqrt();
    let mut bps = breakpoints(lat, k_max);
    // one more breakpoint past the window, so a gap straddling k_max is seen
    let next_a = ((k_max * lat.a / PI).floor() + 1.0) * PI / lat.a;
    let next_b = ((k_max * lat.b / PI).floor() + 1.0) * PI / lat.b;
    let next = next_a.min(next_b);
    bps.push(Breakpoint {
        k: next,
        on_a: (next - next_a).abs() <= 1e-12 * next,
        on_b: (next - next_b).abs() <= 1e-12 * next,
    });
    let target = lat.alpha.abs();
    let mut gaps_k: Vec<(f64, f64)> = Vec::new();
    if lat.alpha > 0.0 {
        // Increasing pieces: a gap [d, root) starts right after a breakpoint.
        // The piece starting at k = 0 lies below the spectrum.
        for w in bps.windows(2) {
            let v = lat.lhs_at_breakpoint(w[0].k, w[0].on_a, w[0].on_b);
            if v < target {
                gaps_k.push((w[0].k, polish(|k| lat.gap_residual(k), w[0].k, w[1].k, true)));
            }
        }
    } else {
        // Decreasing pieces: a gap (root, d) ends at a breakpoint.
        let mut prev = 0.0;
        for bp in &bps {
            let v = lat.lhs_at_breakpoint(bp.k, bp.on_a, bp.on_b);
            if v < target {
                if prev == 0.0 && 4.0 / lat.a + 4.0 / lat.b < target {
                    report.negative_gap_top = Some(bp.k * bp.k);
                } else {
                    gaps_k.push((polish(|k| lat.gap_residual(k), prev, bp.k, false), bp.k));
                }
            }
            prev = bp.k;
        }
    }
    report.gaps = gaps_k
        .into_iter()
        .filter(|&(lo, _)| lo < k_max)
        .map(|(lo, hi)| Interval::new(lo * lo, (hi * hi).min(e_max)))
        .filter(|g| g.lo < g.hi)
        .collect();
    report.count = report.gaps.len();
    report.regime = match report.count {
        0 => Regime::NoGaps,
        _ if report.gaps.iter().any(|g| g.lo.sqrt() > 0.5 * k_max) => Regime::Infinite,
        n => Regime::Finite(n),
    };
    Ok(report)
}

/// The golden mean `(1 + √5)/2`.
pub fn golden_mean() -> f64 {
    0.5 * (1.0 + 5f64.sqrt())
}

/// `π²/√5`, the limit of `A_j`.
pub fn golden_limit() -> f64 {
    PI * PI / 5f64.sqrt()
}

/// `A_j = (2π(θ^{2j} - θ^{-2j})/√5) tan((π/2)θ^{-2j})` for the golden mean θ.
pub fn golden_a(j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::param("j", "must be at least 1"));
    }
    let th = golden_mean();
    let up = th.powi(2 * j as i32);
    let down = th.powi(-2 * j as i32);
    Ok(2.0 * PI * (up - down) / 5f64.sqrt() * (0.5 * PI * down).tan())
}

/// Fibonacci numbers `F_0 = 0, F_1 = 1, …`.
pub fn fibonacci(n: u32) -> u64 {
    let (mut x, mut y) = (0u64, 1u64);
    for _ in 0..n {
        (x, y) = (y, x + y);
    }
    x
}

/// Result of [`classify_golden`].
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenClassification {
    pub regime: Regime,
    /// Enumeration up to a window that contains gap `N + 2`, when the regime
    /// is finite; `None` otherwise.
    pub cross_check: Option<GapReport>,
}

/// Gap regime of the golden-mean lattice with longer edge `a` (`b = a/θ`):
///
/// - `αa > π²/√5` or `αa ≤ -π²/√5`: infinitely many gaps,
/// - `-A₁ ≤ αa ≤ π²/√5`: none,
/// - `-A_{N+1} ≤ αa < -A_N`: exactly `N`.
pub fn classify_golden(alpha: f64, a: f64) -> Result<GoldenClassification> {
    if !(a > 0.0 && a.is_finite()) || !alpha.is_finite() {
        return Err(Error::param("a, alpha", "need a > 0 and finite alpha"));
    }
    let x = alpha * a;
    let lim = golden_limit();
    if x > lim || x <= -lim {
        return Ok(GoldenClassification {
            regime: Regime::Infinite,
            cross_check: None,
        });
    }
    if x >= -golden_a(1)? {
        return Ok(GoldenClassification {
            regime: Regime::NoGaps,
            cross_check: None,
        });
    }
    let mut n = 1;
    loop {
        let next = golden_a(n + 1)?;
        // thresholds closer than their rounding error cannot separate counts
        if next - golden_a(n)? <= 16.0 * f64::EPSILON * lim {
            return Err(Error::NonConvergence(format!(
                "αa = {x} is within double precision of π²/√5; gap count unresolvable"
            )));
        }
        if -next <= x {
            break;
        }
        n += 1;
    }
    // Gap j sits near k = πF_{2j}/a; go two gaps further.
    let k_max = PI * fibonacci(2 * n + 4) as f64 / a;
    let lat = RectLattice::new(a, a / golden_mean(), alpha)?;
    let report = enumerate_gaps(&lat, k_max * k_max)?;
    Ok(GoldenClassification {
        regime: Regime::Finite(n as usize),
        cross_check: Some(report),
    })
}

/// Period cell of the lattice for the generic engine: one vertex, edges `a`
/// (shift `(1, 0)`) and `b` (shift `(0, 1)`).
pub fn rect_lattice_graph(lat: &RectLattice) -> Result<MetricGraph> {
    let mut g = GraphBuilder::new(2);
    let v = g.vertex("v", CouplingSpec::Delta(lat.alpha));
    g.edge(v, v, lat.a, 0.0, &[1, 0]);
    g.edge(v, v, lat.b, 0.0, &[0, 1]);
    g.build()
}
