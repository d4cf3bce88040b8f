//! Scalar root finding, minimisation and sublevel-set extraction.
//!
//! Most spectral conditions in this crate are written as an indicator
//! `φ(s) ≤ 0` in the *signed momentum* `s`, where the energy is
//! `E = s·|s|` (so `s = k` for `E ≥ 0` and `s = -κ` for `E = -κ² < 0`).

use crate::par::Execution;

/// Energy corresponding to a signed momentum.
#[inline]
pub fn energy_of(s: f64) -> f64 {
    s * s.abs()
}

/// Signed momentum corresponding to an energy.
#[inline]
pub fn momentum_of(energy: f64) -> f64 {
    energy.signum() * energy.abs().sqrt()
}

/// `cos(√E x)`, continued analytically to `E ≤ 0` (`cosh(√-E x)`).
#[inline]
pub fn cos_e(energy: f64, x: f64) -> f64 {
    if energy > 0.0 {
        (energy.sqrt() * x).cos()
    } else if energy < 0.0 {
        ((-energy).sqrt() * x).cosh()
    } else {
        1.0
    }
}

/// `sin(√E x)/√E`, continued analytically (`sinh(κx)/κ`, and `x` at `E = 0`).
#[inline]
pub fn sinc_e(energy: f64, x: f64) -> f64 {
    if energy > 0.0 {
        let k = energy.sqrt();
        (k * x).sin() / k
    } else if energy < 0.0 {
        let kappa = (-energy).sqrt();
        (kappa * x).sinh() / kappa
    } else {
        x
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
///
/// `inside(a)` must differ from `inside(b)`; returns the boundary point to
/// within `tol`.
pub fn bisect_predicate<F: FnMut(f64) -> bool>(mut inside: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let fa = inside(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if inside(m) == fa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Bisection on a continuous function with `f(a)` and `f(b)` of opposite sign.
pub fn bisect_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let sa = f(a) <= 0.0;
    bisect_predicate(|x| (f(x) <= 0.0) == sa, a, b, tol)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation on `[a, b]`; returns `(x_min, f_min)`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub initial_step: f64,
    pub max_iter: usize,
    /// Stop as soon as a vertex reaches this value.
    pub target: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            max_iter: 400,
            target: f64::NEG_INFINITY,
            x_tol: 1e-13,
        }
    }
}

/// Derivative-free Nelder–Mead minimisation. Returns `(x_min, f_min)`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: NelderMead) -> (Vec<f64>, f64) {
    let n = x0.len();
    if n == 0 {
        let v = f(x0);
        return (Vec::new(), v);
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[0] <= opts.target {
            break;
        }
        let diameter = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter <= opts.x_tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let p = along(-0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = along(0.5);
                let v = f(&p);
                (p, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for d in 0..n {
                        simplex[i][d] = best[d] + 0.5 * (simplex[i][d] - best[d]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    (simplex[best].clone(), values[best])
}

/// Merges overlapping or touching closed intervals (gap ≤ `tol`).
pub fn merge_intervals(mut intervals: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    intervals.retain(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi);
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (lo, hi) in intervals {
        match out.last_mut() {
            Some(last) if lo <= last.1 + tol => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Settings for [`sublevel_intervals`].
#[derive(Debug, Clone, Copy)]
pub struct SublevelOptions {
    /// Grid step in the scanned variable.
    pub step: f64,
    /// Bisection tolerance for interval edges.
    pub tol: f64,
    /// A grid-local minimum whose refined value is at most this is reported
    /// as a degenerate (single-point) interval. Negative disables the check.
    pub touch_tol: f64,
    pub execution: Execution,
}

impl SublevelOptions {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            tol: 1e-12,
            touch_tol: -1.0,
            execution: Execution::default(),
        }
    }
}

/// Closed intervals of `[lo, hi]` on which the continuous function `f` is `≤ 0`.
///
/// Sign changes on a uniform grid are polished by bisection; grid-local minima
/// with positive value are refined by golden section so that bands narrower
/// than one grid step are still found.
pub fn sublevel_intervals<F>(f: F, lo: f64, hi: f64, opts: SublevelOptions) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    assert!(opts.step > 0.0 && hi >= lo);
    let n = ((hi - lo) / opts.step).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + i as f64 * opts.step })
        .collect();
    let vals = opts.execution.map(&xs, |&x| f(x));
    let inside = |v: f64| v <= 0.0;

    let mut out = Vec::new();
    let mut start: Option<f64> = if inside(vals[0]) { Some(xs[0]) } else { None };
    for i in 1..xs.len() {
        let (a, b) = (xs[i - 1], xs[i]);
        match (inside(vals[i - 1]), inside(vals[i])) {
            (false, true) => start = Some(bisect_predicate(|x| inside(f(x)), b, a, opts.tol)),
            (true, false) => {
                let end = bisect_predicate(|x| inside(f(x)), a, b, opts.tol);
                out.push((start.take().unwrap_or(a), end));
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, hi));
    }

    // Narrow dips between grid points.
    for i in 1..xs.len().saturating_sub(1) {
        let v = vals[i];
        if v > 0.0 && v <= vals[i - 1] && v <= vals[i + 1] {
            let (xm, fm) = golden_min(&f, xs[i - 1], xs[i + 1], opts.tol);
            if fm <= 0.0 {
                let l = bisect_predicate(|x| inside(f(x)), xm, xs[i - 1], opts.tol);
                let r = bisect_predicate(|x| inside(f(x)), xm, xs[i + 1], opts.tol);
                out.push((l, r));
            } else if fm <= opts.touch_tol {
                out.push((xm, xm));
            }
        }
    }
    merge_intervals(out, 0.0)
}
