//! Continued fractions, Markov constants and the one-sided quantities `γ±`
//! that control gap opening on rectangular lattices.
//!
//! Quadratic irrationals are expanded exactly in integer arithmetic, so the
//! depth is limited only by memory, not by floating-point precision.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Floats expand only while `q_n` stays below this (their binary expansion
/// carries no information beyond it).
const FLOAT_Q_LIMIT: f64 = 1e7;

/// An exactly representable positive real.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Real {
    /// `num / den`, `den > 0`.
    Rational { num: BigInt, den: BigInt },
    /// `(p + √d) / q` with `d > 0` not a perfect square.
    Surd { p: BigInt, d: BigInt, q: BigInt },
    /// A double, expanded as the dyadic rational it represents (shallow).
    Float(u64),
}

impl Real {
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        Self::rational_big(BigInt::from(num), BigInt::from(den))
    }

    pub fn rational_big(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Rational("zero denominator".into()));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num / &g, den / &g);
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        Ok(Real::Rational { num, den })
    }

    /// `(p + √d)/q`; collapses to a rational when `d` is a perfect square.
    pub fn surd(p: i64, d: i64, q: i64) -> Result<Self> {
        if d < 0 {
            return Err(Error::param("d", "must be nonnegative"));
        }
        Self::surd_big(BigInt::from(p), BigInt::from(d), BigInt::from(q))
    }

    pub fn surd_big(p: BigInt, d: BigInt, q: BigInt) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::Rational("zero denominator".into()));
        }
        let r = d.sqrt();
        if &r * &r == d {
            return Self::rational_big(p + r, q);
        }
        Ok(Real::Surd { p, d, q })
    }

    /// The golden mean `(1 + √5)/2`.
    pub fn golden() -> Self {
        Self::surd(1, 5, 2).expect("valid surd")
    }

    /// `√n`.
    pub fn sqrt(n: i64) -> Result<Self> {
        Self::surd(0, n, 1)
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::param("theta", "must be finite"));
        }
        Ok(Real::Float(x.to_bits()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Rational { num, den } => big_ratio(num, den),
            Real::Surd { p, d, q } => {
                (p.to_f64().unwrap_or(f64::NAN) + d.to_f64().unwrap_or(f64::NAN).sqrt()) / q.to_f64().unwrap_or(f64::NAN)
            }
            Real::Float(bits) => f64::from_bits(*bits),
        }
    }

    pub fn is_rational(&self) -> bool {
        !matches!(self, Real::Surd { .. })
    }

    /// `1/x`.
    pub fn recip(&self) -> Result<Self> {
        match self {
            Real::Rational { num, den } => Self::rational_big(den.clone(), num.clone()),
            Real::Surd { p, d, q } => {
                // q/(p + √d) = q(√d - p)/(d - p²) = (-qp + sgn(q)√(q²d))/(d - p²)
                let den = d - p * p;
                let root = q * q * d;
                if q.is_positive() {
                    Self::surd_big(-(q * p), root, den)
                } else {
                    Self::surd_big(q * p, root, -den)
                }
            }
            Real::Float(bits) => Self::from_f64(1.0 / f64::from_bits(*bits)),
        }
    }
}

/// `a / b` for big integers of any size.
fn big_ratio(a: &BigInt, b: &BigInt) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(900) as usize;
    let (a, b) = (a >> shift, b >> shift);
    a.to_f64().unwrap_or(f64::NAN) / b.to_f64().unwrap_or(f64::NAN)
}

/// Exact dyadic rational of a finite double.
fn f64_to_rational(x: f64) -> (BigInt, BigInt) {
    if x == 0.0 {
        return (BigInt::zero(), BigInt::one());
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    let m = BigInt::from(mant) * sign;
    if e >= 0 {
        (m << e as usize, BigInt::one())
    } else {
        (m, BigInt::one() << (-e) as usize)
    }
}

/// `θ = [a₀; a₁, a₂, …]` with its convergents `p_n/q_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    pub value: Real,
    pub quotients: Vec<BigInt>,
    pub numerators: Vec<BigInt>,
    pub denominators: Vec<BigInt>,
    /// The expansion ended because `θ` is rational.
    pub terminated: bool,
}

impl ContinuedFraction {
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// `p_n / q_n` as a double.
    pub fn convergent(&self, n: usize) -> f64 {
        big_ratio(&self.numerators[n], &self.denominators[n])
    }

    /// `q_n² |θ - p_n/q_n|`, exact for surds and rationals.
    pub fn scaled_error(&self, n: usize) -> f64 {
        let (p, q) = (&self.numerators[n], &self.denominators[n]);
        match &self.value {
            Real::Surd { p: sp, d, q: sq } => {
                // θ - p/q = (q√d - y)/(q·Q) with y = pQ - qP, and
                // q√d - y = (q²d - y²)/(q√d + y).
                let y = p * sq - q * sp;
                let n_exact = q * q * d - &y * &y;
                let shift = q.bits().max(y.bits()).saturating_sub(60) as usize;
                let qs = (q >> shift).to_f64().unwrap_or(f64::NAN);
                let ys = (&y >> shift).to_f64().unwrap_or(f64::NAN);
                let root = d.to_f64().unwrap_or(f64::NAN).sqrt();
                qs / sq.abs().to_f64().unwrap_or(f64::NAN) * n_exact.abs().to_f64().unwrap_or(f64::NAN)
                    / (qs * root + ys).abs()
            }
            Real::Rational { num, den } => {
                let diff = (num * q - p * den).abs();
                big_ratio(&(diff * q), den)
            }
            Real::Float(bits) => {
                let (num, den) = f64_to_rational(f64::from_bits(*bits));
                let diff = (num * q - p * &den).abs();
                big_ratio(&(diff * q), &den)
            }
        }
    }

    /// Checks `|θ - p_n/q_n| < 1/q_n²` for every convergent except an exact
    /// final one.
    pub fn satisfies_convergent_bound(&self) -> bool {
        (0..self.depth()).all(|n| {
            let e = self.scaled_error(n);
            e < 1.0 || (self.terminated && n + 1 == self.depth() && e == 0.0)
        })
    }
}

/// Continued fraction of `theta > 0` up to `depth` partial quotients.
pub fn cf_expand(theta: &Real, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::param("depth", "must be at least 1"));
    }
    if !(theta.to_f64() > 0.0) {
        return Err(Error::param("theta", "must be positive"));
    }
    let mut quotients = Vec::with_capacity(depth);
    let mut terminated = false;
    match theta {
        Real::Rational { num, den } => {
            terminated = euclid(num.clone(), den.clone(), depth, &mut quotients);
        }
        Real::Float(bits) => {
            let (num, den) = f64_to_rational(f64::from_bits(*bits));
            terminated = euclid(num, den, depth, &mut quotients);
        }
        Real::Surd { p, d, q } => {
            let (mut p, mut d, mut q) = (p.clone(), d.clone(), q.clone());
            // Normalise so that q | d - p².
            if !(&d - &p * &p).is_multiple_of(&q) {
                let s = q.abs();
                p *= &s;
                d *= &s * &s;
                q *= &s;
            }
            let r = d.sqrt();
            for _ in 0..depth {
                let a = if q.is_positive() {
                    (&p + &r).div_floor(&q)
                } else {
                    (&p + &r + BigInt::one()).div_floor(&q)
                };
                let p_next = &a * &q - &p;
                let q_next = (&d - &p_next * &p_next) / &q;
                quotients.push(a);
                p = p_next;
                q = q_next;
            }
        }
    }
    let (numerators, denominators) = convergents(&quotients);
    let mut cf = ContinuedFraction {
        value: theta.clone(),
        quotients,
        numerators,
        denominators,
        terminated,
    };
    if matches!(theta, Real::Float(_)) {
        let keep = cf
            .denominators
            .iter()
            .position(|q| q.to_f64().unwrap_or(f64::INFINITY) > FLOAT_Q_LIMIT)
            .unwrap_or(cf.depth())
            .max(1);
        if keep < cf.depth() {
            cf.terminated = false;
        }
        cf.quotients.truncate(keep);
        cf.numerators.truncate(keep);
        cf.denominators.truncate(keep);
    }
    Ok(cf)
}

fn euclid(mut num: BigInt, mut den: BigInt, depth: usize, out: &mut Vec<BigInt>) -> bool {
    while out.len() < depth {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        if r.is_zero() {
            return true;
        }
        num = den;
        den = r;
    }
    false
}

/// Convergent numerators and denominators from the recurrence
/// `p_n = a_n p_{n-1} + p_{n-2}`.
pub fn convergents(quotients: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
    let mut ps = Vec::with_capacity(quotients.len());
    let mut qs = Vec::with_capacity(quotients.len());
    for a in quotients {
        let p = a * &p1 + &p2;
        let q = a * &q1 + &q2;
        p2 = std::mem::replace(&mut p1, p.clone());
        q2 = std::mem::replace(&mut q1, q.clone());
        ps.push(p);
        qs.push(q);
    }
    (ps, qs)
}

/// Depth-limited estimate of the Markov constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovEstimate {
    /// `min q_n² |θ - p_n/q_n|` over the last half of the convergents.
    pub value: f64,
    pub depth: usize,
    /// False for float input, whose tail is not meaningful.
    pub exact: bool,
}

/// `μ(θ) = liminf q² |θ - p/q|`, estimated on the convergents (the best
/// approximations) at the available depth.
pub fn markov_constant(cf: &ContinuedFraction) -> Result<MarkovEstimate> {
    if let Real::Rational { num, den } = &cf.value {
        return Err(Error::Rational(format!(
            "{num}/{den} is rational; it has only finitely many approximations"
        )));
    }
    let depth = cf.depth();
    let start = depth / 2;
    let value = (start..depth).map(|n| cf.scaled_error(n)).fold(f64::INFINITY, f64::min);
    Ok(MarkovEstimate {
        value,
        depth,
        exact: matches!(cf.value, Real::Surd { .. }),
    })
}

/// Whether all partial quotients after `a₀` are at most `bound`.
pub fn is_badly_approximable(cf: &ContinuedFraction, bound: u64) -> bool {
    let b = BigInt::from(bound);
    cf.quotients.iter().skip(1).all(|a| *a <= b)
}

/// `Σ_{n=1}^{terms} 10^{-n!}`, a truncated Liouville number.
pub fn liouville_truncated(terms: u32) -> Real {
    let mut fact = 1u32;
    let mut top = 0u32;
    let mut exps = Vec::new();
    for n in 1..=terms {
        fact *= n;
        exps.push(fact);
        top = fact;
    }
    let ten = BigInt::from(10);
    let den = num_traits::pow(ten.clone(), top as usize);
    let num = exps
        .iter()
        .map(|&e| num_traits::pow(ten.clone(), (top - e) as usize))
        .fold(BigInt::zero(), |acc, x| acc + x);
    Real::rational_big(num, den).expect("nonzero denominator")
}

/// Which edge length produced an infimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Truncated `γ₊`, `γ₋` with their minimisers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBounds {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub argmin_plus: (u64, Side),
    pub argmin_minus: (u64, Side),
    pub m_max: u64,
}

/// `tan(πx/2)` for `x ∈ [0, 1]`, with the pole at `x = 1` mapped to `+∞`.
fn half_tan(x: f64) -> f64 {
    if x >= 1.0 {
        f64::INFINITY
    } else {
        (0.5 * PI * x).tan()
    }
}

/// `γ₊ = min{inf_m (2mπ/a) tan((π/2){m/θ}), inf_m (2mπ/b) tan((π/2){mθ})}`,
/// `θ = a/b`, and `γ₋`, its analogue with `⌈x⌉ - x` in place of `{x}`,
/// truncated to `1 ≤ m ≤ m_max`.
pub fn gamma_bounds(a: f64, b: f64, m_max: u64) -> Result<GammaBounds> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::param("a, b", "edge lengths must be positive"));
    }
    if m_max == 0 {
        return Err(Error::param("m_max", "must be at least 1"));
    }
    let mut out = GammaBounds {
        gamma_plus: f64::INFINITY,
        gamma_minus: f64::INFINITY,
        argmin_plus: (1, Side::A),
        argmin_minus: (1, Side::A),
        m_max,
    };
    for m in 1..=m_max {
        let mf = m as f64;
        // m/θ = m b / a and mθ = m a / b.
        for (side, len, x) in [(Side::A, a, mf * b / a), (Side::B, b, mf * a / b)] {
            let scale = 2.0 * mf * PI / len;
            let plus = scale * half_tan(x - x.floor());
            let minus = scale * half_tan(x.ceil() - x);
            if plus < out.gamma_plus {
                out.gamma_plus = plus;
                out.argmin_plus = (m, side);
            }
            if minus < out.gamma_minus {
                out.gamma_minus = minus;
                out.argmin_minus = (m, side);
            }
        }
    }
    Ok(out)
}
