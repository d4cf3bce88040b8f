//! Edge lengths written as products and quotients of decimals, `golden` and
//! `pi`. When `pi` is absent the value is kept exactly as `r·φ^e` with `r`
//! rational, so that the ratio of two lengths has an exact continued fraction.

use num_bigint::BigInt;
use num_integer::Integer;
use qgraph::diophantine::Real;
use qgraph::graph_file::parse_real;

#[derive(Debug, Clone, PartialEq)]
pub struct Length {
    pub value: f64,
    /// `(num, den, e)` for `num/den · φ^e`.
    exact: Option<(BigInt, BigInt, i32)>,
}

/// Exact value of a plain decimal literal such as `12`, `1.25` or `3e-2`.
fn decimal(s: &str) -> Option<(BigInt, BigInt)> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let shift = exp - frac.len() as i32;
    if shift.abs() > 400 {
        return None;
    }
    let ten = BigInt::from(10u8).pow(shift.unsigned_abs());
    Some(if shift >= 0 { (digits * ten, BigInt::from(1u8)) } else { (digits, ten) })
}

fn exact_of(token: &str) -> Option<(BigInt, BigInt, i32)> {
    let body = token.trim().strip_prefix('+').unwrap_or(token.trim());
    let (mut num, mut den, mut e) = (BigInt::from(1u8), BigInt::from(1u8), 0i32);
    let mut divide = false;
    let mut start = 0;
    for (i, c) in body.char_indices().chain(std::iter::once((body.len(), '*'))) {
        if c != '*' && c != '/' {
            continue;
        }
        let atom = body[start..i].trim();
        let (n, d, g) = match atom {
            "golden" => (BigInt::from(1u8), BigInt::from(1u8), 1),
            _ => {
                let (n, d) = decimal(atom)?;
                (n, d, 0)
            }
        };
        if divide {
            num *= d;
            den *= n;
            e -= g;
        } else {
            num *= n;
            den *= d;
            e += g;
        }
        divide = c == '/';
        start = i + 1;
    }
    let g = num.gcd(&den);
    Some((num / &g, den / &g, e))
}

/// Fibonacci numbers extended to negative indices, `F_{-n} = (-1)^{n+1} F_n`.
fn fib(n: i32) -> BigInt {
    let (mut x, mut y) = (BigInt::from(0u8), BigInt::from(1u8));
    for _ in 0..n.unsigned_abs() {
        let z = &x + &y;
        x = std::mem::replace(&mut y, z);
    }
    if n < 0 && n % 2 == 0 { -x } else { x }
}

impl Length {
    /// Whether `self / other` is exactly the golden mean.
    pub fn is_golden_multiple_of(&self, other: &Length) -> bool {
        self.ratio(other) == Real::golden()
    }

    pub fn parse(token: &str) -> Result<Self, String> {
        let value = parse_real(token)?;
        if !(value > 0.0) {
            return Err(format!("`{token}` is not a positive length"));
        }
        Ok(Self {
            value,
            exact: exact_of(token),
        })
    }

    /// `self / other` as an exact real when both lengths are exact, otherwise
    /// as a float (shallow expansion only).
    pub fn ratio(&self, other: &Length) -> Real {
        let (Some((na, da, ea)), Some((nb, db, eb))) = (&self.exact, &other.exact) else {
            return Real::from_f64(self.value / other.value).expect("finite ratio");
        };
        let (mut m, mut n, mut e) = (na * db, da * nb, ea - eb);
        let g = m.gcd(&n);
        m /= &g;
        n /= &g;
        // μ(θ) = μ(1/θ): keep the golden power nonnegative
        let flipped = e < 0;
        if flipped {
            std::mem::swap(&mut m, &mut n);
            e = -e;
        }
        // r φ^e = r (F_{e-1} + F_e φ) = (m(2F_{e-1} + F_e) + √(5 m² F_e²)) / 2n
        let f = fib(e);
        let p = &m * (fib(e - 1) * 2 + &f);
        let d = &m * &m * &f * &f * 5;
        let theta = Real::surd_big(p, d, n * 2).expect("nonzero denominator");
        if flipped {
            theta.recip().expect("positive")
        } else {
            theta
        }
    }
}
