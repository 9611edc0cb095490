//! Matrix entries as they appear in problem files: JSON numbers, or strings
//! holding an exact decimal or rational such as `"33/4"` or `"-0.125"`.

use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use riccati_geom_core::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot read {text:?} as a number: {reason}")]
pub struct NumberError {
    pub text: String,
    pub reason: &'static str,
}

impl Entry {
    pub fn value(&self) -> Result<f64, NumberError> {
        match self {
            Entry::Number(x) => Ok(*x),
            Entry::Text(s) => parse_exact(s),
        }
    }
}

impl From<f64> for Entry {
    fn from(x: f64) -> Self {
        Entry::Number(x)
    }
}

fn bad(text: &str, reason: &'static str) -> NumberError {
    NumberError {
        text: text.to_string(),
        reason,
    }
}

/// Exact value of a decimal (`-1.25`, `3e-2`) or a ratio of two decimals
/// (`33/4`, `1.5/7`), rounded once to the nearest `f64`.
pub fn parse_exact(text: &str) -> Result<f64, NumberError> {
    let t = text.trim();
    let q = match t.split_once('/') {
        Some((num, den)) => {
            let den = decimal(den.trim()).ok_or_else(|| bad(text, "malformed denominator"))?;
            if den.is_zero() {
                return Err(bad(text, "zero denominator"));
            }
            decimal(num.trim()).ok_or_else(|| bad(text, "malformed numerator"))? / den
        }
        None => decimal(t).ok_or_else(|| bad(text, "malformed decimal"))?,
    };
    q.to_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(text, "out of range"))
}

fn decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if exp.unsigned_abs() > 400 {
        return None;
    }
    let all: BigInt = format!("{int}{frac}").parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10u8);
    let mut q = if shift >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// A complex number written as `a`, `bi`, `a+bi` or `a-bi` (`j` also
/// accepted); `a` and `b` are exact decimals or rationals.
pub fn parse_complex(text: &str) -> Result<Complex64, NumberError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return parse_exact(&t).map(|re| Complex64::new(re, 0.0));
    };
    // split before the last sign that does not start the string or an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E' | b'/'));
    let (re, im) = match split {
        Some(k) => (parse_exact(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_exact(s).map_err(|_| bad(text, "expected a+bi"))?,
    };
    Ok(Complex64::new(re, im))
}

/// Comma-separated list of complex numbers.
pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, NumberError> {
    text.split(',').map(parse_complex).collect()
}

/// Comma-separated list of exact numbers.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>, NumberError> {
    text.split(',').map(parse_exact).collect()
}

/// Shortest round-trip digits, switching to exponent form for very small or
/// large magnitudes.
pub struct RealDisplay(pub f64);

impl fmt::Display for RealDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.0;
        let a = x.abs();
        if x == 0.0 || !x.is_finite() || (1e-4..1e9).contains(&a) {
            write!(f, "{}", if x == 0.0 { 0.0 } else { x })
        } else {
            write!(f, "{x:e}")
        }
    }
}

/// `a+bi`, formatted like [`RealDisplay`].
pub struct ComplexDisplay(pub Complex64);

impl fmt::Display for ComplexDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.0;
        if z.im == 0.0 {
            write!(f, "{}", RealDisplay(z.re))
        } else if z.im > 0.0 {
            write!(f, "{}+{}i", RealDisplay(z.re), RealDisplay(z.im))
        } else {
            write!(f, "{}-{}i", RealDisplay(z.re), RealDisplay(-z.im))
        }
    }
}
