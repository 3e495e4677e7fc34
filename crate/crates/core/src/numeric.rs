//! Precision bookkeeping and small helpers around `rug` floats.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

pub use num_complex::Complex64 as C64;

/// Binary precision carrying at least `digits` decimal digits plus guard bits.
pub fn bits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

/// Decimal digits represented by a binary precision.
pub fn digits_of(bits: u32) -> u32 {
    (f64::from(bits) / std::f64::consts::LOG2_10).floor() as u32
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn two_pi_i(prec: u32) -> Complex {
    let mut t = pi(prec);
    t *= 2;
    Complex::with_val(prec, (0, t))
}

/// `exp(2 pi i z / width)`.
pub fn q_of(z: &Complex, width: u32, prec: u32) -> Complex {
    let mut w = Complex::with_val(prec, z);
    w *= two_pi_i(prec);
    w /= width;
    w.exp()
}

pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn cabs_f64(z: &Complex) -> f64 {
    cabs(z).to_f64()
}

pub fn ten_pow(prec: u32, e: i32) -> Float {
    Float::with_val(prec, 10).pow(e)
}

/// Decimal exponent of `|x|`, or `i64::MIN` for zero.
pub fn log10_abs(z: &Complex) -> f64 {
    let a = cabs(z);
    if a.is_zero() {
        f64::NEG_INFINITY
    } else {
        let (m, e) = a.to_f64_exp();
        m.abs().log10() + f64::from(e) * std::f64::consts::LOG10_2
    }
}

pub fn rat_to_complex(q: &Rational, prec: u32) -> Complex {
    Complex::with_val(prec, (Float::with_val(prec, q), 0))
}

pub fn to_c64(z: &Complex) -> C64 {
    C64::new(z.real().to_f64(), z.imag().to_f64())
}

pub fn from_c64(z: C64, prec: u32) -> Complex {
    Complex::with_val(prec, (z.re, z.im))
}

/// Nearest integer to a float.
pub fn round_to_integer(x: &Float) -> Option<Integer> {
    let r = Float::with_val(x.prec(), x.round_ref());
    r.to_integer()
}

/// Format a float with `digits` significant decimal digits.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(1)))
}

/// Format a complex number as `re,im`.
pub fn fmt_complex(z: &Complex, digits: usize) -> String {
    format!("{},{}", fmt_float(z.real(), digits), fmt_float(z.imag(), digits))
}

/// Parse a decimal float at the given precision.
pub fn parse_float(s: &str, prec: u32) -> Option<Float> {
    Float::parse(s.trim()).ok().map(|p| Float::with_val(prec, p))
}

/// Parse `re,im` into a complex number.
pub fn parse_complex_pair(s: &str, prec: u32) -> Option<Complex> {
    let (re, im) = s.split_once(',')?;
    Some(Complex::with_val(
        prec,
        (parse_float(re, prec)?, parse_float(im, prec)?),
    ))
}

/// Canonical text for a rational: `p` or `p/q`.
pub fn fmt_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: Integer = n.parse().ok()?;
    let d: Integer = d.parse().ok()?;
    if d == 0 {
        return None;
    }
    Some(Rational::from((n, d)))
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
