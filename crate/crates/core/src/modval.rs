//! Direct numerical values of `E_2`, `E_4`, `E_6`, `Delta` and `j` at points of the upper half-plane.
//!
//! High-precision versions use Lambert series and the pentagonal expansion of
//! `eta`; the `_f64` variants serve the quadrature code.

use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::halfplane::reduce_sl2;
use crate::numeric::{cabs, q_of, C64};

fn check_q(q: &Complex) -> Result<()> {
    let a = cabs(q).to_f64();
    if a >= 0.999 {
        return Err(Error::NonConvergent { abs_q: a });
    }
    Ok(())
}

/// `sum_{n>=1} n^k q^n / (1 - q^n)`.
fn lambert(q: &Complex, k: u32, prec: u32) -> Complex {
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) - 8));
    let mut sum = Complex::new(prec);
    let mut qn = Complex::with_val(prec, q);
    let mut n: u32 = 1;
    loop {
        let den = Complex::with_val(prec, 1 - &qn);
        let mut t = Complex::with_val(prec, &qn / &den);
        t *= Float::with_val(prec, n).pow(k as i32);
        sum += &t;
        if n > 8 && cabs(&t) < Float::with_val(prec, &eps * (1 + cabs(&sum))) {
            break;
        }
        qn *= q;
        n += 1;
    }
    sum
}

fn eisenstein_from_lambert(q: &Complex, k: u32, c: i64, prec: u32) -> Complex {
    let mut s = lambert(q, k, prec);
    s *= c;
    s += 1;
    s
}

pub fn e2(z: &Complex, prec: u32) -> Result<Complex> {
    let q = q_of(z, 1, prec);
    check_q(&q)?;
    Ok(eisenstein_from_lambert(&q, 1, -24, prec))
}

pub fn e4(z: &Complex, prec: u32) -> Result<Complex> {
    let q = q_of(z, 1, prec);
    check_q(&q)?;
    Ok(eisenstein_from_lambert(&q, 3, 240, prec))
}

pub fn e6(z: &Complex, prec: u32) -> Result<Complex> {
    let q = q_of(z, 1, prec);
    check_q(&q)?;
    Ok(eisenstein_from_lambert(&q, 5, -504, prec))
}

/// `prod (1 - q^n)` by the pentagonal number theorem.
fn euler(q: &Complex, prec: u32) -> Complex {
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) - 8));
    let mut sum = Complex::with_val(prec, 1);
    let mut k: u32 = 1;
    loop {
        let a = k * (3 * k - 1) / 2;
        let b = k * (3 * k + 1) / 2;
        let qa = Complex::with_val(prec, q.pow(a));
        let qb = Complex::with_val(prec, q.pow(b));
        let t = Complex::with_val(prec, &qa + &qb);
        if k % 2 == 1 {
            sum -= &t;
        } else {
            sum += &t;
        }
        if cabs(&qa) < eps {
            break;
        }
        k += 1;
    }
    sum
}

/// `Delta(z) = q prod (1 - q^n)^24`.
pub fn delta(z: &Complex, prec: u32) -> Result<Complex> {
    let q = q_of(z, 1, prec);
    check_q(&q)?;
    let e = euler(&q, prec);
    let mut d = Complex::with_val(prec, (&e).pow(24));
    d *= &q;
    Ok(d)
}

/// `j(z)` evaluated at the reduced representative of `z`.
pub fn j(z: &Complex, prec: u32) -> Result<Complex> {
    let (w, _) = reduce_sl2(z);
    j_unreduced(&w, prec)
}

/// `j = E_4^3 / Delta` evaluated at `z` without reduction.
pub fn j_unreduced(z: &Complex, prec: u32) -> Result<Complex> {
    let e = e4(z, prec)?;
    let d = delta(z, prec)?;
    let mut r = Complex::with_val(prec, (&e).pow(3));
    r /= &d;
    Ok(r)
}

/// `(E_4^2 E_6 / Delta)(z) = -theta j (z)`, without reduction.
pub fn e4sq_e6_over_delta(z: &Complex, prec: u32) -> Result<Complex> {
    let a = e4(z, prec)?;
    let b = e6(z, prec)?;
    let d = delta(z, prec)?;
    let mut r = Complex::with_val(prec, a.square_ref());
    r *= &b;
    r /= &d;
    Ok(r)
}

// ---- double precision ----

fn qf(w: C64) -> C64 {
    (C64::new(0.0, 2.0 * std::f64::consts::PI) * w).exp()
}

fn lambert_f64(q: C64, k: i32) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    let mut qn = q;
    for n in 1..2000 {
        let t = qn / (1.0 - qn) * f64::from(n).powi(k);
        sum += t;
        if t.norm() < 1e-18 * (1.0 + sum.norm()) {
            break;
        }
        qn *= q;
    }
    sum
}

pub fn e2_f64(w: C64) -> C64 {
    1.0 - 24.0 * lambert_f64(qf(w), 1)
}

pub fn e4_f64(w: C64) -> C64 {
    1.0 + 240.0 * lambert_f64(qf(w), 3)
}

pub fn e6_f64(w: C64) -> C64 {
    1.0 - 504.0 * lambert_f64(qf(w), 5)
}

pub fn delta_f64(w: C64) -> C64 {
    let q = qf(w);
    let mut sum = C64::new(1.0, 0.0);
    for k in 1..200i32 {
        let a = k * (3 * k - 1) / 2;
        let b = k * (3 * k + 1) / 2;
        let qa = q.powi(a);
        let t = qa + q.powi(b);
        sum += if k % 2 == 1 { -t } else { t };
        if qa.norm() < 1e-18 {
            break;
        }
    }
    q * sum.powi(24)
}

pub fn j_f64(w: C64) -> C64 {
    e4_f64(w).powi(3) / delta_f64(w)
}
