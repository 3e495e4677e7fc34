//! Points of the upper half-plane, `SL_2(Z)` reduction, Hecke orbits and divisors.

use std::fmt;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::classical_forms::Cusp;
use crate::error::{Error, Result};
use crate::numeric::{cabs, fmt_float, q_of};
use crate::qseries::{gcd, Coeff, QSeries};

/// An integral binary quadratic form `a x^2 + b x y + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    fn primitive(a: i128, b: i128, c: i128) -> Self {
        let g = gcd(gcd(a.unsigned_abs() as u64, b.unsigned_abs() as u64), c.unsigned_abs() as u64).max(1) as i128;
        let s = if a < 0 { -1 } else { 1 };
        QuadForm {
            a: (s * a / g) as i64,
            b: (s * b / g) as i64,
            c: (s * c / g) as i64,
        }
    }

    /// The form vanishing at `m^{-1} z` when `self` vanishes at `z`.
    fn compose(&self, m: &[[i64; 2]; 2]) -> Self {
        let (a, b, c) = (i128::from(self.a), i128::from(self.b), i128::from(self.c));
        let (p, q, r, s) = (i128::from(m[0][0]), i128::from(m[0][1]), i128::from(m[1][0]), i128::from(m[1][1]));
        QuadForm::primitive(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )
    }

    /// Root in the upper half-plane (requires `disc < 0`).
    pub fn root(&self, prec: u32) -> Complex {
        let d = Float::with_val(prec, -self.disc()).sqrt();
        let two_a = 2 * self.a;
        Complex::with_val(prec, (Float::with_val(prec, -self.b) / two_a, d / two_a))
    }

    /// Whether the form is reduced: `|b| <= a <= c`, with `b >= 0` if `|b| = a` or `a = c`.
    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }
}

/// Reduced primitive positive definite forms of discriminant `d`.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadForm>> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::DomainError(format!("{d} is not a negative discriminant")));
    }
    let mut out = Vec::new();
    let amax = ((-d / 3) as f64).sqrt() as i64 + 1;
    for a in 1..=amax {
        for b in -a..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = QuadForm { a, b, c };
            if f.is_reduced() && gcd(gcd(a as u64, b.unsigned_abs()), c as u64) == 1 {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// A point of the upper half-plane with optional CM data.
#[derive(Clone, Debug, PartialEq)]
pub struct HPoint {
    pub z: Complex,
    /// Quadratic form with root `z` when `z` is known to be a CM point.
    pub cm: Option<QuadForm>,
    /// Order of the stabilizer in `PSL_2(Z)` (1, 2 or 3).
    pub elliptic_order: u8,
}

impl HPoint {
    pub fn new(z: Complex) -> Result<Self> {
        if z.imag().is_sign_negative() || z.imag().is_zero() {
            return Err(Error::DomainError("point must lie in the upper half-plane".into()));
        }
        let e = elliptic_order(&z);
        Ok(HPoint {
            z,
            cm: None,
            elliptic_order: e,
        })
    }

    pub fn from_form(f: QuadForm, prec: u32) -> Result<Self> {
        if f.disc() >= 0 || f.a <= 0 {
            return Err(Error::DomainError("form is not positive definite".into()));
        }
        let mut p = HPoint::new(f.root(prec))?;
        p.cm = Some(f);
        Ok(p)
    }

    pub fn prec(&self) -> u32 {
        self.z.prec().0
    }

    /// Parse `x+yi`, `a/b + c/d*sqrt(-e)` or `(p + q*sqrt(-e))/r`.
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |m: &str| Error::parse(1, 1, format!("{m}: `{s}`"));
        if t.contains("sqrt(") {
            let (body, div) = if let Some(inner) = t.strip_prefix('(') {
                let (inner, rest) = inner.split_once(")/").ok_or_else(|| bad("expected `(...)/r`"))?;
                let r: Rational = crate::numeric::parse_rational(rest).ok_or_else(|| bad("bad divisor"))?;
                (inner.to_string(), r)
            } else {
                (t.clone(), Rational::from(1))
            };
            let (x, y_coef, e) = parse_surd(&body).ok_or_else(|| bad("bad surd"))?;
            let x = x / &div;
            let y_coef = y_coef / &div;
            if y_coef <= 0 || e <= 0 {
                return Err(Error::DomainError("imaginary part must be positive".into()));
            }
            // z^2 - 2 x z + x^2 + y_coef^2 e = 0
            let c = Rational::from(&x * &x) + Rational::from(&y_coef * &y_coef) * e;
            let b = Rational::from(-2 * &x);
            let l = Integer::from(b.denom().lcm_ref(c.denom()));
            let fb = b.numer() * Integer::from(&l / b.denom());
            let fc = c.numer() * Integer::from(&l / c.denom());
            let f = QuadForm::primitive(
                l.to_i128().ok_or_else(|| bad("too large"))?,
                fb.to_i128().ok_or_else(|| bad("too large"))?,
                fc.to_i128().ok_or_else(|| bad("too large"))?,
            );
            return HPoint::from_form(f, prec);
        }
        let z = parse_cartesian(&t, prec).ok_or_else(|| bad("expected `x+yi`"))?;
        HPoint::new(z)
    }

    /// `SL_2(Z)`-reduced representative.
    pub fn reduced(&self) -> HPoint {
        let (w, m) = reduce_sl2(&self.z);
        HPoint {
            cm: self.cm.map(|f| f.compose(&inverse(&m))),
            z: w,
            elliptic_order: self.elliptic_order,
        }
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.cm {
            write!(f, "root of {}x^2{:+}x{:+} (D = {})", q.a, q.b, q.c, q.disc())
        } else {
            let d = (crate::numeric::digits_of(self.prec()) as usize).min(30);
            write!(f, "{}{}{}i", fmt_float(self.z.real(), d), if self.z.imag().is_sign_negative() { "" } else { "+" }, fmt_float(self.z.imag(), d))
        }
    }
}

fn parse_surd(t: &str) -> Option<(Rational, Rational, i64)> {
    let idx = t.find("sqrt(-")?;
    let close = t[idx..].find(')')? + idx;
    let e: i64 = t[idx + 6..close].parse().ok()?;
    if close + 1 != t.len() {
        return None;
    }
    let head = &t[..idx];
    // head is "", "c/d*", "a/b+", "a/b+c/d*", "a/b-c/d*", "-", "+"...
    let head = head.strip_suffix('*').unwrap_or(head);
    let split = head
        .char_indices()
        .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
        .map(|(i, _)| i)
        .next_back();
    let (xs, ys) = match split {
        Some(i) => (&head[..i], &head[i..]),
        None => ("", head),
    };
    let x = if xs.is_empty() { Rational::new() } else { crate::numeric::parse_rational(xs)? };
    let y = match ys {
        "" | "+" => Rational::from(1),
        "-" => Rational::from(-1),
        s => crate::numeric::parse_rational(s.strip_prefix('+').unwrap_or(s))?,
    };
    Some((x, y, e))
}

fn parse_cartesian(t: &str, prec: u32) -> Option<Complex> {
    let body = t.strip_suffix('i')?;
    let split = body
        .char_indices()
        .filter(|&(i, c)| i > 0 && (c == '+' || c == '-') && !body[..i].ends_with(['e', 'E']))
        .map(|(i, _)| i)
        .next_back();
    let (xs, ys) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let ys = match ys {
        "" | "+" => "1",
        "-" => "-1",
        s => s.strip_prefix('+').unwrap_or(s),
    };
    let x = crate::numeric::parse_float(xs, prec)?;
    let y = crate::numeric::parse_float(ys, prec)?;
    Some(Complex::with_val(prec, (x, y)))
}

fn inverse(m: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

fn mat_mul(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Reduce `z` into the standard fundamental domain.
///
/// Returns `(gamma z, gamma)`; the representative has `-1/2 <= Re < 1/2`, `|w| >= 1`,
/// and `Re <= 0` when `|w| = 1`.
pub fn reduce_sl2(z: &Complex) -> (Complex, [[i64; 2]; 2]) {
    let prec = z.prec().0;
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let mut w = z.clone();
    let mut g = [[1i64, 0], [0, 1]];
    for _ in 0..10_000 {
        let n = Float::with_val(prec, w.real() + 0.5f64).floor();
        let n = n.to_integer().and_then(|n| n.to_i64()).unwrap_or(0);
        if n != 0 {
            w -= n;
            g = mat_mul(&[[1, -n], [0, 1]], &g);
        }
        let r2 = Float::with_val(prec, w.norm_ref());
        if r2 < Float::with_val(prec, 1 - &tol) {
            w = -Complex::with_val(prec, w.recip_ref());
            g = mat_mul(&[[0, -1], [1, 0]], &g);
        } else {
            if Float::with_val(prec, &r2 - 1u32).abs() <= tol && w.real().is_sign_positive() && !w.real().is_zero() {
                w = -Complex::with_val(prec, w.recip_ref());
                g = mat_mul(&[[0, -1], [1, 0]], &g);
            }
            break;
        }
    }
    (w, g)
}

/// Stabilizer order of `z` in `PSL_2(Z)`, decided at tolerance `10^{-W/2}`.
pub fn elliptic_order(z: &Complex) -> u8 {
    let prec = z.prec().0;
    let (w, _) = reduce_sl2(z);
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let i = Complex::with_val(prec, (0, 1));
    if cabs(&Complex::with_val(prec, &w - &i)) < tol {
        return 2;
    }
    let rho = Complex::with_val(prec, (Float::with_val(prec, -0.5f64), Float::with_val(prec, 3).sqrt() / 2));
    if cabs(&Complex::with_val(prec, &w - &rho)) < tol {
        return 3;
    }
    1
}

/// The `sigma_1(m)` points `(a tau + b)/d`, `ad = m`, `0 <= b < d`, ordered by `(a, b)`.
pub fn hecke_orbit(m: u64, tau: &HPoint, level: u64) -> Result<Vec<HPoint>> {
    if m == 0 {
        return Err(Error::DomainError("m must be positive".into()));
    }
    if gcd(m, level) != 1 {
        return Err(Error::NotCoprime { m: m as i64, level });
    }
    let prec = tau.prec();
    let mut out = Vec::new();
    for a in 1..=m {
        if !m.is_multiple_of(a) {
            continue;
        }
        let d = m / a;
        for b in 0..d {
            let mut z = Complex::with_val(prec, &tau.z * a);
            z += b;
            z /= d;
            let cm = tau.cm.map(|f| {
                let (a, b, d) = (a as i128, b as i128, d as i128);
                let (fa, fb, fc) = (i128::from(f.a), i128::from(f.b), i128::from(f.c));
                QuadForm::primitive(fa * d * d, -2 * fa * b * d + fb * a * d, fa * b * b - fb * a * b + fc * a * a)
            });
            let mut p = HPoint::new(z)?;
            p.cm = cm;
            out.push(p);
        }
    }
    Ok(out)
}

/// Detect CM: an integral form with root `tau` and `|disc| <= max_disc`.
pub fn cm_detect(tau: &HPoint, max_disc: u64) -> Option<QuadForm> {
    if let Some(f) = tau.cm {
        return (f.disc().unsigned_abs() <= max_disc).then_some(f);
    }
    let prec = tau.prec();
    let (w, g) = reduce_sl2(&tau.z);
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
    let x = w.real();
    let n2 = Float::with_val(prec, w.norm_ref());
    let amax = ((max_disc as f64) / 3.0).sqrt() as i64 + 1;
    for a in 1..=amax {
        let bx = Float::with_val(prec, x * (-2 * a));
        let cx = Float::with_val(prec, &n2 * a);
        let (b, c) = (Float::with_val(prec, bx.round_ref()), Float::with_val(prec, cx.round_ref()));
        if Float::with_val(prec, &bx - &b).abs() < tol && Float::with_val(prec, &cx - &c).abs() < tol {
            let b = b.to_integer()?.to_i64()?;
            let c = c.to_integer()?.to_i64()?;
            let f = QuadForm::primitive(i128::from(a), i128::from(b), i128::from(c));
            if f.disc().unsigned_abs() > max_disc {
                return None;
            }
            return Some(f.compose(&g));
        }
    }
    None
}

/// Value of `sum c_n q^(n/denom)` at `tau`, with a heuristic bound on the neglected tail.
pub fn eval_qseries<C: Coeff>(f: &QSeries<C>, tau: &Complex, prec: u32) -> Result<(Complex, f64)> {
    let q = q_of(tau, f.denom(), prec);
    let r = cabs(&q).to_f64();
    if r >= 0.9 {
        return Err(Error::NonConvergent { abs_q: r });
    }
    let mut qn = Complex::with_val(prec, (&q).pow(f.valuation() as i32));
    let mut sum = Complex::new(prec);
    let mut mags: Vec<f64> = Vec::new();
    for (_, c) in f.terms() {
        let cz = c.to_complex(prec);
        let t = Complex::with_val(prec, &cz * &qn);
        sum += &t;
        mags.push(crate::numeric::log10_abs(&cz));
        qn *= &q;
    }
    let tail = tail_estimate(&mags, r, f.order());
    Ok((sum, tail))
}

fn tail_estimate(log_mags: &[f64], r: f64, order: i64) -> f64 {
    let k = log_mags.len().min(8);
    if k == 0 {
        return 0.0;
    }
    let tail = &log_mags[log_mags.len() - k..];
    let finite: Vec<f64> = tail.iter().copied().filter(|x| x.is_finite()).collect();
    let Some(&last) = finite.last() else { return 0.0 };
    let growth = finite
        .windows(2)
        .map(|w| 10f64.powf(w[1] - w[0]))
        .fold(1.0f64, f64::max);
    let ratio = r * growth;
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    10f64.powf(last) * r.powf(order as f64) * ratio / (1.0 - ratio)
}

/// A place of `X_0(N)`: an interior point or a cusp.
#[derive(Clone, Debug, PartialEq)]
pub enum Place {
    Point(HPoint),
    Cusp(Cusp),
}

/// Formal integer combination of places.
#[derive(Clone, Debug, PartialEq)]
pub struct Divisor {
    pub level: u64,
    pub terms: Vec<(Place, i64)>,
}

impl Divisor {
    pub fn new(level: u64) -> Self {
        Divisor {
            level,
            terms: Vec::new(),
        }
    }

    pub fn add(&mut self, place: Place, mult: i64) {
        if mult != 0 {
            self.terms.push((place, mult));
        }
    }

    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|(_, m)| m).sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("divisor level {}\n", self.level);
        for (p, m) in &self.terms {
            match p {
                Place::Cusp(c) => s.push_str(&format!("{m} cusp {}\n", c.name())),
                Place::Point(h) => s.push_str(&format!("{m} point {h}\n")),
            }
        }
        s
    }
}

/// Something that can be evaluated at places.
pub trait PlaceFunction {
    fn eval_point(&self, z: &Complex, prec: u32) -> Result<Complex>;
    fn eval_cusp(&self, _cusp: Cusp, _prec: u32) -> Result<Complex> {
        Err(Error::PoleOnSupport)
    }
}

/// `f(D) = sum n_P f(P)`.
pub fn eval_divisor(f: &dyn PlaceFunction, d: &Divisor, prec: u32) -> Result<Complex> {
    let mut s = Complex::new(prec);
    for (p, m) in &d.terms {
        let v = match p {
            Place::Point(h) => f.eval_point(&h.z, prec)?,
            Place::Cusp(c) => f.eval_cusp(*c, prec)?,
        };
        s += Complex::with_val(prec, &v * *m);
    }
    Ok(s)
}

/// The function `j` as a [`PlaceFunction`].
pub struct JFunction;

impl PlaceFunction for JFunction {
    fn eval_point(&self, z: &Complex, prec: u32) -> Result<Complex> {
        crate::modval::j(z, prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{bits, to_c64};
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> Complex {
        Complex::with_val(bits(40), (x, y))
    }

    #[test]
    fn reduce_simple() {
        let (w, g) = reduce_sl2(&pt(0.1, 0.2));
        let c = to_c64(&w);
        assert!(c.re >= -0.5 && c.re < 0.5 && c.norm() >= 1.0 - 1e-12);
        assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
    }

    #[test]
    fn reduce_boundary_conventions() {
        let (w, _) = reduce_sl2(&pt(0.5, 2.0));
        assert!((to_c64(&w).re + 0.5).abs() < 1e-12);
        let p = bits(40);
        let x = Float::with_val(p, 0.4f64);
        let y = Float::with_val(p, 1 - Float::with_val(p, x.square_ref())).sqrt();
        let (w, _) = reduce_sl2(&Complex::with_val(p, (x, y)));
        assert!((to_c64(&w).re + 0.4).abs() < 1e-12);
    }

    #[test]
    fn orbit_sizes() {
        let tau = HPoint::new(pt(0.0, 2.0)).unwrap();
        assert_eq!(hecke_orbit(2, &tau, 1).unwrap().len(), 3);
        assert_eq!(hecke_orbit(12, &tau, 1).unwrap().len(), 28);
        assert!(matches!(hecke_orbit(11, &tau, 11), Err(Error::NotCoprime { .. })));
        let o = hecke_orbit(2, &tau, 1).unwrap();
        assert!((to_c64(&o[0].z) - crate::numeric::C64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((to_c64(&o[2].z) - crate::numeric::C64::new(0.0, 4.0)).norm() < 1e-12);
    }

    #[test]
    fn elliptic_points() {
        let p = bits(40);
        assert_eq!(HPoint::parse("i", p).unwrap().elliptic_order, 2);
        assert_eq!(HPoint::parse("-1/2+1/2*sqrt(-3)", p).unwrap().elliptic_order, 3);
        assert_eq!(HPoint::parse("1/2+1/2*sqrt(-3)", p).unwrap().elliptic_order, 3);
        assert_eq!(HPoint::parse("0.1+1.3i", p).unwrap().elliptic_order, 1);
    }

    #[test]
    fn parse_forms() {
        let p = bits(40);
        let t = HPoint::parse("(1+sqrt(-23))/2", p).unwrap();
        assert_eq!(t.cm, Some(QuadForm { a: 1, b: -1, c: 6 }));
        let t = HPoint::parse("1/2 + 1/2*sqrt(-23)", p).unwrap();
        assert_eq!(t.cm.unwrap().disc(), -23);
        let t = HPoint::parse("sqrt(-1)", p).unwrap();
        assert_eq!(t.cm, Some(QuadForm { a: 1, b: 0, c: 1 }));
        let t = HPoint::parse("2*sqrt(-1)", p).unwrap();
        assert_eq!(t.cm.unwrap().disc(), -16);
        let t = HPoint::parse("0.3+1.7i", p).unwrap();
        assert!(t.cm.is_none());
        assert!((to_c64(&t.z) - crate::numeric::C64::new(0.3, 1.7)).norm() < 1e-12);
        assert!(HPoint::parse("0.3-1.7i", p).is_err());
        assert!(HPoint::parse("nonsense", p).is_err());
    }

    #[test]
    fn cm_detection() {
        let p = bits(60);
        let t = HPoint::new(pt(0.0, 1.0)).unwrap();
        assert_eq!(cm_detect(&t, 100).unwrap().disc(), -4);
        let z = QuadForm { a: 3, b: 1, c: 2 }.root(p);
        let t = HPoint::new(z).unwrap();
        assert_eq!(cm_detect(&t, 100), Some(QuadForm { a: 3, b: 1, c: 2 }));
        let mut z2 = Complex::with_val(p, (0, Float::with_val(p, 2).sqrt().sqrt()));
        z2 += 0;
        assert!(cm_detect(&HPoint::new(z2).unwrap(), 10_000).is_none());
    }

    #[test]
    fn orbit_cm_forms_follow_points() {
        let p = bits(60);
        let tau = HPoint::parse("(1+sqrt(-23))/2", p).unwrap();
        for q in hecke_orbit(6, &tau, 1).unwrap() {
            let f = q.cm.unwrap();
            let plain = HPoint::new(q.z.clone()).unwrap();
            assert_eq!(cm_detect(&plain, 100_000), Some(f));
        }
    }

    #[test]
    fn reduced_form_counts() {
        assert_eq!(reduced_forms(-23).unwrap().len(), 3);
        assert_eq!(reduced_forms(-4).unwrap(), vec![QuadForm { a: 1, b: 0, c: 1 }]);
        assert_eq!(reduced_forms(-3).unwrap().len(), 1);
        assert_eq!(reduced_forms(-71).unwrap().len(), 7);
        assert!(reduced_forms(-5).is_err());
    }

    #[test]
    fn eval_series_geometric() {
        let p = bits(40);
        let s = QSeries::from_dense((), 1, 0, vec![Rational::from(1); 60], 59).unwrap();
        let tau = pt(0.0, 1.0);
        let (v, tail) = eval_qseries(&s, &tau, p).unwrap();
        let q = (-2.0 * std::f64::consts::PI).exp();
        assert!((to_c64(&v).re - 1.0 / (1.0 - q)).abs() < 1e-14);
        assert!(tail < 1e-40);
    }

    #[test]
    fn divisor_degree_and_pole() {
        let p = bits(30);
        let mut d = Divisor::new(1);
        d.add(Place::Point(HPoint::parse("i", p).unwrap()), 2);
        d.add(Place::Point(HPoint::parse("-1/2+1/2*sqrt(-3)", p).unwrap()), -1);
        assert_eq!(d.degree(), 1);
        let v = to_c64(&eval_divisor(&JFunction, &d, p).unwrap());
        assert!((v.re - 3456.0).abs() < 1e-9);
        d.add(Place::Cusp(Cusp::Infinity), 1);
        assert_eq!(eval_divisor(&JFunction, &d, p).unwrap_err(), Error::PoleOnSupport);
    }

    proptest! {
        #[test]
        fn reduction_lands_in_domain(x in -5.0f64..5.0, ly in -3.0f64..1.0) {
            let z = pt(x, 10f64.powf(ly));
            let (w, g) = reduce_sl2(&z);
            let c = to_c64(&w);
            prop_assert!(c.re >= -0.5 - 1e-12 && c.re < 0.5);
            prop_assert!(c.norm() >= 1.0 - 1e-9);
            prop_assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
            let zz = to_c64(&z);
            let img = (zz * g[0][0] as f64 + g[0][1] as f64) / (zz * g[1][0] as f64 + g[1][1] as f64);
            prop_assert!((img - c).norm() < 1e-8 * (1.0 + c.norm()));
        }
    }
}
