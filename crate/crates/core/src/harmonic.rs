//! Harmonic weak Maass forms evaluated from coefficient data.
//!
//! At a cusp of width `alpha` a form of weight `k` is
//! `sum a+(n) q^(n/alpha) + b(0) y^(1-k) + sum_{n != 0} b(n) G(-4 pi n y / alpha, 1-k) e(n z / alpha)`
//! with `G(x, s) = int_x^inf t^(s-1) e^(-t) dt`, the upper incomplete gamma function
//! written with the argument first.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::classical_forms::{cusps, Cusp, FormExpansion};
use crate::error::{Error, Result};
use crate::numeric::{cabs_f64, pi, q_of};
use crate::operators::{hecke_t, HeckeConvention};
use crate::qseries::{gcd, Coeff, QSeries};

fn eps(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -(prec as i32)))
}

/// Integer value of `s`, if any.
fn as_integer(s: &Float) -> Option<i32> {
    if s.is_integer() {
        s.to_i32_saturating()
    } else {
        None
    }
}

/// Extra working bits for the downward recurrence and the series.
fn guard_bits(s: &Float, x: &Float) -> u32 {
    let xs = x.to_f64().abs();
    let ss = s.to_f64().abs();
    64 + ((ss + 1.0) * (xs + 2.0).log2()) as u32 + (xs * std::f64::consts::LOG2_E) as u32
}

/// `G(x, s)` by the lower-gamma series `Gamma(s) - gamma(s, x)`; `s` not a non-positive integer.
pub fn incomplete_gamma_series(s: &Float, x: &Float, prec: u32) -> Result<Float> {
    if *x <= 0 {
        return Err(Error::DomainError("incomplete gamma needs x > 0".into()));
    }
    if as_integer(s).is_some_and(|n| n <= 0) {
        return Err(Error::DomainError("series needs s not a non-positive integer".into()));
    }
    let wp = prec + guard_bits(s, x);
    let s = Float::with_val(wp, s);
    let x = Float::with_val(wp, x);
    let tol = eps(wp);
    // gamma(s, x) = x^s e^-x sum x^n / (s (s+1) ... (s+n))
    let mut term = Float::with_val(wp, s.recip_ref());
    let mut sum = term.clone();
    let mut n = 1u32;
    loop {
        let den = Float::with_val(wp, &s + n);
        term *= &x;
        term /= &den;
        sum += &term;
        if Float::with_val(wp, term.abs_ref()) < Float::with_val(wp, &tol * Float::with_val(wp, sum.abs_ref())) && Float::with_val(wp, &x / &den) < 0.5 {
            break;
        }
        n += 1;
        if n > 1_000_000 {
            return Err(Error::Divergent("incomplete gamma series".into()));
        }
    }
    let pre = Float::with_val(wp, (&x).pow(&s)) * Float::with_val(wp, (-x.clone()).exp_ref());
    let lower = Float::with_val(wp, &pre * &sum);
    let g = Float::with_val(wp, s.gamma_ref());
    Ok(Float::with_val(prec, g - lower))
}

/// `G(x, s)` by the Legendre continued fraction (modified Lentz).
pub fn incomplete_gamma_cf(s: &Float, x: &Float, prec: u32) -> Result<Float> {
    if *x <= 0 {
        return Err(Error::DomainError("incomplete gamma needs x > 0".into()));
    }
    let wp = prec + 64;
    let s = Float::with_val(wp, s);
    let x = Float::with_val(wp, x);
    let tiny = Float::with_val(wp, Float::i_exp(1, -(wp as i32) * 2));
    let tol = eps(wp);
    let mut b = Float::with_val(wp, &x + 1u32) - &s;
    let mut c = Float::with_val(wp, tiny.recip_ref());
    let mut d = Float::with_val(wp, b.recip_ref());
    let mut h = d.clone();
    let mut i = 1u32;
    loop {
        let an = -Float::with_val(wp, Float::with_val(wp, i - &s) * i);
        b += 2u32;
        d = Float::with_val(wp, &an * &d) + &b;
        if Float::with_val(wp, d.abs_ref()) < tiny {
            d = tiny.clone();
        }
        c = Float::with_val(wp, &an / &c) + &b;
        if Float::with_val(wp, c.abs_ref()) < tiny {
            c = tiny.clone();
        }
        d.recip_mut();
        let del = Float::with_val(wp, &d * &c);
        h *= &del;
        if Float::with_val(wp, &del - 1u32).abs() < tol {
            break;
        }
        i += 1;
        if i > 10_000_000 {
            return Err(Error::Divergent("incomplete gamma continued fraction".into()));
        }
    }
    let pre = Float::with_val(wp, (&x).pow(&s)) * Float::with_val(wp, (-x.clone()).exp_ref());
    Ok(Float::with_val(prec, pre * h))
}

/// `E_1(x) = G(x, 0)`.
fn exp_integral_e1(x: &Float, prec: u32) -> Result<Float> {
    if *x > 4 {
        return incomplete_gamma_cf(&Float::new(prec), x, prec);
    }
    let wp = prec + 64;
    let x = Float::with_val(wp, x);
    let tol = eps(wp);
    // E_1(x) = -gamma - ln x - sum_{n>=1} (-x)^n / (n n!)
    let mut pw = Float::with_val(wp, 1);
    let mut sum = Float::new(wp);
    let mut n = 1u32;
    loop {
        pw *= &x;
        pw /= n;
        pw = -pw;
        let t = Float::with_val(wp, &pw / n);
        sum += &t;
        if Float::with_val(wp, t.abs_ref()) < tol && n > 2 {
            break;
        }
        n += 1;
    }
    let euler = Float::with_val(wp, Constant::Euler);
    let v = -euler - Float::with_val(wp, x.ln_ref()) - sum;
    Ok(Float::with_val(prec, v))
}

/// `G(x, s) = int_x^inf t^(s-1) e^(-t) dt` for `x > 0`.
///
/// Integer `s` uses the recurrence `G(x, s+1) = s G(x, s) + x^s e^(-x)` anchored at
/// `G(x, 1) = e^(-x)` (upward) or `G(x, 0) = E_1(x)` (downward); other `s` use the
/// series for small `x` and the continued fraction otherwise.
pub fn incomplete_gamma(s: &Float, x: &Float, prec: u32) -> Result<Float> {
    if *x <= 0 {
        return Err(Error::DomainError(format!("incomplete gamma needs x > 0, got {}", x.to_f64())));
    }
    match as_integer(s) {
        Some(n) => {
            let wp = prec + guard_bits(s, x);
            let x = Float::with_val(wp, x);
            let ex = Float::with_val(wp, (-x.clone()).exp_ref());
            if n >= 1 {
                let mut g = ex.clone();
                let mut xp = Float::with_val(wp, 1);
                for j in 1..n {
                    xp *= &x;
                    g *= j;
                    g += Float::with_val(wp, &xp * &ex);
                }
                Ok(Float::with_val(prec, g))
            } else {
                let mut g = exp_integral_e1(&x, wp)?;
                for j in (n..0).rev() {
                    // G(x, j) = (G(x, j+1) - x^j e^-x) / j
                    let xp = Float::with_val(wp, (&x).pow(j));
                    g -= Float::with_val(wp, &xp * &ex);
                    g /= j;
                }
                Ok(Float::with_val(prec, g))
            }
        }
        None => {
            if *x < 4 {
                incomplete_gamma_series(s, x, prec)
            } else {
                incomplete_gamma_cf(s, x, prec)
            }
        }
    }
}

/// `G(x, s)` for integer `s`, extended to `x <= 0` when `s >= 1` by the finite sum
/// `(s-1)! e^(-x) sum_{j<s} x^j / j!`.
fn gamma_factor(s: i32, x: &Float, prec: u32) -> Result<Float> {
    if *x > 0 {
        return incomplete_gamma(&Float::with_val(prec, s), x, prec);
    }
    if s < 1 {
        return Err(Error::DomainError(format!("G(x, {s}) is undefined for x <= 0")));
    }
    let wp = prec + 32;
    let x = Float::with_val(wp, x);
    let mut term = Float::with_val(wp, 1);
    let mut sum = Float::with_val(wp, 1);
    for j in 1..s {
        term *= &x;
        term /= j;
        sum += &term;
    }
    let fact = Float::with_val(wp, Integer::from(Integer::factorial(s as u32 - 1)));
    let ex = Float::with_val(wp, (-x).exp_ref());
    Ok(Float::with_val(prec, sum * fact * ex))
}

/// Coefficient data of a harmonic form at one cusp.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicCusp<C: Coeff> {
    pub cusp: Cusp,
    pub width: u32,
    /// Holomorphic part `sum a+(n) q^(n/width)`.
    pub aplus: QSeries<C>,
    /// Nonholomorphic coefficients indexed by `-n`: the entry at exponent `e` is `b(-e)`.
    pub bminus: QSeries<C>,
    pub bzero: C,
}

impl<C: Coeff> HarmonicCusp<C> {
    /// `b(n)` for `n != 0`, `None` outside the stored window.
    pub fn b(&self, n: i64) -> Option<C> {
        if n == 0 {
            Some(self.bzero.clone())
        } else {
            self.bminus.coeff(-n)
        }
    }
}

/// Build the reversed nonholomorphic series from `(n, b(n))` terms, `n != 0`,
/// known for `-n` in `[valuation, order]`.
pub fn b_series<C: Coeff>(ctx: C::Ctx, width: u32, terms: Vec<(i64, C)>, valuation: i64, order: i64) -> Result<QSeries<C>> {
    if terms.iter().any(|(n, _)| *n == 0) {
        return Err(Error::DomainError("b(0) is stored separately".into()));
    }
    QSeries::from_terms(ctx, width, valuation, order, terms.into_iter().map(|(n, c)| (-n, c)))
}

/// A harmonic weak Maass form given by its coefficients at every cusp.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicData<C: Coeff> {
    pub weight: i32,
    pub level: u64,
    pub cusps: Vec<HarmonicCusp<C>>,
    pub provenance: String,
}

impl<C: Coeff> HarmonicData<C> {
    pub fn new(weight: i32, level: u64, data: Vec<HarmonicCusp<C>>, provenance: impl Into<String>) -> Result<Self> {
        if weight % 2 != 0 {
            return Err(Error::DomainError(format!("weight {weight} must be even")));
        }
        let expected = cusps(level)?;
        if data.len() != expected.len() || !expected.iter().all(|c| data.iter().any(|d| d.cusp == *c)) {
            return Err(Error::IncompleteData(format!("need data at every cusp of level {level}")));
        }
        for d in &data {
            let w = d.cusp.width(level);
            if d.width != w || d.aplus.denom() != w || d.bminus.denom() != w {
                return Err(Error::DenomMismatch(d.aplus.denom(), w));
            }
            if d.bminus.coeff(0).is_some_and(|c| !c.is_zero()) {
                return Err(Error::DomainError("b(0) is stored separately".into()));
            }
        }
        Ok(HarmonicData {
            weight,
            level,
            cusps: data,
            provenance: provenance.into(),
        })
    }

    /// A weakly holomorphic form viewed as harmonic with `b = 0`.
    pub fn from_form(f: &FormExpansion<C>) -> Result<Self> {
        let data = f
            .expansions
            .iter()
            .map(|(c, s)| {
                let w = c.width(f.level);
                Ok(HarmonicCusp {
                    cusp: *c,
                    width: w,
                    aplus: s.clone(),
                    bminus: QSeries::zero(s.ctx(), w, 1, s.order().max(1))?,
                    bzero: C::zero(s.ctx()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(f.weight, f.level, data, f.provenance.clone())
    }

    pub fn at(&self, cusp: Cusp) -> Result<&HarmonicCusp<C>> {
        self.cusps
            .iter()
            .find(|d| d.cusp == cusp)
            .ok_or_else(|| Error::IncompleteData(format!("no data at cusp {}", cusp.name())))
    }

    /// True when the holomorphic part has a pole only at `i infinity`.
    pub fn poles_only_at_infinity(&self) -> bool {
        self.cusps.iter().filter(|d| d.cusp != Cusp::Infinity).all(|d| {
            d.aplus.terms().all(|(n, c)| n >= 0 || c.is_zero())
        })
    }

    /// Arithmetic in the sense: principal part at `i infinity` algebraic with vanishing
    /// constant term, and constant principal parts elsewhere.
    pub fn arithmetic_flag(&self, algebraic: impl Fn(&C) -> bool) -> bool {
        let Ok(inf) = self.at(Cusp::Infinity) else { return false };
        if inf.aplus.coeff(0).is_some_and(|c| !c.is_zero()) {
            return false;
        }
        let principal_ok = inf.aplus.terms().filter(|(n, _)| *n < 0).all(|(_, c)| algebraic(c));
        principal_ok && self.poles_only_at_infinity()
    }
}

/// A value with an estimate of the truncation error.
#[derive(Clone, Debug)]
pub struct HarmonicValue {
    pub value: Complex,
    pub tail: f64,
}

/// Tail of a series from the magnitudes of its last stored terms: `(bound, ratio)`.
fn tail_estimate(mags: &[f64], base: f64) -> (f64, f64) {
    let n = mags.len();
    if n == 0 {
        return (0.0, base);
    }
    let w = (n / 4).max(1);
    let a1 = mags[n - w..].iter().cloned().fold(0.0, f64::max);
    let rho = if n >= 2 * w {
        let a0 = mags[n - 2 * w..n - w].iter().cloned().fold(0.0, f64::max);
        if a0 > 0.0 && a1 > 0.0 {
            (a1 / a0).powf(1.0 / w as f64).max(base)
        } else {
            base
        }
    } else {
        base
    };
    if rho >= 0.95 {
        return (f64::INFINITY, rho);
    }
    (2.0 * a1 * rho / (1.0 - rho), rho)
}

/// Evaluate the expansion of `h` at `cusp` at the point `tau`.
///
/// With `tol`, fails with `InsufficientCoefficients` if either tail bound exceeds it.
pub fn eval_harmonic<C: Coeff>(h: &HarmonicData<C>, tau: &Complex, cusp: Cusp, prec: u32, tol: Option<f64>) -> Result<HarmonicValue> {
    let d = h.at(cusp)?;
    let alpha = d.width;
    let y = Float::with_val(prec, tau.imag());
    if y <= 0 {
        return Err(Error::DomainError("point must lie in the upper half-plane".into()));
    }
    let q = q_of(tau, alpha, prec);
    let base = cabs_f64(&q);
    let qinv = Complex::with_val(prec, q.recip_ref());
    let qpow = |e: i64| -> Complex {
        if e >= 0 {
            Complex::with_val(prec, (&q).pow(e as u32))
        } else {
            Complex::with_val(prec, (&qinv).pow((-e) as u32))
        }
    };

    let mut value = Complex::new(prec);
    let mut mags = Vec::new();
    let mut cur = qpow(d.aplus.valuation());
    for (_, c) in d.aplus.terms() {
        let t = Complex::with_val(prec, c.to_complex(prec) * &cur);
        mags.push(cabs_f64(&t));
        value += &t;
        cur *= &q;
    }
    let (tail_a, rho_a) = tail_estimate(&mags, base);

    // b(0) y^(1-k)
    let yk = Float::with_val(prec, (&y).pow(1 - h.weight));
    value += Complex::with_val(prec, d.bzero.to_complex(prec) * &yk);

    let s = 1 - h.weight;
    let four_pi_y = Float::with_val(prec, pi(prec) * &y) * 4u32 / alpha;
    let mut mags_b = Vec::new();
    let mut cur = qpow(-d.bminus.valuation());
    for (e, c) in d.bminus.terms() {
        if !c.is_zero() {
            // b(n) with n = -e: G(4 pi e y / alpha, 1-k) q^(-e)
            let x = Float::with_val(prec, &four_pi_y * e);
            let g = gamma_factor(s, &x, prec)?;
            let t = Complex::with_val(prec, c.to_complex(prec) * &cur) * g;
            mags_b.push(cabs_f64(&t));
            value += &t;
        } else {
            mags_b.push(0.0);
        }
        cur *= &qinv;
    }
    let (tail_b, rho_b) = tail_estimate(&mags_b, base);

    if let Some(tol) = tol {
        for (tail, rho, ser) in [(tail_a, rho_a, &d.aplus), (tail_b, rho_b, &d.bminus)] {
            if tail > tol {
                let extra = if rho < 1.0 && rho > 0.0 {
                    ((tail / tol).ln() / (1.0 / rho).ln()).ceil() as i64
                } else {
                    ser.order() - ser.valuation() + 1
                };
                return Err(Error::InsufficientCoefficients {
                    needed: ser.order() + extra.max(1),
                    have: ser.order(),
                });
            }
        }
    }
    Ok(HarmonicValue {
        value,
        tail: tail_a + tail_b,
    })
}

/// `Delta_k f = -y^2 (f_xx + f_yy) + i k y (f_x + i f_y)` by 5-point stencils with step `h`.
pub fn laplacian<F>(f: &F, weight: i32, z: &Complex, h: &Float, prec: u32) -> Result<Complex>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    let at = |dx: &Float, dy: &Float| -> Result<Complex> {
        let mut w = Complex::with_val(prec, z);
        w += Complex::with_val(prec, (dx, dy));
        f(&w)
    };
    let zero = Float::new(prec);
    let mh = Float::with_val(prec, -h);
    let f0 = f(z)?;
    let fxp = at(h, &zero)?;
    let fxm = at(&mh, &zero)?;
    let fyp = at(&zero, h)?;
    let fym = at(&zero, &mh)?;
    let h2 = Float::with_val(prec, h.square_ref());
    let two_f0 = Complex::with_val(prec, &f0 * 2u32);
    let fxx = Complex::with_val(prec, Complex::with_val(prec, &fxp + &fxm) - &two_f0) / &h2;
    let fyy = Complex::with_val(prec, Complex::with_val(prec, &fyp + &fym) - &two_f0) / &h2;
    let fx = Complex::with_val(prec, &fxp - &fxm) / Float::with_val(prec, h * 2u32);
    let fy = Complex::with_val(prec, &fyp - &fym) / Float::with_val(prec, h * 2u32);
    let y = Float::with_val(prec, z.imag());
    let y2 = Float::with_val(prec, y.square_ref());
    let mut lap = Complex::with_val(prec, fxx + fyy) * y2;
    lap = -lap;
    let dz = Complex::with_val(prec, &fx + Complex::with_val(prec, fy * Complex::with_val(prec, (0, 1))));
    let ik = Complex::with_val(prec, (0, weight));
    lap += Complex::with_val(prec, dz * ik) * y;
    Ok(lap)
}

/// Result of [`harmonicity_check`].
#[derive(Clone, Debug)]
pub struct HarmonicityReport {
    /// `max |Delta_k f|` at the given spacing.
    pub max_residual: f64,
    /// Estimated discretization and rounding floor at that spacing.
    pub noise_floor: f64,
    /// `max` of the Richardson-extrapolated Laplacian.
    pub extrapolated: f64,
}

impl HarmonicityReport {
    pub fn is_harmonic(&self) -> bool {
        self.max_residual <= self.noise_floor
    }
}

/// Finite-difference harmonicity test of `f` in weight `k` on a grid, spacing `h <= y/100`.
pub fn laplacian_check<F>(f: &F, weight: i32, grid: &[Complex], h: f64, prec: u32) -> Result<HarmonicityReport>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    let mut rep = HarmonicityReport {
        max_residual: 0.0,
        noise_floor: 0.0,
        extrapolated: 0.0,
    };
    for z in grid {
        let y = z.imag().to_f64();
        if !(h > 0.0 && h <= y / 100.0) {
            return Err(Error::DomainError(format!("grid spacing {h} exceeds y/100 at y = {y}")));
        }
        let h1 = Float::with_val(prec, h);
        let h2 = Float::with_val(prec, &h1 / 2u32);
        let r1 = laplacian(f, weight, z, &h1, prec)?;
        let r2 = laplacian(f, weight, z, &h2, prec)?;
        let diff = cabs_f64(&Complex::with_val(prec, &r1 - &r2));
        let extrap = Complex::with_val(prec, Complex::with_val(prec, &r2 * 4u32) - &r1) / 3u32;
        let fmag = cabs_f64(&f(z)?).max(1e-300);
        let rounding = 2f64.powi(8 - prec as i32) * fmag * 8.0 * (y / h) * (y / h);
        let floor = 2.0 * diff * 4.0 / 3.0 + rounding;
        let r = cabs_f64(&r1);
        rep.max_residual = rep.max_residual.max(r);
        rep.noise_floor = rep.noise_floor.max(floor);
        rep.extrapolated = rep.extrapolated.max(cabs_f64(&extrap));
    }
    Ok(rep)
}

/// [`laplacian_check`] applied to the expansion of `h` at `cusp`.
pub fn harmonicity_check<C: Coeff>(h: &HarmonicData<C>, cusp: Cusp, grid: &[Complex], spacing: f64, prec: u32) -> Result<HarmonicityReport> {
    let f = |z: &Complex| eval_harmonic(h, z, cusp, prec, None).map(|v| v.value);
    laplacian_check(&f, h.weight, grid, spacing, prec)
}

/// Apply a denominator-1 series operator to the exponent numerators of `s`.
fn on_numerators<C: Coeff>(s: &QSeries<C>, op: impl Fn(&QSeries<C>) -> Result<QSeries<C>>) -> Result<QSeries<C>> {
    let one = QSeries::from_dense(s.ctx(), 1, s.valuation(), s.coeffs().to_vec(), s.order())?;
    let r = op(&one)?;
    QSeries::from_dense(s.ctx(), s.denom(), r.valuation(), r.coeffs().to_vec(), r.order())
}

/// `sum_{d | m} d^e` as a rational.
fn divisor_power_sum(m: u64, e: i32) -> Rational {
    (1..=m)
        .filter(|d| m.is_multiple_of(*d))
        .fold(Rational::new(), |acc, d| acc + Rational::from(d).pow(e))
}

/// `h | T_m` in weight `k`, `gcd(m, N) = 1`.
///
/// Both `a+` and `b` (including `b(0)`) transform by the normalized weight-`k` rule
/// `c(n) -> sum_{d | (m,n)} d^(k-1) c(mn/d^2)`; this is the unique action on `b` for
/// which `xi_k(h|T_m) = m^(k-1) (xi_k h)|T_m` holds coefficientwise.
pub fn hecke_on_harmonic<C: Coeff>(h: &HarmonicData<C>, m: u64) -> Result<HarmonicData<C>> {
    if m == 0 {
        return Err(Error::DomainError("T_0 is undefined".into()));
    }
    if gcd(m, h.level) != 1 {
        return Err(Error::NotCoprime { m: m as i64, level: h.level });
    }
    let k = h.weight;
    let level = h.level;
    let op = |s: &QSeries<C>| hecke_t(s, m, k, level, HeckeConvention::Normalized);
    let sigma = divisor_power_sum(m, k - 1);
    let data = h
        .cusps
        .iter()
        .map(|d| {
            Ok(HarmonicCusp {
                cusp: d.cusp,
                width: d.width,
                aplus: on_numerators(&d.aplus, op)?,
                bminus: on_numerators(&d.bminus, op)?,
                bzero: d.bzero.scale(&sigma),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HarmonicData {
        weight: k,
        level,
        cusps: data,
        provenance: format!("{} | T_{m}", h.provenance),
    })
}

/// `xi_k h` at one cusp, as `pi^pi_power * series + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct XiCusp<C: Coeff> {
    pub cusp: Cusp,
    pub series: QSeries<C>,
    pub constant: C,
}

/// The weakly holomorphic form `xi_k h` of weight `2 - k`, with exact coefficients
/// when the input coefficients are exact.
#[derive(Clone, Debug, PartialEq)]
pub struct XiImage<C: Coeff> {
    pub weight: i32,
    pub pi_power: i32,
    pub cusps: Vec<XiCusp<C>>,
}

/// Coefficients of `xi_k h`: `c(-n) = -conj(b(n)) (-4 pi n / alpha)^(1-k)` for `n != 0`
/// and constant `(1-k) conj(b(0))`.
pub fn xi_coefficients<C: Coeff>(h: &HarmonicData<C>) -> Result<XiImage<C>> {
    let k = h.weight;
    let p = 1 - k;
    let cusps = h
        .cusps
        .iter()
        .map(|d| {
            let a = d.width;
            let series = QSeries::from_terms(
                d.bminus.ctx(),
                a,
                d.bminus.valuation(),
                d.bminus.order(),
                d.bminus.terms().filter(|(e, c)| *e != 0 && !c.is_zero()).map(|(e, c)| {
                    let f = Rational::from((4 * e, a)).pow(p);
                    (e, c.conj().scale(&f).neg())
                }),
            )?;
            Ok(XiCusp {
                cusp: d.cusp,
                series,
                constant: d.bzero.conj().scale(&Rational::from(p)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(XiImage {
        weight: 2 - k,
        pi_power: p,
        cusps,
    })
}

/// `m^(k-1) (xi_k h)|T_m` where `k = 2 - image.weight` is the weight of `h`.
pub fn scaled_hecke_on_xi<C: Coeff>(image: &XiImage<C>, m: u64, level: u64) -> Result<XiImage<C>> {
    let w = image.weight;
    let scale = Rational::from(m).pow(1 - w);
    let sigma = divisor_power_sum(m, w - 1);
    let op = |s: &QSeries<C>| hecke_t(s, m, w, level, HeckeConvention::Normalized);
    let cusps = image
        .cusps
        .iter()
        .map(|c| {
            Ok(XiCusp {
                cusp: c.cusp,
                series: on_numerators(&c.series, op)?.scale(&scale),
                constant: c.constant.scale(&Rational::from(&sigma * &scale)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(XiImage {
        weight: w,
        pi_power: image.pi_power,
        cusps,
    })
}

/// Evaluate an [`XiImage`] at a point of the given cusp.
pub fn eval_xi_image<C: Coeff>(image: &XiImage<C>, tau: &Complex, cusp: Cusp, prec: u32) -> Result<Complex> {
    let c = image
        .cusps
        .iter()
        .find(|c| c.cusp == cusp)
        .ok_or_else(|| Error::IncompleteData(format!("no data at cusp {}", cusp.name())))?;
    let (v, _) = crate::halfplane::eval_qseries(&c.series, tau, prec)?;
    let pp = Float::with_val(prec, pi(prec).pow(image.pi_power));
    let mut out = Complex::with_val(prec, v * pp);
    out += c.constant.to_complex(prec);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_forms::{eisenstein, jfunction};
    use crate::numeric::{bits, to_c64, C64};
    use crate::operators::xi_numeric;
    use crate::qseries::{ExactSeries, Prec};
    use proptest::prelude::*;

    const W: u32 = 60;

    fn fl(v: f64) -> Float {
        Float::with_val(bits(W), v)
    }

    fn rel(a: &Float, b: &Float) -> f64 {
        let d = Float::with_val(a.prec(), a - b).abs();
        (d / Float::with_val(a.prec(), b.abs_ref())).to_f64()
    }

    fn mpfr_oracle(s: &Float, x: &Float) -> Float {
        Float::with_val(bits(W + 20), s).gamma_inc(&Float::with_val(bits(W + 20), x))
    }

    #[test]
    fn closed_forms() {
        let p = bits(W);
        let v = incomplete_gamma(&fl(1.0), &fl(2.0), p).unwrap();
        assert!((v.to_f64() - 0.1353352832366127).abs() < 1e-15);
        let v = incomplete_gamma(&fl(2.0), &fl(1.0), p).unwrap();
        let two_over_e = Float::with_val(p, 2) / Float::with_val(p, 1).exp();
        assert!(rel(&v, &two_over_e) < 1e-55);
        assert!(incomplete_gamma(&fl(1.0), &fl(0.0), p).is_err());
    }

    #[test]
    fn series_and_fraction_agree() {
        let p = bits(W);
        let a = incomplete_gamma_series(&fl(0.5), &fl(0.5), p).unwrap();
        let b = incomplete_gamma_cf(&fl(0.5), &fl(0.5), p).unwrap();
        assert!(rel(&a, &b) < 1e-55);
        assert!(rel(&a, &mpfr_oracle(&fl(0.5), &fl(0.5))) < 1e-55);
    }

    #[test]
    fn matches_mpfr_on_grid() {
        let p = bits(W);
        for s in [-3.0, -2.5, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.5, 5.0] {
            for x in [1e-3, 0.1, 0.9, 3.0, 4.5, 20.0, 100.0] {
                let v = incomplete_gamma(&fl(s), &fl(x), p).unwrap();
                let o = mpfr_oracle(&fl(s), &fl(x));
                assert!(rel(&v, &o) < 1e-55, "s={s} x={x}: {} vs {}", v.to_f64(), o.to_f64());
            }
        }
    }

    #[test]
    fn weakly_holomorphic_matches_qseries() {
        let p = bits(W);
        let mut j = jfunction(80).unwrap();
        j = j.sub(&ExactSeries::monomial((), 1, 0, Rational::from(744), 80).unwrap()).unwrap();
        let f = FormExpansion::new(0, 1, vec![(Cusp::Infinity, j.clone())], "j").unwrap();
        let h = HarmonicData::from_form(&f).unwrap();
        let tau = Complex::with_val(p, (0.1, 1.2));
        let v = eval_harmonic(&h, &tau, Cusp::Infinity, p, None).unwrap();
        let (w, _) = crate::halfplane::eval_qseries(&j, &tau, p).unwrap();
        assert!(cabs_f64(&Complex::with_val(p, &v.value - &w)) < 1e-50);
    }

    fn e2_star(order: i64) -> HarmonicData<Complex> {
        let p = bits(W);
        let e2 = eisenstein(2, order).unwrap().to_float(W);
        let b0 = Complex::with_val(p, -Float::with_val(p, 3) / pi(p));
        let d = HarmonicCusp {
            cusp: Cusp::Infinity,
            width: 1,
            aplus: e2,
            bminus: QSeries::zero(Prec(p), 1, 1, order).unwrap(),
            bzero: b0,
        };
        HarmonicData::new(2, 1, vec![d], "E2*").unwrap()
    }

    #[test]
    fn e2_star_direct() {
        let p = bits(W);
        let h = e2_star(60);
        let tau = Complex::with_val(p, (0, 2));
        let v = eval_harmonic(&h, &tau, Cusp::Infinity, p, None).unwrap();
        let direct = crate::modval::e2(&tau, p).unwrap() - Complex::with_val(p, Float::with_val(p, 3) / (pi(p) * 2u32));
        assert!(cabs_f64(&Complex::with_val(p, &v.value - &direct)) < 1e-52);
    }

    fn toy_b(n: i64, weight: i32, order: i64) -> HarmonicData<Rational> {
        let d = HarmonicCusp {
            cusp: Cusp::Infinity,
            width: 1,
            aplus: ExactSeries::zero((), 1, 0, order).unwrap(),
            bminus: b_series((), 1, vec![(n, Rational::from(1))], -order, order).unwrap(),
            bzero: Rational::new(),
        };
        HarmonicData::new(weight, 1, vec![d], "toy").unwrap()
    }

    #[test]
    fn single_b_term_closed_form() {
        // b(-1) = 1, k = 0: G(4 pi y, 1) e(-z) = exp(-2 pi i conj(z))
        let p = bits(W);
        let h = toy_b(-1, 0, 10);
        let tau = Complex::with_val(p, (0.2, 0.7));
        let v = eval_harmonic(&h, &tau, Cusp::Infinity, p, None).unwrap();
        let zbar = Complex::with_val(p, tau.conj_ref());
        let expect = Complex::with_val(p, zbar * crate::numeric::two_pi_i(p)).neg().exp();
        assert!(cabs_f64(&Complex::with_val(p, &v.value - &expect)) < 1e-55);
    }

    #[test]
    fn xi_coefficients_match_numeric_xi() {
        let p = bits(W);
        for (n, k) in [(-1i64, 0i32), (-2, -2), (-1, 2)] {
            let h = toy_b(n, k, 10).clone();
            let f = |z: &Complex| eval_harmonic(&h, z, Cusp::Infinity, p, None).map(|v| v.value);
            let tau = Complex::with_val(p, (0.1, 0.9));
            let xn = xi_numeric(f, k, &tau, 1e-4, p).unwrap();
            let img = xi_coefficients(&h).unwrap();
            let xe = eval_xi_image(&img, &tau, Cusp::Infinity, p).unwrap();
            let d = to_c64(&xn.value) - to_c64(&xe);
            assert!(d.norm() < 1e-12 * to_c64(&xe).norm().max(1.0), "n={n} k={k}: {d}");
        }
        let h = e2_star(40);
        let img = xi_coefficients(&h).unwrap();
        let v = to_c64(&eval_xi_image(&img, &Complex::with_val(p, (0, 1)), Cusp::Infinity, p).unwrap());
        assert!((v - C64::new(3.0 / std::f64::consts::PI, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hecke_commutes_with_xi_exactly() {
        for k in [0, -2, -4] {
            let d = HarmonicCusp {
                cusp: Cusp::Infinity,
                width: 1,
                aplus: ExactSeries::from_terms((), 1, -3, 60, [(-3, Rational::from(2)), (-1, Rational::from(1)), (4, Rational::from((1, 3)))]).unwrap(),
                bminus: b_series((), 1, (1..=60).map(|n| (-n, Rational::from((n * n % 7 + 1, n)))).chain([(2, Rational::from(5))]).collect(), -2, 60).unwrap(),
                bzero: Rational::from((7, 5)),
            };
            let h = HarmonicData::new(k, 1, vec![d], "toy").unwrap();
            for m in [1u64, 2, 3, 4, 6] {
                let lhs = xi_coefficients(&hecke_on_harmonic(&h, m).unwrap()).unwrap();
                let rhs = scaled_hecke_on_xi(&xi_coefficients(&h).unwrap(), m, 1).unwrap();
                assert_eq!(lhs, rhs, "k={k} m={m}");
            }
        }
        let id = toy_b(-1, 0, 10);
        assert_eq!(hecke_on_harmonic(&id, 1).unwrap().cusps, id.cusps);
    }

    #[test]
    fn hecke_on_weakly_holomorphic() {
        let j = jfunction(60).unwrap();
        let f = FormExpansion::new(0, 1, vec![(Cusp::Infinity, j.clone())], "j").unwrap();
        let h = HarmonicData::from_form(&f).unwrap();
        let t = hecke_on_harmonic(&h, 3).unwrap();
        assert_eq!(t.cusps[0].aplus, hecke_t(&j, 3, 0, 1, HeckeConvention::Normalized).unwrap());
        let h11 = HarmonicData::from_form(&crate::classical_forms::eisenstein_en(11, 20).unwrap()).unwrap();
        assert!(matches!(hecke_on_harmonic(&h11, 11), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn harmonicity() {
        let p = bits(W);
        let grid: Vec<Complex> = (0..4).map(|i| Complex::with_val(p, (0.1 * i as f64 - 0.2, 1.1 + 0.2 * i as f64))).collect();
        let j = jfunction(60).unwrap();
        let f = FormExpansion::new(0, 1, vec![(Cusp::Infinity, j)], "j").unwrap();
        let r = harmonicity_check(&HarmonicData::from_form(&f).unwrap(), Cusp::Infinity, &grid, 1e-3, p).unwrap();
        assert!(r.is_harmonic(), "{r:?}");
        let d = HarmonicCusp {
            cusp: Cusp::Infinity,
            width: 1,
            aplus: ExactSeries::zero((), 1, 0, 5).unwrap(),
            bminus: ExactSeries::zero((), 1, 1, 5).unwrap(),
            bzero: Rational::from(1),
        };
        let y = HarmonicData::new(0, 1, vec![d], "y").unwrap();
        let r = harmonicity_check(&y, Cusp::Infinity, &grid, 1e-3, p).unwrap();
        assert!(r.max_residual < 1e-30);
        let r = harmonicity_check(&e2_star(60), Cusp::Infinity, &grid, 1e-3, p).unwrap();
        assert!(r.is_harmonic(), "{r:?}");
        let r = harmonicity_check(&toy_b(-1, -2, 10), Cusp::Infinity, &grid, 1e-3, p).unwrap();
        assert!(r.is_harmonic(), "{r:?}");
        // E2 alone is not harmonic in weight 2
        let f = |z: &Complex| crate::modval::e2(z, p).map(|v| Complex::with_val(p, v * Complex::with_val(p, z.imag().clone())));
        let r = laplacian_check(&f, 0, &grid, 1e-3, p).unwrap();
        assert!(!r.is_harmonic());
    }

    #[test]
    fn harmonicity_residual_is_second_order() {
        let p = bits(W);
        let z = Complex::with_val(p, (0.05, 1.3));
        let f = |w: &Complex| crate::modval::j(w, p);
        let hs: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let pts: Vec<(f64, f64)> = hs
            .iter()
            .map(|&h| {
                let r = laplacian(&f, 0, &z, &Float::with_val(p, h), p).unwrap();
                (h.ln(), cabs_f64(&r).ln())
            })
            .collect();
        let slope = crate::numeric::fit_slope(&pts);
        assert!(slope >= 1.8, "slope {slope}");
    }

    #[test]
    fn insufficient_coefficients_reported() {
        let p = bits(W);
        let j = jfunction(5).unwrap();
        let f = FormExpansion::new(0, 1, vec![(Cusp::Infinity, j)], "j").unwrap();
        let h = HarmonicData::from_form(&f).unwrap();
        let tau = Complex::with_val(p, (0, 1));
        match eval_harmonic(&h, &tau, Cusp::Infinity, p, Some(1e-40)) {
            Err(Error::InsufficientCoefficients { needed, have }) => assert!(needed > have),
            other => panic!("{other:?}"),
        }
    }

    fn random_fixture(seed: &[i64], order: i64, k: i32) -> HarmonicData<Rational> {
        let coeff = |n: i64| {
            let s = seed[(n.unsigned_abs() as usize) % seed.len()];
            Rational::from((s * (n.abs() + 1).pow(2), 17))
        };
        let d = HarmonicCusp {
            cusp: Cusp::Infinity,
            width: 1,
            aplus: ExactSeries::from_terms((), 1, -1, order, (-1..=order).map(|n| (n, coeff(n)))).unwrap(),
            bminus: b_series((), 1, (1..=order).map(|e| (-e, coeff(e + 3))).collect(), 1, order).unwrap(),
            bzero: Rational::from(1),
        };
        HarmonicData::new(k, 1, vec![d], "random").unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn tail_bound_is_honest(seed in prop::collection::vec(-20i64..20, 7), y in 0.6f64..2.0, x in -0.5f64..0.5, k in prop::sample::select(vec![0, -2])) {
            prop_assume!(seed.iter().any(|s| *s != 0));
            let p = bits(40);
            let tau = Complex::with_val(p, (x, y));
            let short = eval_harmonic(&random_fixture(&seed, 12, k), &tau, Cusp::Infinity, p, None).unwrap();
            let long = eval_harmonic(&random_fixture(&seed, 24, k), &tau, Cusp::Infinity, p, None).unwrap();
            let d = cabs_f64(&Complex::with_val(p, &short.value - &long.value));
            prop_assert!(d <= short.tail, "diff {} tail {}", d, short.tail);
        }

        #[test]
        fn recurrence_residual(xe in -3.0f64..2.0, s2 in -6i32..10) {
            let p = bits(W);
            let x = fl(10f64.powf(xe));
            let s = Float::with_val(p, s2) / 2u32;
            let g0 = incomplete_gamma(&s, &x, p).unwrap();
            let s1 = Float::with_val(p, &s + 1u32);
            let g1 = incomplete_gamma(&s1, &x, p).unwrap();
            let xs = Float::with_val(p, (&x).pow(&s)) * Float::with_val(p, (-x.clone()).exp_ref());
            let res = Float::with_val(p, &g1 - Float::with_val(p, &s * &g0)) - xs;
            let bound = Float::with_val(p, 10).pow(3 - W as i32) * Float::with_val(p, g1.abs_ref());
            prop_assert!(res.abs() < bound);
        }
    }
}
