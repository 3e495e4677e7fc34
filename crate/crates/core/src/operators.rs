//! Hecke operators on q-expansions, the `U`/`V` sieve, and a numerical `xi` operator.

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::qseries::{gcd, Coeff, QSeries};

/// Coefficient formula used by [`hecke_t`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeckeConvention {
    /// `b(n) = sum_{d | (m,n)} d^{k-1} a(mn/d^2)`.
    Normalized,
    /// Weight 0 only: `f|T_m = sum_{ad=m, b mod d} f((az+b)/d)`,
    /// i.e. `b(n) = sum_{e | (m,n)} (m/e) a(mn/e^2)`.
    DivisorSum,
}

fn divisors(n: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..=n).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).collect();
    let big: Vec<u64> = v.iter().rev().map(|d| n / d).filter(|e| e * e != n).collect();
    v.extend(big);
    v
}

fn rat_pow(base: u64, e: i32) -> Rational {
    let p = Integer::from(base).pow(e.unsigned_abs());
    if e >= 0 {
        Rational::from(p)
    } else {
        Rational::from((Integer::from(1), p))
    }
}

/// `F | T_m` in weight `k` on `Gamma_0(level)`; needs `gcd(m, level) = 1`.
///
/// The result is known to `floor(order / m)`.
pub fn hecke_t<C: Coeff>(f: &QSeries<C>, m: u64, weight: i32, level: u64, conv: HeckeConvention) -> Result<QSeries<C>> {
    if m == 0 {
        return Err(Error::DomainError("T_0 is undefined".into()));
    }
    if gcd(m, level) != 1 {
        return Err(Error::NotCoprime { m: m as i64, level });
    }
    if f.denom() != 1 {
        return Err(Error::DenomMismatch(f.denom(), 1));
    }
    if conv == HeckeConvention::DivisorSum && weight != 0 {
        return Err(Error::Unsupported("divisor-sum convention is defined in weight 0".into()));
    }
    let mi = m as i64;
    let v = f.valuation();
    let vo = if v < 0 { mi * v } else { (v + mi - 1) / mi };
    let order = f.order().div_euclid(mi);
    if order < vo {
        return Err(Error::EmptyWindow { valuation: vo, order });
    }
    let mut out = Vec::with_capacity((order - vo + 1) as usize);
    for n in vo..=order {
        let g = if n == 0 { m } else { gcd(m, n.unsigned_abs()) };
        let mut s = C::zero(f.ctx());
        for d in divisors(g) {
            let di = d as i64;
            let idx = mi * n / (di * di);
            let a = f.coeff_known(idx)?;
            if a.is_zero() {
                continue;
            }
            let w = match conv {
                HeckeConvention::Normalized => rat_pow(d, weight - 1),
                HeckeConvention::DivisorSum => Rational::from(m / d),
            };
            s.add_assign(&a.scale(&w));
        }
        out.push(s);
    }
    QSeries::from_dense(f.ctx(), 1, vo, out, order)
}

/// `F | U_m`: `b(n) = a(mn)`, known to `floor(order / m)`.
pub fn hecke_u<C: Coeff>(f: &QSeries<C>, m: u64) -> Result<QSeries<C>> {
    if m == 0 {
        return Err(Error::DomainError("U_0 is undefined".into()));
    }
    if f.denom() != 1 {
        return Err(Error::DenomMismatch(f.denom(), 1));
    }
    let mi = m as i64;
    let vo = -((-f.valuation()).div_euclid(mi));
    let order = f.order().div_euclid(mi);
    let out = (vo..=order).map(|n| f.coeff_known(mi * n)).collect::<Result<Vec<_>>>()?;
    QSeries::from_dense(f.ctx(), 1, vo, out, order)
}

/// `F | V_m`: `q -> q^m`.
pub fn hecke_v<C: Coeff>(f: &QSeries<C>, m: u64) -> Result<QSeries<C>> {
    f.substitute_power(m as u32)
}

/// `F - F|U_p|V_p`: removes every exponent divisible by `p`.
pub fn sieve_prime<C: Coeff>(f: &QSeries<C>, p: u64) -> Result<QSeries<C>> {
    let uv = hecke_v(&hecke_u(f, p)?, p)?;
    f.sub(&uv)
}

/// `prod n` over `n > 1` with a nonzero principal-part coefficient `a(-n)`.
pub fn prin<C: Coeff>(f: &QSeries<C>) -> Integer {
    let mut p = Integer::from(1);
    for (n, c) in f.terms() {
        if n < -1 && !c.is_zero() {
            p *= -n;
        }
    }
    p
}

/// Result of a numerical `xi` evaluation.
#[derive(Clone, Debug)]
pub struct XiValue {
    pub value: Complex,
    /// Richardson error estimate.
    pub error: f64,
}

/// `xi_kappa f (z) = 2 i y^kappa conj(df/dzbar)` for `f` of weight `kappa`.
///
/// Central differences in `x` and `y` with step `h`, `h/2`, `h/4` and two rounds of
/// Richardson extrapolation. `h` must lie in `[1e-8 y, 1e-2 y]`.
pub fn xi_numeric<F>(f: F, input_weight: i32, z: &Complex, h: f64, prec: u32) -> Result<XiValue>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    let y = z.imag().to_f64();
    if !(h >= 1e-8 * y && h <= 1e-2 * y) {
        return Err(Error::StepTooSmall { h });
    }
    let dzbar = |h: &Float| -> Result<Complex> {
        let hx = Complex::with_val(prec, (h, 0));
        let hy = Complex::with_val(prec, (0, h));
        let fx = Complex::with_val(prec, f(&Complex::with_val(prec, z + &hx))? - f(&Complex::with_val(prec, z - &hx))?);
        let fy = Complex::with_val(prec, f(&Complex::with_val(prec, z + &hy))? - f(&Complex::with_val(prec, z - &hy))?);
        // (f_x + i f_y) / 2 with central differences
        let mut d = Complex::with_val(prec, fy * Complex::with_val(prec, (0, 1)));
        d += fx;
        d /= Float::with_val(prec, h * 4u32);
        Ok(d)
    };
    let h0 = Float::with_val(prec, h);
    let d1 = dzbar(&h0)?;
    let d2 = dzbar(&Float::with_val(prec, &h0 / 2u32))?;
    let d4 = dzbar(&Float::with_val(prec, &h0 / 4u32))?;
    let r1 = Complex::with_val(prec, (Complex::with_val(prec, &d2 * 4u32) - &d1) / 3u32);
    let r2 = Complex::with_val(prec, (Complex::with_val(prec, &d4 * 4u32) - &d2) / 3u32);
    let best = Complex::with_val(prec, (Complex::with_val(prec, &r2 * 16u32) - &r1) / 15u32);
    let yk = Float::with_val(prec, z.imag()).pow(input_weight);
    let mut v = Complex::with_val(prec, best.conj_ref());
    v *= Complex::with_val(prec, (0, 2));
    v *= &yk;
    let diff = Complex::with_val(prec, &r2 - &r1);
    let err = 2.0 * crate::numeric::cabs_f64(&diff) / 15.0 * yk.to_f64();
    Ok(XiValue { value: v, error: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_forms::{delta, eisenstein, faber, jfunction};
    use crate::numeric::{bits, pi, to_c64};
    use crate::qseries::ExactSeries;
    use proptest::prelude::*;

    #[test]
    fn j1_t2_is_j2() {
        let j1 = jfunction(24).unwrap().sub(&ExactSeries::monomial((), 1, 0, Rational::from(744), 24).unwrap()).unwrap();
        let t = hecke_t(&j1, 2, 0, 1, HeckeConvention::DivisorSum).unwrap();
        assert_eq!(t.order(), 12);
        assert_eq!(t, faber(2, 12).unwrap());
        let tn = hecke_t(&j1, 2, 0, 1, HeckeConvention::Normalized).unwrap();
        assert_eq!(t, tn.scale(&Rational::from(2)));
    }

    #[test]
    fn delta_eigenvalues() {
        let d = delta(60).unwrap();
        for (p, tau) in [(2u64, -24i64), (3, 252), (5, 4830), (7, -16744)] {
            let t = hecke_t(&d, p, 12, 1, HeckeConvention::Normalized).unwrap();
            assert_eq!(t, d.truncate(60 / p as i64).unwrap().scale(&Rational::from(tau)));
        }
    }

    #[test]
    fn e4_is_eigenform() {
        let e = eisenstein(4, 40).unwrap();
        for m in [2u64, 3, 4, 6] {
            let t = hecke_t(&e, m, 4, 1, HeckeConvention::Normalized).unwrap();
            let s = crate::classical_forms::sigma(3, m);
            assert_eq!(t, e.truncate(40 / m as i64).unwrap().scale(&Rational::from(s)));
        }
    }

    #[test]
    fn uv_identity_and_sieve() {
        let j = jfunction(60).unwrap();
        for p in [2u64, 3, 5] {
            let back = hecke_u(&hecke_v(&j, p).unwrap(), p).unwrap();
            assert_eq!(back, j);
            let s = sieve_prime(&j, p).unwrap();
            assert_eq!(s.order(), 60);
            for (n, c) in s.terms() {
                if n % p as i64 == 0 {
                    assert!(c.is_zero());
                } else {
                    assert_eq!(Some(c.clone()), j.coeff(n));
                }
            }
        }
    }

    #[test]
    fn prin_of_faber() {
        let f = faber(6, 2).unwrap().add(&faber(2, 2).unwrap()).unwrap().add(&faber(1, 2).unwrap()).unwrap();
        assert_eq!(prin(&f), 12);
    }

    #[test]
    fn xi_of_e2_star() {
        let p = bits(60);
        let z = Complex::with_val(p, (0.1, 1.2));
        let f = |w: &Complex| -> Result<Complex> {
            let mut v = crate::modval::e2(w, p)?;
            let y = Float::with_val(p, w.imag());
            v -= Float::with_val(p, 3u32 / (pi(p) * y));
            Ok(v)
        };
        let r = xi_numeric(f, 2, &z, 1e-3, p).unwrap();
        let want = 3.0 / std::f64::consts::PI;
        assert!((to_c64(&r.value) - crate::numeric::C64::new(want, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn xi_of_j_vanishes() {
        let p = bits(60);
        let z = Complex::with_val(p, (-0.2, 1.05));
        let r = xi_numeric(|w: &Complex| crate::modval::j_unreduced(w, p), 0, &z, 1e-4, p).unwrap();
        assert!(crate::numeric::cabs_f64(&r.value) < 10.0 * 1e-8);
    }

    #[test]
    fn step_out_of_range() {
        let p = bits(30);
        let z = Complex::with_val(p, (0.0, 1.0));
        let e = xi_numeric(|w: &Complex| Ok(w.clone()), 0, &z, 1e-12, p).unwrap_err();
        assert!(matches!(e, Error::StepTooSmall { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hecke_multiplicative_on_delta(m in 1u64..8, n in 1u64..8) {
            prop_assume!(gcd(m, n) == 1);
            let d = delta(200).unwrap();
            let tm = hecke_t(&d, m, 12, 1, HeckeConvention::Normalized).unwrap();
            let tmn = hecke_t(&tm, n, 12, 1, HeckeConvention::Normalized).unwrap();
            let direct = hecke_t(&d, m * n, 12, 1, HeckeConvention::Normalized).unwrap();
            let o = tmn.order().min(direct.order());
            prop_assert!(tmn.truncate(o).unwrap().same_as(&direct.truncate(o).unwrap()));
        }

        #[test]
        fn hecke_p_squared_on_j(p in prop::sample::select(vec![2u64, 3, 5])) {
            let j = jfunction(150).unwrap();
            let tp = hecke_t(&j, p, 0, 1, HeckeConvention::Normalized).unwrap();
            let tpp = hecke_t(&tp, p, 0, 1, HeckeConvention::Normalized).unwrap();
            let tp2 = hecke_t(&j, p * p, 0, 1, HeckeConvention::Normalized).unwrap();
            let rhs = tpp.sub(&j.truncate(tpp.order()).unwrap().scale(&Rational::from((1, p as i64)))).unwrap();
            let o = rhs.order().min(tp2.order());
            prop_assert!(tp2.truncate(o).unwrap().same_as(&rhs.truncate(o).unwrap()));
        }
    }
}
