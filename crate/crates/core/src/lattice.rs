//! Exact integral LLL, integer relations, and algebraicity experiments.
//!
//! Every report here is numerical evidence at a stated precision, never a proof.

use std::fmt;

use rug::{Complex, Float, Integer};

use crate::error::{Error, Result};
use crate::halfplane::{hecke_orbit, reduced_forms, HPoint, QuadForm};
use crate::numeric::{bits, cabs, log10_abs, ten_pow};

/// An LLL-reduced basis with the unimodular transform that produced it.
#[derive(Clone, Debug)]
pub struct LllResult {
    /// Reduced basis rows.
    pub basis: Vec<Vec<Integer>>,
    /// `basis = transform * input`.
    pub transform: Vec<Vec<Integer>>,
}

/// Lovász parameter as a fraction `num/den`.
pub const DELTA: (u32, u32) = (99, 100);

/// LLL reduction with exact integer arithmetic (the integral variant with
/// sub-determinants `d_i` and scaled Gram-Schmidt coefficients `lambda_ij`).
pub fn lll_reduce(rows: &[Vec<Integer>]) -> Result<LllResult> {
    let n = rows.len();
    if n == 0 {
        return Ok(LllResult {
            basis: Vec::new(),
            transform: Vec::new(),
        });
    }
    let dot = |a: &[Integer], b: &[Integer]| -> Integer {
        a.iter().zip(b).fold(Integer::new(), |acc, (x, y)| acc + Integer::from(x * y))
    };
    let mut b: Vec<Vec<Integer>> = rows.to_vec();
    let mut h: Vec<Vec<Integer>> = (0..n)
        .map(|i| (0..n).map(|j| Integer::from((i == j) as u32)).collect())
        .collect();
    // d[0] = 1, d[i + 1] belongs to vector i
    let mut d: Vec<Integer> = vec![Integer::from(1); n + 1];
    let mut lam: Vec<Vec<Integer>> = vec![vec![Integer::new(); n]; n];
    let (dn, dd) = (Integer::from(DELTA.0), Integer::from(DELTA.1));

    d[1] = dot(&b[0], &b[0]);
    if d[1] == 0 {
        return Err(Error::RankDeficient);
    }
    let mut k = 1usize;
    let mut kmax = 0usize;

    let red = |k: usize, l: usize, b: &mut Vec<Vec<Integer>>, h: &mut Vec<Vec<Integer>>, lam: &mut Vec<Vec<Integer>>, d: &Vec<Integer>| {
        let two_l = Integer::from(&lam[k][l] * 2u32).abs();
        if two_l > d[l + 1] {
            // q = round(lam / d)
            let num = Integer::from(&lam[k][l] * 2u32) + &d[l + 1];
            let q = num.div_rem_floor(Integer::from(&d[l + 1] * 2u32)).0;
            for t in 0..b[k].len() {
                let v = Integer::from(&q * &b[l][t]);
                b[k][t] -= v;
            }
            for t in 0..h[k].len() {
                let v = Integer::from(&q * &h[l][t]);
                h[k][t] -= v;
            }
            let v = Integer::from(&q * &d[l + 1]);
            lam[k][l] -= v;
            for i in 0..l {
                let v = Integer::from(&q * &lam[l][i]);
                lam[k][i] -= v;
            }
        }
    };

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 0..j {
                    u = (Integer::from(&d[i + 1] * &u) - Integer::from(&lam[k][i] * &lam[j][i])) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u == 0 {
                        return Err(Error::RankDeficient);
                    }
                    d[k + 1] = u;
                }
            }
        }
        red(k, k - 1, &mut b, &mut h, &mut lam, &d);
        let lhs = Integer::from(&d[k + 1] * &d[k - 1]) * &dd;
        let rhs = Integer::from(&d[k] * &d[k]) * &dn - Integer::from(lam[k][k - 1].square_ref()) * &dd;
        if lhs < rhs {
            // swap k and k-1
            b.swap(k, k - 1);
            h.swap(k, k - 1);
            for j in 0..k - 1 {
                let t = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = t;
            }
            let l = lam[k][k - 1].clone();
            let bb = (Integer::from(&d[k - 1] * &d[k + 1]) + Integer::from(l.square_ref())) / &d[k];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (Integer::from(&d[k + 1] * &lam[i][k - 1]) - Integer::from(&l * &t)) / &d[k];
                lam[i][k - 1] = (Integer::from(&bb * &t) + Integer::from(&l * &lam[i][k])) / &d[k + 1];
            }
            d[k] = bb;
            if k > 1 {
                k -= 1;
            }
        } else {
            for l in (0..k - 1).rev() {
                red(k, l, &mut b, &mut h, &mut lam, &d);
            }
            k += 1;
        }
    }
    Ok(LllResult { basis: b, transform: h })
}

/// Exact rational Gram-Schmidt data `(mu, |b*_i|^2)` used for checking reduction.
pub fn gram_schmidt(rows: &[Vec<Integer>]) -> (Vec<Vec<rug::Rational>>, Vec<rug::Rational>) {
    use rug::Rational;
    let n = rows.len();
    let mut bstar: Vec<Vec<Rational>> = Vec::new();
    let mut mu = vec![vec![Rational::new(); n]; n];
    let mut norms = Vec::new();
    for i in 0..n {
        let mut v: Vec<Rational> = rows[i].iter().map(Rational::from).collect();
        for j in 0..i {
            let num = rows[i].iter().zip(&bstar[j]).fold(Rational::new(), |a, (x, y)| a + Rational::from(x * y));
            let m = if norms[j] == Rational::new() { Rational::new() } else { num / &norms[j] };
            for (vt, bt) in v.iter_mut().zip(&bstar[j]) {
                *vt -= Rational::from(&m * bt);
            }
            mu[i][j] = m;
        }
        let nv = v.iter().fold(Rational::new(), |a, x| a + Rational::from(x * x));
        norms.push(nv);
        bstar.push(v);
    }
    (mu, norms)
}

/// Evidence category of an algebraicity experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    AlgebraicEvidence,
    TranscendentalEvidence,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::AlgebraicEvidence => "ALGEBRAIC-EVIDENCE",
            Verdict::TranscendentalEvidence => "TRANSCENDENTAL-EVIDENCE",
        })
    }
}

/// Settings for [`algdep`].
#[derive(Clone, Copy, Debug)]
pub struct AlgdepSettings {
    pub max_degree: usize,
    /// Height bound `H` on the coefficients.
    pub max_height: f64,
    /// Working precision `W` in decimal digits.
    pub digits: u32,
    /// Extra digits for the confirmation run.
    pub confirm_extra: u32,
}

impl Default for AlgdepSettings {
    fn default() -> Self {
        AlgdepSettings {
            max_degree: 8,
            max_height: 1e20,
            digits: 60,
            confirm_extra: 20,
        }
    }
}

/// Outcome of [`algdep`].
#[derive(Clone, Debug)]
pub struct AlgdepOutcome {
    /// Primitive integer polynomial, coefficients from degree 0 upward, positive leading coefficient.
    pub poly: Option<Vec<Integer>>,
    /// `|p(x)|` at the confirmation precision.
    pub residual: f64,
    pub digits: u32,
    pub verdict: Verdict,
}

fn normalize(mut p: Vec<Integer>) -> Option<Vec<Integer>> {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    if p.len() < 2 {
        return None;
    }
    let g = p.iter().fold(Integer::new(), |g, c| g.gcd(c));
    for c in p.iter_mut() {
        *c /= &g;
    }
    if p.last().expect("nonempty") < &0 {
        for c in p.iter_mut() {
            *c = Integer::from(-&*c);
        }
    }
    Some(p)
}

/// Evaluate an integer polynomial at `x`; returns `(|p(x)|, max_i |c_i x^i|)`.
pub fn poly_residual(p: &[Integer], x: &Complex) -> (Float, Float) {
    let prec = x.prec().0;
    let mut acc = Complex::new(prec);
    let mut pw = Complex::with_val(prec, 1);
    let mut scale = Float::new(prec);
    for c in p {
        let t = Complex::with_val(prec, &pw * c);
        let a = cabs(&t);
        if a > scale {
            scale = a;
        }
        acc += t;
        pw *= x;
    }
    (cabs(&acc), scale)
}

/// Search for a relation of degree exactly `k` at the precision of `x`.
fn relation_of_degree(x: &Complex, k: usize, max_height: f64, digits: u32) -> Option<Vec<Integer>> {
    let prec = x.prec().0;
    let p = digits.saturating_sub(10).max(5);
    let mut powers = vec![Complex::with_val(prec, 1)];
    for i in 1..=k {
        let v = Complex::with_val(prec, &powers[i - 1] * x);
        powers.push(v);
    }
    let top = powers.iter().map(log10_abs).fold(0.0f64, f64::max);
    // S = 10^(P - log10 max |x^i|)
    let shift = i32::try_from(p as i64 - top.ceil() as i64).ok()?;
    let s = ten_pow(prec, shift);
    let mut rows = Vec::new();
    for (i, pw) in powers.iter().enumerate() {
        let mut r: Vec<Integer> = (0..=k).map(|j| Integer::from((i == j) as u32)).collect();
        let re = Float::with_val(prec, pw.real() * &s).round();
        let im = Float::with_val(prec, pw.imag() * &s).round();
        r.push(re.to_integer()?);
        r.push(im.to_integer()?);
        rows.push(r);
    }
    let red = lll_reduce(&rows).ok()?;
    let hb = Float::with_val(prec, max_height);
    let tol = ten_pow(prec, -(p as i32) / 2);
    let mut best: Option<Vec<Integer>> = None;
    for row in &red.basis {
        let cand: Vec<Integer> = row[..=k].to_vec();
        let Some(cand) = normalize(cand) else { continue };
        if cand.iter().any(|c| Float::with_val(prec, c).abs() > hb) {
            continue;
        }
        let (res, scale) = poly_residual(&cand, x);
        let bound = Float::with_val(prec, &tol * Float::with_val(prec, scale.max(&Float::with_val(prec, 1))));
        if res < bound {
            let better = match &best {
                None => true,
                Some(b) => cand.len() < b.len(),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best
}

/// Integer relation search for `x` with a stability check.
///
/// `source(digits)` must return `x` correct to `digits` significant digits. For each
/// degree `k = 1..=max_degree` a candidate found at `W` digits is accepted only if the
/// identical polynomial is found again at `W + confirm_extra` digits.
pub fn algdep(source: &dyn Fn(u32) -> Result<Complex>, settings: &AlgdepSettings) -> Result<AlgdepOutcome> {
    let w = settings.digits;
    let w2 = w + settings.confirm_extra;
    let x1 = source(w)?;
    let mut x2: Option<Complex> = None;
    for k in 1..=settings.max_degree {
        let Some(p1) = relation_of_degree(&x1, k, settings.max_height, w) else { continue };
        if x2.is_none() {
            x2 = Some(source(w2)?);
        }
        let xx = x2.as_ref().expect("computed");
        let p2 = relation_of_degree(xx, k, settings.max_height, w2);
        if p2.as_ref() == Some(&p1) {
            let (res, _) = poly_residual(&p1, xx);
            return Ok(AlgdepOutcome {
                poly: Some(p1),
                residual: res.to_f64(),
                digits: w,
                verdict: Verdict::AlgebraicEvidence,
            });
        }
    }
    Ok(AlgdepOutcome {
        poly: None,
        residual: f64::NAN,
        digits: w,
        verdict: Verdict::TranscendentalEvidence,
    })
}

/// Result of [`hilbert_class_experiment`].
#[derive(Clone, Debug)]
pub struct HilbertReport {
    pub disc: i64,
    pub forms: Vec<QuadForm>,
    /// Monic integer polynomial, coefficients from degree 0 upward.
    pub poly: Vec<Integer>,
    /// `|H(j(tau_Q))|` for each reduced form.
    pub root_residuals: Vec<f64>,
    /// Largest distance of a product coefficient from its rounded integer.
    pub rounding_residual: f64,
    pub digits: u32,
}

/// Decimal digits needed to represent the class polynomial coefficients.
fn class_poly_magnitude(forms: &[QuadForm], disc: i64) -> f64 {
    let s = ((-disc) as f64).sqrt() * std::f64::consts::PI / std::f64::consts::LN_10;
    forms.iter().map(|f| s / f.a as f64 + 1.0).sum()
}

/// Build `prod (x - j(tau_Q))` over reduced forms and round it to integers.
pub fn hilbert_class_experiment(disc: i64, digits: u32) -> Result<HilbertReport> {
    let forms = reduced_forms(disc)?;
    let mag = class_poly_magnitude(&forms, disc).ceil() as u32;
    let work = digits + mag + 10;
    let prec = bits(work);
    let roots: Vec<Complex> = forms
        .iter()
        .map(|f| crate::modval::j_unreduced(&f.root(prec), prec))
        .collect::<Result<_>>()?;
    let mut coeffs = vec![Complex::with_val(prec, 1)];
    for r in &roots {
        let mut next = vec![Complex::new(prec); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= Complex::with_val(prec, c * r);
        }
        coeffs = next;
    }
    let mut poly = Vec::new();
    let mut worst = 0.0f64;
    for c in &coeffs {
        let r = Float::with_val(prec, c.real().round_ref());
        let dr = Float::with_val(prec, c.real() - &r).abs().to_f64();
        let di = Float::with_val(prec, c.imag().abs_ref()).to_f64();
        worst = worst.max(dr).max(di);
        poly.push(r.to_integer().ok_or(Error::PrecisionInsufficient { recommended: 2 * work })?);
    }
    if worst > 1e-5 {
        return Err(Error::PrecisionInsufficient { recommended: 2 * work });
    }
    let root_residuals = roots.iter().map(|r| poly_residual(&poly, r).0.to_f64()).collect();
    Ok(HilbertReport {
        disc,
        forms,
        poly,
        root_residuals,
        rounding_residual: worst,
        digits: work,
    })
}

/// One row of [`orbit_transcendence_report`].
#[derive(Clone, Debug)]
pub struct OrbitRow {
    pub m: u64,
    pub value: Complex,
    pub outcome: AlgdepOutcome,
}

/// `f(T_m . Q_tau) = sum over the Hecke orbit of f`, fed to [`algdep`] for each `m`.
///
/// `f(z, prec)` must be invariant under `Gamma_0(level)`.
pub fn orbit_transcendence_report(
    f: &(dyn Fn(&Complex, u32) -> Result<Complex> + Sync),
    tau: &HPoint,
    ms: &[u64],
    level: u64,
    settings: &AlgdepSettings,
) -> Result<Vec<OrbitRow>> {
    let value_at = |m: u64, digits: u32| -> Result<Complex> {
        // orbit values grow like exp(2 pi m Im tau); keep `digits` significant digits
        let y = crate::numeric::to_c64(&tau.z).im;
        let guard = (2.0 * std::f64::consts::PI * m as f64 * y.max(1.0 / y) / std::f64::consts::LN_10).ceil() as u32;
        let prec = bits(digits + guard + 10);
        let t = HPoint {
            z: retarget(tau, prec)?,
            ..tau.clone()
        };
        let mut s = Complex::new(prec);
        for p in hecke_orbit(m, &t, level)? {
            s += f(&p.z, prec)?;
        }
        Ok(s)
    };
    let mut rows = Vec::new();
    for &m in ms {
        let v = value_at(m, settings.digits)?;
        let outcome = algdep(&|d| value_at(m, d), settings)?;
        rows.push(OrbitRow { m, value: v, outcome });
    }
    Ok(rows)
}

/// Recompute the point at a new precision (exactly for CM points).
fn retarget(t: &HPoint, prec: u32) -> Result<Complex> {
    if let Some(f) = t.cm {
        return Ok(f.root(prec));
    }
    if t.z.prec().0 < prec {
        return Err(Error::PrecisionInsufficient {
            recommended: crate::numeric::digits_of(prec),
        });
    }
    Ok(Complex::with_val(prec, &t.z))
}
