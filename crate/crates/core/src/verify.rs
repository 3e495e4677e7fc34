//! Named check suites shared by the acceptance tests and `hol verify`.

use std::fmt;

use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use crate::classical_forms::{delta, eisenstein, eta_quotient, jfunction, Cusp, EtaQuotient, FormExpansion};
use crate::eigen::{decompose, eigensystem, float_coeffs, hecke_matrix, ingest_basis, lemma43_expansion, mat_mul, Quad, Scalar};
use crate::fixtures::{S2_GAMMA0_11, S2_GAMMA0_23};
use crate::halfplane::{hecke_orbit, HPoint, Place};
use crate::harmonic::{b_series, hecke_on_harmonic, incomplete_gamma, scaled_hecke_on_xi, xi_coefficients, HarmonicCusp, HarmonicData};
use crate::lattice::{hilbert_class_experiment, orbit_transcendence_report, AlgdepSettings, Verdict};
use crate::numeric::{bits, cabs_f64, fit_slope, from_c64, pi, to_c64, C64};
use crate::operators::{hecke_t, hecke_u, hecke_v, sieve_prime, xi_numeric, HeckeConvention};
use crate::pairing::{
    integrate, period_combination, Combination, reg_pairing_numeric, third_kind_domain, third_kind_tiles, NumericGram, PuncturedDomainSpec, SeriesTiles, DEFAULT_SCHEDULE,
};
use crate::qseries::ExactSeries;
use crate::thirdkind::{canonical_project, eta_dlog, level1_third_kind, level1_working_digits, residue_divisor_numeric};
use crate::{Error, Result};

/// One named assertion.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, e: &Error) -> Self {
        Check::new(name, false, format!("error: {e}"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// The checks of one suite.
#[derive(Clone, Debug)]
pub struct Suite {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl Suite {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.pass).count();
        format!("{} {} ({ok}/{} checks)", if self.pass() { "PASS" } else { "FAIL" }, self.name, self.checks.len())
    }

    fn push(&mut self, name: impl Into<String>, r: Result<(bool, String)>) {
        let name = name.into();
        self.checks.push(match r {
            Ok((pass, detail)) => Check::new(name, pass, detail),
            Err(e) => Check::failed(name, &e),
        });
    }
}

/// Suite names accepted by [`run`], in criterion order.
pub const SUITES: [&str; 11] = [
    "orbit-identity",
    "dlog-vanishing",
    "epsilon-model",
    "kronecker",
    "schneider",
    "hecke-algebra",
    "sieve",
    "eigen",
    "xi",
    "incomplete-gamma",
    "residues",
];

/// Parameters shared by the suites.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub digits: u32,
    pub order: i64,
    pub schedule: Vec<f64>,
    pub taus: Vec<String>,
    pub m_max: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            digits: 60,
            order: 60,
            schedule: DEFAULT_SCHEDULE.to_vec(),
            taus: ["2i", "(1+sqrt(-23))/2", "0.3+1.7i"].iter().map(|s| s.to_string()).collect(),
            m_max: 20,
        }
    }
}

/// Run a suite by name with the default thresholds.
pub fn run(name: &str, cfg: &VerifyConfig) -> Option<Suite> {
    let taus: Vec<&str> = cfg.taus.iter().map(String::as_str).collect();
    Some(match name {
        "orbit-identity" => orbit_identity(&taus, cfg.m_max, cfg.digits, 1e-30),
        "dlog-vanishing" => dlog_vanishing(&cfg.schedule, 1e-6),
        "epsilon-model" => epsilon_model(&cfg.schedule, (0.8, 1.2)),
        "kronecker" => kronecker(80, 1e-40, 1e-30),
        "schneider" => schneider(&[60, 100], 6),
        "hecke-algebra" => hecke_algebra(),
        "sieve" => sieve(200),
        "eigen" => eigen_layer(&cfg.schedule, 1e-5),
        "xi" => xi_operator(1e-4, 1e-8),
        "incomplete-gamma" => incomplete_gamma_suite(cfg.digits),
        "residues" => residues(),
        _ => return None,
    })
}

fn parse_tau(s: &str, digits: u32) -> Result<HPoint> {
    HPoint::parse(s, bits(digits))
}

fn f11(order: i64) -> Result<FormExpansion<Rational>> {
    eta_quotient(&[(1, 2), (11, 2)], 11, order)
}

fn hauptmodul11() -> EtaQuotient {
    EtaQuotient::new(&[(1, 12), (11, -12)])
}

/// `|sum_{T_m tau} (j - 744) - c_m(tau)| < tol` for `1 <= m <= m_max`, where `c_m` is the
/// coefficient of the level-one third-kind form with a pole at `tau`.
pub fn orbit_identity(taus: &[&str], m_max: u64, digits: u32, tol: f64) -> Suite {
    let mut s = Suite { name: "orbit-identity", checks: Vec::new() };
    for t in taus {
        let rows = (|| -> Result<Vec<(u64, f64, f64)>> {
            let probe = parse_tau(t, 60)?;
            // absolute accuracy `digits` on coefficients of size exp(2 pi m y)
            let out = level1_working_digits(&probe, m_max as i64, digits) - 20;
            let need = level1_working_digits(&probe, m_max as i64, out) + 20;
            let tau = parse_tau(t, need)?;
            let g = level1_third_kind(&tau, m_max as i64, out)?;
            let prec = bits(out + 10);
            let series = g.form.inf();
            let mut rows = Vec::new();
            for m in 1..=m_max {
                let mut sum = Complex::new(prec);
                for p in hecke_orbit(m, &tau, 1)? {
                    sum += crate::modval::j(&p.z, prec)?;
                    sum -= 744u32;
                }
                let c = series.coeff_known(m as i64)?;
                let diff = cabs_f64(&Complex::with_val(prec, &sum - &c));
                rows.push((m, diff, cabs_f64(&c)));
            }
            Ok(rows)
        })();
        match rows {
            Ok(rows) => {
                for (m, diff, size) in rows {
                    s.checks.push(Check::new(format!("tau={t} m={m}"), diff < tol, format!("|diff| = {diff:.3e}, |c_m| = {size:.3e}")));
                }
            }
            Err(e) => s.checks.push(Check::failed(format!("tau={t}"), &e)),
        }
    }
    s
}

fn dlog_pairing(schedule: &[f64]) -> Result<crate::pairing::PairingRecord> {
    let f = SeriesTiles::new(&f11(160)?)?;
    let g = eta_dlog(&hauptmodul11(), 11, 160)?.to_float(30);
    let gt = third_kind_tiles(&g)?;
    let spec = third_kind_domain(&g, 11)?;
    reg_pairing_numeric(&f, gt.as_ref(), 2, &spec, schedule)
}

/// `(f_11, dt/t)_reg = 0` at level 11 by quadrature.
pub fn dlog_vanishing(schedule: &[f64], tol: f64) -> Suite {
    let mut s = Suite { name: "dlog-vanishing", checks: Vec::new() };
    s.push(
        "(f11, theta t / t)_reg",
        dlog_pairing(schedule).map(|r| (r.value.norm() < tol, format!("|value| = {:.3e}, error estimate {:.3e}", r.value.norm(), r.error))),
    );
    s
}

/// Schedule values admissible for the excisions of `spec`, continued by halving to at
/// least four values.
pub fn admissible(schedule: &[f64], spec: &PuncturedDomainSpec) -> Vec<f64> {
    let m = spec.max_epsilon();
    let mut out: Vec<f64> = schedule.iter().copied().filter(|&e| e < m).collect();
    if out.is_empty() {
        out.push(m / 2.0);
    }
    while out.len() < 4 {
        out.push(out[out.len() - 1] / 2.0);
    }
    out
}

fn error_slope(name: &str, vals: &[(f64, C64)], limit: C64, range: (f64, f64)) -> (bool, String) {
    let errs: Vec<(f64, f64)> = vals.iter().map(|&(e, v)| (e, (v - limit).norm())).collect();
    let listing = errs.iter().map(|(e, d)| format!("{e}:{d:.2e}")).collect::<Vec<_>>().join(" ");
    let pts: Vec<(f64, f64)> = errs.iter().filter(|p| p.1 > 0.0).map(|&(e, d)| ((e * (1.0 / e).ln()).ln(), d.ln())).collect();
    if pts.len() < 2 {
        return (false, format!("{name}: errors vanish identically ({listing})"));
    }
    let slope = fit_slope(&pts);
    (slope >= range.0 && slope <= range.1, format!("{name}: slope {slope:.3} against log(eps log(1/eps)); |value - limit| = {listing}"))
}

/// Measured `|value(eps) - limit|` against the model `C eps log(1/eps)`.
///
/// Fixtures: the level-11 dlog pairing (limit = extrapolated value), and `f_11` against
/// the level-one form with a pole at `0.1 + 1.3i`, alone and plus a multiple of `f_11`
/// (limit = value at `eps = 1e-4`).
pub fn epsilon_model(schedule: &[f64], range: (f64, f64)) -> Suite {
    let mut s = Suite { name: "epsilon-model", checks: Vec::new() };
    s.push(
        "cusp excision, (f11, dt/t)",
        dlog_pairing(schedule).map(|r| error_slope("cusps", &r.per_eps, r.value, range)),
    );
    let point = (|| -> Result<((bool, String), (bool, String))> {
        let f = SeriesTiles::new(&f11(160)?)?;
        let tau = parse_tau("0.1+1.3i", 200)?;
        let g = level1_third_kind(&tau, 10, 30)?;
        let gt = third_kind_tiles(&g)?;
        let spec = third_kind_domain(&g, 11)?;
        let sched = admissible(schedule, &spec);
        let limit = integrate(&f, gt.as_ref(), 2, &spec, 1e-4)?;
        let vals = sched.iter().map(|&e| Ok((e, integrate(&f, gt.as_ref(), 2, &spec, e)?))).collect::<Result<Vec<_>>>()?;
        let first = error_slope("interior pole", &vals, limit, range);
        let psi = Combination(vec![(C64::new(1.0, 0.0), gt), (C64::new(0.3, -0.7), Box::new(f.clone()))]);
        let limit = integrate(&f, &psi, 2, &spec, 1e-4)?;
        let vals = sched.iter().map(|&e| Ok((e, integrate(&f, &psi, 2, &spec, e)?))).collect::<Result<Vec<_>>>()?;
        Ok((first, error_slope("interior pole", &vals, limit, range)))
    })();
    match point {
        Ok((a, b)) => {
            s.push("point excision, (f11, g_tau)", Ok(a));
            s.push("point excision, (f11, g_tau + (0.3-0.7i) f11)", Ok(b));
        }
        Err(e) => s.checks.push(Check::failed("point excision", &e)),
    }
    s
}

/// Class polynomials for discriminants -4, -3 and -23.
pub fn kronecker(digits: u32, tol_small: f64, tol_23: f64) -> Suite {
    let mut s = Suite { name: "kronecker", checks: Vec::new() };
    let show = |p: &[rug::Integer]| p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
    s.push(
        "disc -4",
        hilbert_class_experiment(-4, digits).map(|r| {
            let res = r.root_residuals.iter().copied().fold(r.rounding_residual, f64::max);
            (r.poly == [rug::Integer::from(-1728), rug::Integer::from(1)] && res < tol_small, format!("poly [{}], residual {res:.3e}", show(&r.poly)))
        }),
    );
    s.push(
        "disc -3",
        hilbert_class_experiment(-3, digits).map(|r| {
            let res = r.root_residuals.iter().copied().fold(r.rounding_residual, f64::max);
            (r.poly == [rug::Integer::new(), rug::Integer::from(1)] && res < tol_small, format!("poly [{}], residual {res:.3e}", show(&r.poly)))
        }),
    );
    s.push(
        "disc -23",
        hilbert_class_experiment(-23, digits).map(|r| {
            let res = r.root_residuals.iter().copied().fold(0.0, f64::max);
            let monic_cubic = r.poly.len() == 4 && r.poly[3] == 1;
            (monic_cubic && res < tol_23, format!("poly [{}], max |H(j(tau_Q))| {res:.3e}", show(&r.poly)))
        }),
    );
    s
}

/// Orbit sums of `j` at `2^(1/4) i` (no relation expected) and at `i` (integers).
pub fn schneider(digit_list: &[u32], m_max: u64) -> Suite {
    let mut s = Suite { name: "schneider", checks: Vec::new() };
    let ms: Vec<u64> = (1..=m_max).collect();
    let j = |z: &Complex, p: u32| crate::modval::j(z, p);
    for &w in digit_list {
        let settings = AlgdepSettings {
            max_degree: 8,
            max_height: 1e20,
            digits: w,
            confirm_extra: 20,
        };
        let generic = (|| {
            let p = bits(3 * w + 200);
            let root = Float::with_val(p, 2).root(4);
            let tau = HPoint::new(Complex::with_val(p, (0, root)))?;
            orbit_transcendence_report(&j, &tau, &ms, 1, &settings)
        })();
        match generic {
            Ok(rows) => {
                for r in rows {
                    s.checks.push(Check::new(
                        format!("2^(1/4) i, W={w}, m={}", r.m),
                        r.outcome.verdict == Verdict::TranscendentalEvidence,
                        match &r.outcome.poly {
                            Some(p) => format!("{}, relation of degree {}", r.outcome.verdict, p.len() - 1),
                            None => format!("{}, no relation", r.outcome.verdict),
                        },
                    ));
                }
            }
            Err(e) => s.checks.push(Check::failed(format!("2^(1/4) i, W={w}"), &e)),
        }
        let cm = parse_tau("sqrt(-1)", w).and_then(|tau| orbit_transcendence_report(&j, &tau, &ms, 1, &settings));
        match cm {
            Ok(rows) => {
                for r in rows {
                    let poly = r.outcome.poly.as_ref().map_or("none".into(), |p| p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
                    s.checks.push(Check::new(
                        format!("i, W={w}, m={}", r.m),
                        r.outcome.verdict == Verdict::AlgebraicEvidence,
                        format!("{} poly [{poly}]", r.outcome.verdict),
                    ));
                }
            }
            Err(e) => s.checks.push(Check::failed(format!("i, W={w}"), &e)),
        }
    }
    s
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn agree(a: &ExactSeries, b: &ExactSeries) -> Result<(bool, i64)> {
    let o = a.order().min(b.order());
    if o < 1 {
        return Err(Error::InsufficientCoefficients { needed: 1, have: o });
    }
    Ok((a.truncate(o)? == b.truncate(o)?, o))
}

/// Multiplicativity, the prime-square relation and `Delta | T_2 = -24 Delta`.
pub fn hecke_algebra() -> Suite {
    let mut s = Suite { name: "hecke-algebra", checks: Vec::new() };
    let n = HeckeConvention::Normalized;
    let forms: Vec<(&str, Result<ExactSeries>, i32, u64)> = vec![
        ("Delta", delta(1400), 12, 1),
        ("j", jfunction(700), 0, 1),
        ("f11", f11(1400).map(|f| f.inf().clone()), 2, 11),
    ];
    for (name, f, k, level) in forms {
        let f = match f {
            Ok(f) => f,
            Err(e) => {
                s.checks.push(Check::failed(name, &e));
                continue;
            }
        };
        let mut bad = Vec::new();
        let mut count = 0;
        let mut min_window = i64::MAX;
        let mut err = None;
        for a in 2..=12u64 {
            for b in a + 1..=12u64 {
                if gcd(a, b) != 1 || gcd(a * b, level) != 1 {
                    continue;
                }
                let r = (|| {
                    let lhs = hecke_t(&hecke_t(&f, b, k, level, n)?, a, k, level, n)?;
                    let rhs = hecke_t(&f, a * b, k, level, n)?;
                    agree(&lhs, &rhs)
                })();
                match r {
                    Ok((ok, o)) => {
                        count += 1;
                        min_window = min_window.min(o);
                        if !ok {
                            bad.push(format!("({a},{b})"));
                        }
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
        match err {
            Some(e) => s.checks.push(Check::failed(format!("T_m T_n = T_mn on {name}"), &e)),
            None => s.checks.push(Check::new(
                format!("T_m T_n = T_mn on {name}"),
                bad.is_empty(),
                format!("{count} coprime pairs, windows >= {min_window}, failures [{}]", bad.join(" ")),
            )),
        }
    }
    let square = |name: &str, f: Result<ExactSeries>, k: i32, level: u64| -> Vec<(String, Result<(bool, String)>)> {
        [2u64, 3, 5]
            .iter()
            .filter(|&&p| !level.is_multiple_of(p))
            .map(|&p| {
                let r = f.as_ref().map_err(Clone::clone).and_then(|f| {
                    let tp2 = hecke_t(&hecke_t(f, p, k, level, n)?, p, k, level, n)?;
                    let rhs = tp2.sub(&f.truncate(tp2.order())?.scale(&Rational::from(rug::Integer::from(p).pow((k - 1) as u32))))?;
                    let lhs = hecke_t(f, p * p, k, level, n)?;
                    let (ok, o) = agree(&lhs, &rhs)?;
                    Ok((ok, format!("window {o}")))
                });
                (format!("T_{{{p}^2}} = T_{p}^2 - {p}^{} on {name}", k - 1), r)
            })
            .collect()
    };
    let mut rows = Vec::new();
    rows.extend(square("Delta", delta(400), 12, 1));
    rows.extend(square("E12", eisenstein(12, 400), 12, 1));
    rows.extend(square("E2", eisenstein(2, 400), 2, 1));
    rows.extend(square("f11", f11(400).map(|f| f.inf().clone()), 2, 11));
    for (name, r) in rows {
        s.push(name, r);
    }
    let oracle = (|| -> Result<(bool, String)> {
        let eta24 = EtaQuotient::new(&[(1, 24)]).expansion_inf(40)?;
        let t = hecke_t(&eta24, 2, 12, 1, n)?.truncate(20)?;
        let want = eta24.truncate(20)?.scale(&Rational::from(-24));
        let d = delta(40)?.truncate(20)?;
        Ok((t == want && d == eta24.truncate(20)?, format!("to order {}", t.order())))
    })();
    s.push("Delta | T_2 = -24 Delta (eta^24 oracle)", oracle);
    s
}

/// Sieving `j` at 2 and 3, and `U_p V_p = id`.
pub fn sieve(order: i64) -> Suite {
    let mut s = Suite { name: "sieve", checks: Vec::new() };
    let r = (|| -> Result<(bool, String)> {
        let j = jfunction(order + 12)?;
        let f = sieve_prime(&sieve_prime(&j, 2)?, 3)?;
        if f.order() < order {
            return Err(Error::InsufficientCoefficients { needed: order, have: f.order() });
        }
        let bad: Vec<i64> = (f.valuation()..=order).filter(|n| (n % 2 == 0 || n % 3 == 0) && f.coeff_known(*n).map_or(true, |c| c != 0)).collect();
        let kept = (f.valuation()..=order).filter(|n| n % 2 != 0 && n % 3 != 0 && f.coeff(*n) == j.coeff(*n)).count();
        Ok((bad.is_empty(), format!("order {}, nonzero at sieved exponents {bad:?}, {kept} coprime coefficients untouched", f.order())))
    })();
    s.push("j sieved at {2,3}", r);
    let forms: Vec<(&str, Result<ExactSeries>)> = vec![("j", jfunction(order)), ("Delta", delta(order)), ("E4", eisenstein(4, order))];
    for (name, f) in forms {
        for p in [2u64, 3, 5] {
            let r = f.as_ref().map_err(Clone::clone).and_then(|f| {
                let back = hecke_u(&hecke_v(f, p)?, p)?;
                Ok((back == *f, format!("order {}", back.order())))
            });
            s.push(format!("U_{p} V_{p} = id on {name}"), r);
        }
    }
    s
}

/// Exact Hecke data at level 23 and the coefficient/quadrature cross-check at level 11.
pub fn eigen_layer(schedule: &[f64], tol: f64) -> Suite {
    let mut s = Suite { name: "eigen", checks: Vec::new() };
    let probes = [2u64, 3, 5, 7, 13];
    let b23 = ingest_basis(S2_GAMMA0_23);
    let commute = b23.as_ref().map_err(Clone::clone).and_then(|b| {
        let mats = probes.iter().map(|&m| hecke_matrix(b, m)).collect::<Result<Vec<_>>>()?;
        let mut bad = Vec::new();
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                if mat_mul(&mats[i], &mats[j]) != mat_mul(&mats[j], &mats[i]) {
                    bad.push(format!("({},{})", probes[i], probes[j]));
                }
            }
        }
        Ok((bad.is_empty(), format!("non-commuting pairs [{}]", bad.join(" "))))
    });
    s.push("N=23 Hecke matrices commute", commute);
    let rel = b23.as_ref().map_err(Clone::clone).and_then(|b| {
        let e = eigensystem(b, &probes, false)?;
        if !e.exact {
            return Err(Error::EigenFailure("expected an exact quadratic eigensystem".into()));
        }
        let (l2, l3, l4, l6) = (e.lambda(b, 2)?, e.lambda(b, 3)?, e.lambda(b, 4)?, e.lambda(b, 6)?);
        let two = Scalar::Exact(Quad::rational(Rational::from(2)));
        let ok = (0..l2.len()).all(|i| l6[i] == l2[i].mul(&l3[i]) && l4[i] == l2[i].mul(&l2[i]).sub(&two));
        let shown = l2.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ");
        Ok((ok, format!("lambda_2 = {shown}")))
    });
    s.push("N=23 lambda_6 = lambda_2 lambda_3, lambda_4 = lambda_2^2 - 2", rel);
    let cross = (|| -> Result<Vec<(String, bool, String)>> {
        let b = ingest_basis(S2_GAMMA0_11)?;
        let e = eigensystem(&b, &[2, 3], false)?;
        let form = e.forms[0].float_form(&b, 30)?;
        let tau = parse_tau("0.1+1.3i", 200)?;
        let g = level1_third_kind(&tau, 20, 30)?;
        let spec = third_kind_domain(&g, 11)?;
        let sched = admissible(schedule, &spec);
        let gram = NumericGram::new(vec![form.clone()], &sched)?;
        // forms pulled back from level one are orthogonal to the newform
        let (_, c0) = canonical_project(&g, &gram)?;
        let mut out = vec![("N=11 level-one form needs no projection".to_string(), c0[0].norm() < tol, format!("|c| = {:.3e}", c0[0].norm()))];
        // psi = g + c f_11 has Phi_D = g and beta = -c
        let c = C64::new(0.3, -0.7);
        let fc = form.inf().map(|v| Complex::with_val(v.prec(), v * from_c64(c, v.prec().0)));
        let shifted = g.form.inf().add(&fc)?;
        let beta = decompose(&float_coeffs(&g.form.inf().sub(&shifted)?, 2 * b.dim), &e, &b)?;
        let beta: Vec<C64> = beta.iter().map(Scalar::to_c64).collect();
        let psi = Combination(vec![(C64::new(1.0, 0.0), third_kind_tiles(&g)?), (c, Box::new(SeriesTiles::new(&form)?))]);
        let pairing = reg_pairing_numeric(&SeriesTiles::new(&form)?, &psi, 2, &spec, &sched)?.value;
        let norms = e.norms(&b)?;
        let mut worst: f64 = 0.0;
        for m in [2u64, 3, 5, 7] {
            let lambda: Vec<C64> = e.lambda(&b, m)?.iter().map(Scalar::to_c64).collect();
            let lhs = lemma43_expansion(&[C64::new(1.0, 0.0)], &beta, &norms, &lambda, m)?;
            let rhs = -period_combination(lambda[0], m, pairing);
            worst = worst.max((lhs - rhs).norm());
        }
        out.push((
            "N=11 lemma43_expansion against reg_pairing_numeric".into(),
            worst < tol,
            format!("psi = g_tau + ({c}) f11, beta = {:.6e}, (f11, psi)_reg = {pairing:.6e}, max |difference| = {worst:.3e} over m in 2,3,5,7", beta[0]),
        ));
        Ok(out)
    })();
    match cross {
        Ok(rows) => s.checks.extend(rows.into_iter().map(|(n, p, d)| Check::new(n, p, d))),
        Err(e) => s.checks.push(Check::failed("N=11 lemma43 cross-check", &e)),
    }
    s
}

fn toy_harmonic(k: i32) -> Result<HarmonicData<Rational>> {
    let d = HarmonicCusp {
        cusp: Cusp::Infinity,
        width: 1,
        aplus: ExactSeries::from_terms((), 1, -3, 60, [(-3, Rational::from(2)), (-1, Rational::from(1)), (4, Rational::from((1, 3)))])?,
        bminus: b_series((), 1, (1..=60).map(|n| (-n, Rational::from((n * n % 7 + 1, n)))).chain([(2, Rational::from(5))]).collect(), -2, 60)?,
        bzero: Rational::from((7, 5)),
    };
    HarmonicData::new(k, 1, vec![d], "toy")
}

/// Numerical `xi` on `j` and on `E_2^*`, and the exact commutation with Hecke operators.
pub fn xi_operator(h: f64, e2_tol: f64) -> Suite {
    let mut s = Suite { name: "xi", checks: Vec::new() };
    let p = bits(60);
    let mut grid = Vec::new();
    for x in [-0.4, -0.2, 0.0, 0.2, 0.4] {
        for y in [0.95, 1.2, 1.6, 2.2] {
            grid.push(Complex::with_val(p, (x, y)));
        }
    }
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    let mut err = None;
    for z in &grid {
        let r = (|| -> Result<(f64, f64)> {
            let v = xi_numeric(|w: &Complex| crate::modval::j_unreduced(w, p), 0, z, h, p)?;
            let size = cabs_f64(&crate::modval::j_unreduced(z, p)?);
            Ok((cabs_f64(&v.value), 10.0 * h * h * size.max(1.0)))
        })();
        match r {
            Ok((v, floor)) => {
                worst = worst.max(v / floor);
                if v >= floor {
                    fails.push(format!("{:.2}", to_c64(z)));
                }
            }
            Err(e) => err = Some(e),
        }
    }
    match err {
        Some(e) => s.checks.push(Check::failed("xi j = 0", &e)),
        None => s.checks.push(Check::new(
            "xi j = 0",
            fails.is_empty(),
            format!("{} points, max |xi j| / (10 h^2 max(1,|j|)) = {worst:.3e}, failures [{}]", grid.len(), fails.join(" ")),
        )),
    }
    let e2 = (|| -> Result<(bool, String)> {
        let z = Complex::with_val(p, (0.1, 1.2));
        let f = |w: &Complex| -> Result<Complex> {
            let y = Float::with_val(p, w.imag());
            let mut v = crate::modval::e2(w, p)?;
            v -= Float::with_val(p, 3u32 / (pi(p) * y));
            Ok(v)
        };
        let r = xi_numeric(f, 2, &z, 1e-3, p)?;
        let d = (to_c64(&r.value) - C64::new(3.0 / std::f64::consts::PI, 0.0)).norm();
        Ok((d < e2_tol, format!("|xi E2* - 3/pi| = {d:.3e}")))
    })();
    s.push("xi (E2 - 3/(pi y)) = 3/pi", e2);
    for k in [0, -2, -4] {
        let r = toy_harmonic(k).and_then(|h| {
            let mut bad = Vec::new();
            for m in [1u64, 2, 3, 4, 6] {
                let lhs = xi_coefficients(&hecke_on_harmonic(&h, m)?)?;
                let rhs = scaled_hecke_on_xi(&xi_coefficients(&h)?, m, 1)?;
                if lhs != rhs {
                    bad.push(m);
                }
            }
            Ok((bad.is_empty(), format!("m in 1,2,3,4,6; failures {bad:?}")))
        });
        s.push(format!("xi(f | T_m) = m^(1-k) xi(f) | T_m, k={k}"), r);
    }
    s
}

/// `Gamma(x, 1) = exp(-x)` and the recurrence residual on log grids.
pub fn incomplete_gamma_suite(digits: u32) -> Suite {
    let mut s = Suite { name: "incomplete-gamma", checks: Vec::new() };
    let p = bits(digits);
    let tol = Float::with_val(p, 10).pow(3 - digits as i32);
    let xs = |n: i32| -> Vec<Float> { (0..=n).map(|i| Float::with_val(p, 10).pow(Float::with_val(p, -3 + 5 * i) / n)).collect() };
    let one = Float::with_val(p, 1);
    let anchor = (|| -> Result<(bool, String)> {
        let mut worst = Float::new(p);
        for x in xs(25) {
            let g = incomplete_gamma(&one, &x, p)?;
            let e = Float::with_val(p, (-x.clone()).exp_ref());
            let rel = Float::with_val(p, &g - &e).abs() / e;
            if rel > worst {
                worst = rel;
            }
        }
        Ok((worst < tol, format!("26 points on [1e-3, 1e2], max relative error {:.3e}", worst.to_f64())))
    })();
    s.push("Gamma(x, 1) = exp(-x)", anchor);
    let rec = (|| -> Result<(bool, String)> {
        let mut worst = Float::new(p);
        for x in xs(10) {
            for s2 in -6..=8 {
                let sv = Float::with_val(p, s2) / 2u32;
                let g0 = incomplete_gamma(&sv, &x, p)?;
                let s1 = Float::with_val(p, &sv + 1u32);
                let g1 = incomplete_gamma(&s1, &x, p)?;
                let xs_e = Float::with_val(p, (&x).pow(&sv)) * Float::with_val(p, (-x.clone()).exp_ref());
                let res = (Float::with_val(p, &g1 - Float::with_val(p, &sv * &g0)) - xs_e).abs();
                let ratio = res / g1.abs();
                if ratio > worst {
                    worst = ratio;
                }
            }
        }
        Ok((worst < tol, format!("11 x values, s in [-3, 4] step 1/2, max residual / Gamma(x, s+1) = {:.3e}", worst.to_f64())))
    })();
    s.push("Gamma(x, s+1) = s Gamma(x, s) + x^s exp(-x)", rec);
    s
}

/// Residue divisors of the constructed third-kind forms.
pub fn residues() -> Suite {
    let mut s = Suite { name: "residues", checks: Vec::new() };
    for t in ["2i", "(1+sqrt(-23))/2", "0.3+1.7i", "sqrt(-1)"] {
        let r = parse_tau(t, 400).and_then(|tau| level1_third_kind(&tau, 10, 30)).map(|g| {
            let sum = g.residue_sum();
            (sum == 0, format!("divisor degree {sum}, {} terms", g.divisor.terms.len()))
        });
        s.push(format!("level-one form at {t}"), r);
    }
    for (name, factors, level) in [
        ("t", vec![(1u64, 12i64), (11, -12)], 11u64),
        ("t^2", vec![(1, 24), (11, -24)], 11),
        ("t^-3", vec![(1, -36), (11, 36)], 11),
        ("(eta/eta_23)^12", vec![(1, 12), (23, -12)], 23),
    ] {
        let r = eta_dlog(&EtaQuotient::new(&factors), level, 30).map(|g| (g.residue_sum() == 0, format!("divisor degree {}", g.residue_sum())));
        s.push(format!("eta_dlog {name} at level {level}"), r);
    }
    let cusp = eta_dlog(&hauptmodul11(), 11, 30).map(|g| {
        let at = |c: Cusp| g.divisor.terms.iter().find(|(p, _)| *p == Place::Cusp(c)).map_or(0, |(_, m)| *m);
        let (inf, zero) = (at(Cusp::Infinity), at(Cusp::Zero));
        ((inf, zero) == (-5, 5), format!("residues (inf, 0) = ({inf}, {zero})"))
    });
    s.push("eta_dlog (eta/eta_11)^12 cusp residues", cusp);
    let numeric = (|| -> Result<(bool, String)> {
        let tau = parse_tau("0.3+1.7i", 400)?;
        let g = level1_third_kind(&tau, 10, 40)?;
        let (d, interior) = residue_divisor_numeric(&g, &g.form, &[tau], 0.05, 40)?;
        let weighted: Vec<i64> = interior.iter().map(|r| r.weighted).collect();
        Ok((d.degree() == 0 && weighted == [-1], format!("snapped divisor degree {}, interior {weighted:?}", d.degree())))
    })();
    s.push("snapped contour residues of the level-one form at 0.3+1.7i", numeric);
    s
}
