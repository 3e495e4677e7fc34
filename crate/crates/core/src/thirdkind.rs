//! Differentials of the third kind `2 pi i g(z) dz` represented by weight-2 expansions.

use rayon::prelude::*;
use rug::{Complex, Float, Rational};

use crate::classical_forms::{cusps, eisenstein, eisenstein_en, e4sq_e6_over_delta, jfunction, Cusp, EtaQuotient, FormExpansion};
use crate::error::{Error, Result};
use crate::halfplane::{reduce_sl2, Divisor, HPoint, Place, PlaceFunction};
use crate::lattice::{algdep, AlgdepOutcome, AlgdepSettings, Verdict};
use crate::numeric::{bits, cabs, digits_of, fmt_complex, from_c64, pi, two_pi_i, C64};
use crate::qseries::{Coeff, ExactSeries, FloatSeries, Prec, QSeries};

/// How a third-kind form was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Level1Generating,
    EtaDlog,
    ProjectedCanonical,
}

/// Sign convention for residue divisors. `CuspPositive` gives `Q_inf - Q_tau` for the
/// level-one generating form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResidueOrientation {
    #[default]
    CuspPositive,
    PointPositive,
}

impl ResidueOrientation {
    pub fn apply(self, d: &Divisor) -> Divisor {
        match self {
            ResidueOrientation::CuspPositive => d.clone(),
            ResidueOrientation::PointPositive => Divisor {
                level: d.level,
                terms: d.terms.iter().map(|(p, m)| (p.clone(), -m)).collect(),
            },
        }
    }
}

/// Residue of `2 pi i g dz` at an interior point.
#[derive(Clone, Debug)]
pub struct InteriorResidue {
    pub point: HPoint,
    /// `2 pi i Res_tau g` in the `z` coordinate.
    pub raw: Complex,
    /// `raw / e_tau`, snapped to an integer.
    pub weighted: i64,
}

/// Closed-form evaluator behind a third-kind form.
#[derive(Clone, Debug)]
pub enum PointModel {
    /// `(E_4^2 E_6 / Delta) / (j - j(tau))`.
    Level1 { j_tau: Complex },
    /// `theta t / t = sum_d r_d d E_2(d z) / 24`.
    Eta(EtaQuotient),
    /// `base - sum c_i f_i`, the `f_i` evaluated from their expansions at infinity.
    Projected {
        base: Box<PointModel>,
        corrections: Vec<(C64, FormExpansion<Complex>)>,
    },
}

impl PointModel {
    pub fn eval(&self, z: &Complex, prec: u32) -> Result<Complex> {
        match self {
            PointModel::Level1 { j_tau } => {
                let (w, g) = reduce_sl2(&Complex::with_val(prec, z));
                let num = crate::modval::e4sq_e6_over_delta(&w, prec)?;
                let mut den = crate::modval::j_unreduced(&w, prec)?;
                den -= j_tau;
                if cabs(&den).is_zero() {
                    return Err(Error::PoleOnSupport);
                }
                let mut v = Complex::with_val(prec, &num / &den);
                // g(z) = g(gamma z) / (c z + d)^2
                let mut czd = Complex::with_val(prec, z * g[1][0]);
                czd += g[1][1];
                v /= Complex::with_val(prec, czd.square_ref());
                Ok(v)
            }
            PointModel::Eta(t) => {
                let mut s = Complex::new(prec);
                for &(d, r) in &t.factors {
                    let dz = Complex::with_val(prec, z * d);
                    let e = crate::modval::e2(&dz, prec)?;
                    s += Complex::with_val(prec, e * (d as i64 * r));
                }
                s /= 24;
                Ok(s)
            }
            PointModel::Projected { base, corrections } => {
                let mut v = base.eval(z, prec)?;
                for (c, f) in corrections {
                    let (fv, _) = crate::halfplane::eval_qseries(f.inf(), z, prec)?;
                    v -= Complex::with_val(prec, fv * from_c64(*c, prec));
                }
                Ok(v)
            }
        }
    }
}

/// A weight-2 meromorphic form `g` with `2 pi i g dz` of the third kind.
#[derive(Clone, Debug)]
pub struct ThirdKindForm<C: Coeff> {
    pub form: FormExpansion<C>,
    pub divisor: Divisor,
    pub construction: Construction,
    pub interior: Vec<InteriorResidue>,
    pub model: PointModel,
    /// Level-one construction data needed to rebuild at another precision.
    pub tau: Option<HPoint>,
}

impl<C: Coeff> PlaceFunction for ThirdKindForm<C> {
    fn eval_point(&self, z: &Complex, prec: u32) -> Result<Complex> {
        self.model.eval(z, prec)
    }
}

impl<C: Coeff> ThirdKindForm<C> {
    /// Sum of the divisor multiplicities; zero for every valid form.
    pub fn residue_sum(&self) -> i64 {
        self.divisor.degree()
    }
}

impl ThirdKindForm<Rational> {
    pub fn to_float(&self, digits: u32) -> ThirdKindForm<Complex> {
        ThirdKindForm {
            form: self.form.to_float(digits),
            divisor: self.divisor.clone(),
            construction: self.construction,
            interior: self.interior.clone(),
            model: self.model.clone(),
            tau: self.tau.clone(),
        }
    }
}

fn snap(v: &Complex, tol: &Float) -> Result<i64> {
    let re = Float::with_val(v.prec().0, v.real().round_ref());
    let dr = Float::with_val(v.prec().0, v.real() - &re).abs();
    let di = Float::with_val(v.prec().0, v.imag().abs_ref());
    if dr > *tol || di > *tol {
        return Err(Error::ResidueNotIntegral { value: fmt_complex(v, 20) });
    }
    re.to_integer()
        .and_then(|i| i.to_i64())
        .ok_or_else(|| Error::ResidueNotIntegral { value: fmt_complex(v, 20) })
}

fn snap_rational(q: &Rational) -> Result<i64> {
    if *q.denom() != 1 {
        return Err(Error::ResidueNotIntegral { value: crate::numeric::fmt_rational(q) });
    }
    q.numer().to_i64().ok_or_else(|| Error::ResidueNotIntegral { value: q.to_string() })
}

/// Working digits for the level-one construction: coefficient `m` of the series is of
/// size `exp(2 pi m Im tau_red)`, and the series division needs that many extra digits.
pub fn level1_working_digits(tau: &HPoint, order: i64, digits: u32) -> u32 {
    let (w, _) = reduce_sl2(&tau.z);
    let y = w.imag().to_f64();
    digits + 20 + (order as f64 * 2.0 * std::f64::consts::PI * y / std::f64::consts::LN_10).ceil() as u32
}

/// `g_tau = (E_4^2 E_6 / Delta) / (j - j(tau)) = 1 + sum_{m>=1} j_m(tau) q^m`.
///
/// `2 pi i g_tau dz` has residue divisor `Q_inf - Q_tau`. Coefficients are computed at
/// [`level1_working_digits`] and rounded to `digits`.
pub fn level1_third_kind(tau: &HPoint, order: i64, digits: u32) -> Result<ThirdKindForm<Complex>> {
    let work = level1_working_digits(tau, order, digits);
    let wp = bits(work);
    let z = match tau.cm {
        Some(f) => f.root(wp),
        None => {
            if tau.prec() < wp {
                return Err(Error::PrecisionInsufficient { recommended: work });
            }
            Complex::with_val(wp, &tau.z)
        }
    };
    let j_tau = crate::modval::j(&z, wp)?;
    let tol = Float::with_val(wp, Float::i_exp(1, -((bits(digits) / 2) as i32)));
    if tau.elliptic_order == 1 {
        let d1728 = Complex::with_val(wp, &j_tau - 1728u32);
        if cabs(&j_tau) < tol || cabs(&d1728) < tol {
            return Err(Error::DegenerateTau(format!("{tau} is within 10^-{} of an elliptic point", digits / 2)));
        }
    }
    let ctx = Prec(wp);
    let pad = order + 4;
    let num = e4sq_e6_over_delta(pad)?.convert(ctx, |c| c.to_complex(wp));
    let jser = jfunction(pad)?.convert(ctx, |c| c.to_complex(wp));
    let den = jser.sub(&FloatSeries::monomial(ctx, 1, 0, j_tau.clone(), pad)?)?;
    let g = num.div(&den)?.truncate(order)?;
    let out_p = bits(digits);
    let g = g.convert(Prec(out_p), |c| Complex::with_val(out_p, c));
    let form = FormExpansion::new(2, 1, vec![(Cusp::Infinity, g)], format!("level-one generating form at {tau}"))?;

    let point = HPoint {
        z: Complex::with_val(out_p, &tau.z),
        ..tau.clone()
    };
    let e = i64::from(tau.elliptic_order);
    let mut divisor = Divisor::new(1);
    divisor.add(Place::Cusp(Cusp::Infinity), 1);
    divisor.add(Place::Point(point.clone()), -1);
    Ok(ThirdKindForm {
        form,
        divisor,
        construction: Construction::Level1Generating,
        interior: vec![InteriorResidue {
            point,
            raw: Complex::with_val(out_p, -e),
            weighted: -1,
        }],
        model: PointModel::Level1 {
            j_tau: Complex::with_val(out_p, &j_tau),
        },
        tau: Some(tau.clone()),
    })
}

/// `E_2(q)` as an exact series known to `order`.
fn e2_series(order: i64) -> Result<ExactSeries> {
    eisenstein(2, order)
}

/// `theta t / t` for a weight-0 eta quotient `t` on `Gamma_0(level)`.
///
/// At infinity this is `sum_d r_d d E_2(d z) / 24`; at cusp 0 it is
/// `sum_d r_d E_2(w / d) / (24 d)` in `q^(1/level)`. Residues at the cusps are the
/// orders of `t` there.
pub fn eta_dlog(t: &EtaQuotient, level: u64, order: i64) -> Result<ThirdKindForm<Rational>> {
    if t.weight()? != 0 {
        return Err(Error::DomainError("eta quotient must have weight 0".into()));
    }
    let cs = cusps(level)?;
    for &(d, _) in &t.factors {
        if !level.is_multiple_of(d) {
            return Err(Error::BadEtaIndex(format!("{d} does not divide {level}")));
        }
    }
    let e2 = e2_series(order)?;
    let mut inf = ExactSeries::zero((), 1, 0, order)?;
    for &(d, r) in &t.factors {
        let term = e2.substitute_power(d as u32)?.truncate(order)?.scale(&Rational::from((d as i64 * r, 24)));
        inf = inf.add(&term)?;
    }
    let mut expansions = vec![(Cusp::Infinity, inf)];
    if cs.contains(&Cusp::Zero) {
        let n = level as i64;
        let mut zero = ExactSeries::zero((), level as u32, 0, order)?;
        for &(d, r) in &t.factors {
            let sub = e2.substitute_power((level / d) as u32)?;
            let sub = QSeries::from_dense((), level as u32, sub.valuation(), sub.coeffs().to_vec(), sub.order())?.truncate(order)?;
            zero = zero.add(&sub.scale(&Rational::from((r, 24 * d as i64))))?;
        }
        let _ = n;
        expansions.push((Cusp::Zero, zero));
    }
    let form = FormExpansion::new(2, level, expansions, format!("dlog of eta quotient {:?}", t.factors))?;
    let divisor = cusp_divisor(&form)?;
    if divisor.degree() != 0 {
        return Err(Error::DomainError(format!("cusp residues sum to {}", divisor.degree())));
    }
    Ok(ThirdKindForm {
        form,
        divisor,
        construction: Construction::EtaDlog,
        interior: Vec::new(),
        model: PointModel::Eta(t.clone()),
        tau: None,
    })
}

/// Divisor at the cusps of an exact form: multiplicity `width * constant term`.
pub fn cusp_divisor(form: &FormExpansion<Rational>) -> Result<Divisor> {
    let mut d = Divisor::new(form.level);
    for (c, s) in &form.expansions {
        let a0 = s.coeff(0).unwrap_or_default();
        d.add(Place::Cusp(*c), snap_rational(&Rational::from(&a0 * c.width(form.level)))?);
    }
    Ok(d)
}

/// Residue of `2 pi i g dz` at `tau` by a trapezoidal contour sum on a circle of radius `r`.
pub fn contour_residue(g: &dyn PlaceFunction, tau: &Complex, r: f64, nodes: usize, prec: u32) -> Result<Complex> {
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let mut sum = Complex::new(prec);
    for k in 0..nodes {
        let theta = Float::with_val(prec, &two_pi * k as u32) / nodes as u32;
        let e = Complex::with_val(prec, (Float::with_val(prec, theta.cos_ref()), Float::with_val(prec, theta.sin_ref())));
        let z = Complex::with_val(prec, tau + Complex::with_val(prec, &e * r));
        let v = g.eval_point(&z, prec)?;
        sum += Complex::with_val(prec, v * e);
    }
    // Res = (r / K) sum g(z_k) e^{i theta_k}
    sum *= r;
    sum /= nodes as u32;
    Ok(Complex::with_val(prec, sum * two_pi_i(prec)))
}

/// Residue divisor of `2 pi i g dz`: cusp terms from the constant terms of `expansions`,
/// interior terms from contour sums around each candidate.
///
/// Each candidate is probed at radii `r` and `r/2` with 256 nodes; both must agree.
/// Candidates with vanishing residue are dropped.
pub fn residue_divisor_numeric(
    g: &(dyn PlaceFunction + Sync),
    expansions: &FormExpansion<Complex>,
    candidates: &[HPoint],
    radius: f64,
    digits: u32,
) -> Result<(Divisor, Vec<InteriorResidue>)> {
    let prec = bits(digits);
    let tol = Float::with_val(prec, Float::i_exp(1, -(bits(digits / 2) as i32)));
    let mut d = Divisor::new(expansions.level);
    for (c, s) in &expansions.expansions {
        let a0 = s.coeff(0).unwrap_or_else(|| Complex::new(prec));
        let v = Complex::with_val(prec, a0 * c.width(expansions.level));
        d.add(Place::Cusp(*c), snap(&v, &tol)?);
    }
    let probes: Vec<Result<Option<InteriorResidue>>> = candidates
        .par_iter()
        .map(|p| {
            let r1 = contour_residue(g, &p.z, radius, 256, prec)?;
            let r2 = contour_residue(g, &p.z, radius / 2.0, 256, prec)?;
            let diff = cabs(&Complex::with_val(prec, &r1 - &r2)).to_f64();
            let contour_tol = 1e-8 * (1.0 + cabs(&r1).to_f64());
            if diff > contour_tol {
                return Err(Error::ResidueNotIntegral {
                    value: format!("{} (radii disagree by {diff:e})", fmt_complex(&r1, 15)),
                });
            }
            let weighted = Complex::with_val(prec, &r1 / u32::from(p.elliptic_order));
            let near = snap(&weighted, &Float::with_val(prec, contour_tol))?;
            if near == 0 {
                return Ok(None);
            }
            Ok(Some(InteriorResidue {
                point: p.clone(),
                raw: r1,
                weighted: near,
            }))
        })
        .collect();
    let mut interior = Vec::new();
    for r in probes {
        if let Some(res) = r? {
            d.add(Place::Point(res.point.clone()), res.weighted);
            interior.push(res);
        }
    }
    Ok((d, interior))
}

/// Inner products needed to project onto the orthogonal complement of `S_2`.
pub trait GramProvider {
    fn dim(&self) -> usize;
    /// `(f_i, f_j)`.
    fn gram(&self, i: usize, j: usize) -> Result<C64>;
    /// `(f_i, psi)_reg`.
    fn against(&self, i: usize, psi: &ThirdKindForm<Complex>) -> Result<C64>;
    /// `f_i` as a multi-cusp expansion.
    fn basis_form(&self, i: usize) -> &FormExpansion<Complex>;
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_complex(a: &[Vec<C64>], b: &[C64]) -> Result<Vec<C64>> {
    let n = b.len();
    let mut m: Vec<Vec<C64>> = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm())).ok_or(Error::BasisDegenerate)?;
        if m[p][c].norm() <= 1e-12 * scale {
            return Err(Error::BasisDegenerate);
        }
        m.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for t in c..=n {
                    let v = m[c][t];
                    m[r][t] -= f * v;
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// `Phi = psi - sum c_i f_i` with `(f_i, Phi)_reg = 0` for every basis form.
pub fn canonical_project(psi: &ThirdKindForm<Complex>, gram: &dyn GramProvider) -> Result<(ThirdKindForm<Complex>, Vec<C64>)> {
    let d = gram.dim();
    if d == 0 {
        return Ok((psi.clone(), Vec::new()));
    }
    let g: Vec<Vec<C64>> = (0..d).map(|i| (0..d).map(|j| gram.gram(i, j)).collect()).collect::<Result<_>>()?;
    let rhs: Vec<C64> = (0..d).map(|i| gram.against(i, psi)).collect::<Result<_>>()?;
    // (f_i, Phi) = (f_i, psi) - sum_j conj(c_j) (f_i, f_j)
    let cc = solve_complex(&g, &rhs)?;
    let c: Vec<C64> = cc.iter().map(|v| v.conj()).collect();
    let prec = psi.form.inf().ctx().0;
    let level = gram.basis_form(0).level;
    let mut form = if psi.form.level == level { psi.form.clone() } else { psi.form.promote_level(level)? };
    let mut corrections = Vec::new();
    for (i, ci) in c.iter().enumerate() {
        let f = gram.basis_form(i);
        let scaled = f.map(|s| s.map(|v| Complex::with_val(prec, v * from_c64(*ci, prec))));
        form = form.sub(&scaled)?;
        corrections.push((*ci, f.clone()));
    }
    form.provenance = format!("{} projected orthogonally to S_2", psi.form.provenance);
    Ok((
        ThirdKindForm {
            form,
            divisor: psi.divisor.clone(),
            construction: Construction::ProjectedCanonical,
            interior: psi.interior.clone(),
            model: PointModel::Projected {
                base: Box::new(psi.model.clone()),
                corrections,
            },
            tau: psi.tau.clone(),
        },
        c,
    ))
}

/// The rational `c_0` for which `g - c_0 E_N` has zero constant term at cusp 0.
pub fn en_correction(g: &FormExpansion<Rational>) -> Result<Rational> {
    let zero = g.at(Cusp::Zero).ok_or_else(|| Error::IncompleteData("no expansion at cusp 0".into()))?;
    let en = eisenstein_en(g.level, 1)?;
    let e0 = en.at(Cusp::Zero).and_then(|s| s.coeff(0)).ok_or(Error::BasisDegenerate)?;
    Ok(zero.coeff(0).unwrap_or_default() / e0)
}

/// One coefficient of an algebraicity experiment.
#[derive(Clone, Debug)]
pub struct SchollRow {
    pub n: i64,
    pub value: Complex,
    pub outcome: AlgdepOutcome,
}

/// Per-coefficient algebraicity evidence for a third-kind form.
#[derive(Clone, Debug)]
pub struct SchollReport {
    pub rows: Vec<SchollRow>,
    pub verdict: Verdict,
    pub settings: AlgdepSettings,
}

impl SchollReport {
    /// `n,polynomial|NONE,residual` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,polynomial,residual\n");
        for r in &self.rows {
            let p = match &r.outcome.poly {
                Some(p) => p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
                None => "NONE".into(),
            };
            s.push_str(&format!("{},{},{:e}\n", r.n, p, r.outcome.residual));
        }
        s
    }
}

/// Run [`algdep`] on the coefficients `indices` of `form` at cusp infinity.
///
/// The form is rebuilt at each requested precision when possible (level-one forms);
/// exact forms are exact at every precision; otherwise the stored digits are all there is.
/// The verdict is heuristic evidence only.
pub fn scholl_experiment<C: Coeff>(form: &ThirdKindForm<C>, indices: &[i64], settings: &AlgdepSettings) -> Result<SchollReport> {
    let max_n = indices.iter().copied().max().unwrap_or(0);
    let coeff_at = |n: i64, digits: u32| -> Result<Complex> {
        match (&form.tau, form.construction) {
            (Some(t), Construction::Level1Generating) => {
                let g = level1_third_kind(t, max_n, digits)?;
                g.form.inf().coeff_known(n)
            }
            _ => Ok(form.form.inf().coeff_known(n)?.to_complex(bits(digits))),
        }
    };
    let rows = indices
        .par_iter()
        .map(|&n| {
            let value = coeff_at(n, settings.digits)?;
            let outcome = algdep(&|d| coeff_at(n, d), settings)?;
            Ok(SchollRow { n, value, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if rows.iter().all(|r| r.outcome.verdict == Verdict::AlgebraicEvidence) {
        Verdict::AlgebraicEvidence
    } else {
        Verdict::TranscendentalEvidence
    };
    Ok(SchollReport {
        rows,
        verdict,
        settings: *settings,
    })
}

/// Digits carried by a float form.
pub fn form_digits(f: &FormExpansion<Complex>) -> u32 {
    digits_of(f.inf().ctx().0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfplane::{hecke_orbit, QuadForm};
    use crate::numeric::{cabs_f64, to_c64};
    use rug::Integer;

    fn orbit_sum(m: u64, tau: &HPoint, prec: u32) -> Complex {
        let mut s = Complex::new(prec);
        for p in hecke_orbit(m, tau, 1).unwrap() {
            let mut v = crate::modval::j(&p.z, prec).unwrap();
            v -= 744;
            s += v;
        }
        s
    }

    #[test]
    fn level1_coefficients() {
        let p = bits(400);
        let tau = HPoint::new(Complex::with_val(p, (0, 2))).unwrap();
        let g = level1_third_kind(&tau, 8, 60).unwrap();
        let c0 = to_c64(&g.form.inf().coeff(0).unwrap());
        assert!((c0 - C64::new(1.0, 0.0)).norm() < 1e-50);
        let c1 = g.form.inf().coeff(1).unwrap();
        let mut j1 = crate::modval::j(&tau.z, bits(60)).unwrap();
        j1 -= 744;
        assert!(cabs_f64(&Complex::with_val(bits(60), &c1 - &j1)) < 1e-40 * cabs_f64(&j1));
        // two pipelines: series coefficient against the Hecke orbit sum
        let c2 = g.form.inf().coeff(2).unwrap();
        let o2 = orbit_sum(2, &tau, bits(80));
        let err = cabs_f64(&Complex::with_val(bits(60), &c2 - &o2));
        assert!(err < 1e-48, "{err}");
        assert_eq!(g.residue_sum(), 0);
    }

    #[test]
    fn level1_needs_precision() {
        let tau = HPoint::new(Complex::with_val(64, (0.1, 1.3))).unwrap();
        assert!(matches!(level1_third_kind(&tau, 10, 60), Err(Error::PrecisionInsufficient { .. })));
    }

    #[test]
    fn level1_near_elliptic_point_is_degenerate() {
        let p = bits(300);
        let mut z = Complex::with_val(p, (0, 1));
        z += Complex::with_val(p, (Float::with_val(p, Float::i_exp(1, -140)), 0));
        let tau = HPoint::new(z).unwrap();
        assert!(matches!(level1_third_kind(&tau, 5, 60), Err(Error::DegenerateTau(_))));
    }

    #[test]
    fn eta_dlog_of_level_11_hauptmodul() {
        let t = EtaQuotient::new(&[(1, 12), (11, -12)]);
        let g = eta_dlog(&t, 11, 30).unwrap();
        assert_eq!(g.form.inf().coeff(0).unwrap(), Rational::from(-5));
        let mult = |c: Cusp| g.divisor.terms.iter().find(|(p, _)| *p == Place::Cusp(c)).map(|x| x.1);
        assert_eq!(mult(Cusp::Infinity), Some(-5));
        assert_eq!(mult(Cusp::Zero), Some(5));
        // logarithmic derivative oracle: theta(t) / t
        let te = crate::classical_forms::eta_quotient(&t.factors, 11, 40).unwrap();
        for (c, s) in &te.expansions {
            let oracle = s.theta().div(s).unwrap();
            let got = g.form.at(*c).unwrap();
            let n = got.order().min(oracle.order());
            assert_eq!(got.truncate(n).unwrap(), oracle.truncate(n).unwrap().with_valuation(got.valuation()), "cusp {c:?}");
        }
    }

    #[test]
    fn eta_dlog_of_powers() {
        for k in -2i64..=3 {
            if k == 0 {
                continue;
            }
            let t = EtaQuotient::new(&[(1, 12 * k), (11, -12 * k)]);
            let g = eta_dlog(&t, 11, 10).unwrap();
            let m: Vec<i64> = g.divisor.terms.iter().map(|x| x.1).collect();
            assert_eq!(m, vec![-5 * k, 5 * k]);
            assert_eq!(g.residue_sum(), 0);
        }
        assert!(eta_dlog(&EtaQuotient::new(&[(1, 2), (11, 2)]), 11, 10).is_err());
    }

    #[test]
    fn contour_residues() {
        let digits = 30;
        let p = bits(digits);
        let wide = bits(200);
        let tau = HPoint::new(Complex::with_val(wide, (0.1, 1.3))).unwrap();
        let g = level1_third_kind(&tau, 10, digits).unwrap();
        let (d, interior) = residue_divisor_numeric(&g, &g.form, &[HPoint::new(Complex::with_val(p, &tau.z)).unwrap()], 0.05, digits).unwrap();
        assert_eq!(d.degree(), 0);
        assert_eq!(interior[0].weighted, -1);

        // elliptic point: raw residue -2, weighted -1
        let i = HPoint::from_form(QuadForm { a: 1, b: 0, c: 1 }, wide).unwrap();
        let g = level1_third_kind(&i, 10, digits).unwrap();
        let ip = HPoint::from_form(QuadForm { a: 1, b: 0, c: 1 }, p).unwrap();
        let (d, interior) = residue_divisor_numeric(&g, &g.form, &[ip], 0.05, digits).unwrap();
        assert!((to_c64(&interior[0].raw) - C64::new(-2.0, 0.0)).norm() < 1e-8);
        assert_eq!(interior[0].weighted, -1);
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn eta_dlog_has_no_interior_poles() {
        let digits = 25;
        let p = bits(digits);
        let t = EtaQuotient::new(&[(1, 12), (11, -12)]);
        let g = eta_dlog(&t, 11, 20).unwrap();
        let gf = g.form.to_float(digits);
        let mut seed = 12345u64;
        let probes: Vec<HPoint> = (0..50)
            .map(|_| {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x = (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let y = 0.9 + (seed >> 11) as f64 / (1u64 << 53) as f64;
                HPoint::new(Complex::with_val(p, (x, y))).unwrap()
            })
            .collect();
        let (d, interior) = residue_divisor_numeric(&g, &gf, &probes, 0.05, digits).unwrap();
        assert!(interior.is_empty());
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn orientation_flag_flips_every_sign() {
        let t = EtaQuotient::new(&[(1, 12), (11, -12)]);
        let g = eta_dlog(&t, 11, 5).unwrap();
        let f = ResidueOrientation::PointPositive.apply(&g.divisor);
        assert_eq!(f.terms[0].1, 5);
        assert_eq!(ResidueOrientation::default().apply(&g.divisor), g.divisor);
    }

    #[test]
    fn en_correction_kills_constant_at_zero() {
        let t = EtaQuotient::new(&[(1, 12), (11, -12)]);
        let g = eta_dlog(&t, 11, 10).unwrap();
        let c0 = en_correction(&g.form).unwrap();
        assert_eq!(c0, Rational::from((1, 2)));
        let en = eisenstein_en(11, 10).unwrap();
        let h = g.form.sub(&en.scale(&c0)).unwrap();
        assert_eq!(h.at(Cusp::Zero).unwrap().coeff(0).unwrap(), Rational::new());
    }

    struct FixedGram {
        g: Vec<Vec<C64>>,
        rhs: Vec<C64>,
        forms: Vec<FormExpansion<Complex>>,
    }

    impl GramProvider for FixedGram {
        fn dim(&self) -> usize {
            self.g.len()
        }
        fn gram(&self, i: usize, j: usize) -> Result<C64> {
            Ok(self.g[i][j])
        }
        fn against(&self, i: usize, _: &ThirdKindForm<Complex>) -> Result<C64> {
            Ok(self.rhs[i])
        }
        fn basis_form(&self, i: usize) -> &FormExpansion<Complex> {
            &self.forms[i]
        }
    }

    #[test]
    fn projection_linear_algebra() {
        let t = EtaQuotient::new(&[(1, 12), (11, -12)]);
        let psi = eta_dlog(&t, 11, 20).unwrap();
        let psi_f = ThirdKindForm {
            form: psi.form.to_float(30),
            divisor: psi.divisor.clone(),
            construction: psi.construction,
            interior: Vec::new(),
            model: psi.model.clone(),
            tau: None,
        };
        let f11 = crate::classical_forms::eta_quotient(&[(1, 2), (11, 2)], 11, 20).unwrap().to_float(30);
        // (f, psi + f) = (f, f) when (f, psi) = 0
        let norm = C64::new(0.25, 0.0);
        let gram = FixedGram { g: vec![vec![norm]], rhs: vec![norm], forms: vec![f11.clone()] };
        let (phi, c) = canonical_project(&psi_f, &gram).unwrap();
        assert!((c[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        let diff = phi.form.inf().coeff(1).unwrap();
        let expect = psi_f.form.inf().coeff(1).unwrap() - f11.inf().coeff(1).unwrap();
        assert!(cabs_f64(&Complex::with_val(bits(30), &diff - &expect)) < 1e-20);
        let zero = FixedGram { g: vec![vec![C64::new(0.0, 0.0)]], rhs: vec![norm], forms: vec![f11] };
        assert_eq!(canonical_project(&psi_f, &zero).unwrap_err(), Error::BasisDegenerate);
    }

    #[test]
    fn scholl_on_exact_form() {
        let t = EtaQuotient::new(&[(1, 12), (11, -12)]);
        let g = eta_dlog(&t, 11, 10).unwrap();
        let s = AlgdepSettings { max_degree: 2, digits: 40, ..Default::default() };
        let r = scholl_experiment(&g, &[1, 2, 3], &s).unwrap();
        assert_eq!(r.verdict, Verdict::AlgebraicEvidence);
        assert_eq!(r.rows[0].outcome.poly.as_ref().unwrap()[1], Integer::from(1));
        assert!(r.to_csv().starts_with("n,polynomial,residual\n1,"));
    }

    #[test]
    fn scholl_at_cm_point() {
        // disc -23: c_1 = j(tau) - 744 is a root of H_{-23}(x + 744)
        let tau = HPoint::from_form(QuadForm { a: 1, b: 1, c: 6 }, bits(100)).unwrap();
        let g = level1_third_kind(&tau, 1, 80).unwrap();
        let s = AlgdepSettings { max_degree: 3, digits: 80, ..Default::default() };
        let r = scholl_experiment(&g, &[1], &s).unwrap();
        assert_eq!(r.verdict, Verdict::AlgebraicEvidence);
        assert_eq!(r.rows[0].outcome.poly.as_ref().unwrap().len(), 4);
    }
}
