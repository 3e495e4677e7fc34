//! Regularized Petersson pairings: the coefficient formula and direct quadrature over
//! punctured fundamental domains.

use std::f64::consts::{FRAC_PI_4, PI};
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use rug::{Complex, Rational};

use crate::classical_forms::{is_prime, Cusp, FormExpansion};
use crate::error::{Error, Result};
use crate::harmonic::{eval_harmonic, HarmonicData};
use crate::numeric::{to_c64, C64};
use crate::qseries::Coeff;
use crate::thirdkind::{GramProvider, InteriorResidue, PointModel, ThirdKindForm};

pub type Mat = [[i64; 2]; 2];

/// Coset representatives of `Gamma_0(level)` in `SL_2(Z)`: the identity, then `S T^j`.
pub fn coset_reps(level: u64) -> Result<Vec<Mat>> {
    if level == 1 {
        return Ok(vec![[[1, 0], [0, 1]]]);
    }
    if !is_prime(level) {
        return Err(Error::Unsupported(format!("coset tiling for composite level {level}")));
    }
    let mut v = vec![[[1, 0], [0, 1]]];
    for j in 0..level as i64 {
        v.push([[0, -1], [1, j]]);
    }
    Ok(v)
}

/// Cusp of `X_0(level)` reached by tile `t` as `Im w -> infinity`.
pub fn tile_cusp(t: usize) -> Cusp {
    if t == 0 {
        Cusp::Infinity
    } else {
        Cusp::Zero
    }
}

/// Something that can be evaluated on every tile after slash transport.
pub trait TileEval: Sync {
    /// `(f|_k gamma_t)(w)` for `w` in the standard fundamental domain.
    fn eval_tile(&self, tile: usize, w: C64) -> C64;
}

/// A form given by truncated expansions at both cusps, evaluated in double precision.
#[derive(Clone, Debug)]
pub struct SeriesTiles {
    level: u64,
    inf: (u32, i64, Vec<C64>),
    zero: Option<(u32, i64, Vec<C64>)>,
}

fn f64_terms<C: Coeff>(s: &crate::qseries::QSeries<C>) -> (u32, i64, Vec<C64>) {
    let c = s.coeffs().iter().map(|c| to_c64(&c.to_complex(64))).collect();
    (s.denom(), s.valuation(), c)
}

fn tail_at_bottom(t: &(u32, i64, Vec<C64>), order: i64) -> f64 {
    let (den, _, c) = t;
    let r = (-2.0 * PI * (3f64.sqrt() / 2.0) / *den as f64).exp();
    let big = c.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let last = c.iter().rev().take(4).map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    last * r.powi(order as i32) / big
}

impl SeriesTiles {
    /// Fails with `InsufficientCoefficients` if truncation error at the bottom of the
    /// fundamental domain would exceed `1e-13` relative.
    pub fn new<C: Coeff>(f: &FormExpansion<C>) -> Result<Self> {
        let inf = f64_terms(f.inf());
        let zero = f.at(Cusp::Zero).map(f64_terms);
        for (t, s) in [(Some(&inf), f.inf()), (zero.as_ref(), f.at(Cusp::Zero).unwrap_or(f.inf()))] {
            if let Some(t) = t {
                if tail_at_bottom(t, s.order() + 1) > 1e-13 {
                    let per = (13.0 * 10f64.ln() / (2.0 * PI * 0.866 / t.0 as f64)).ceil() as i64;
                    return Err(Error::InsufficientCoefficients { needed: per, have: s.order() });
                }
            }
        }
        Ok(SeriesTiles { level: f.level, inf, zero })
    }

    fn sum(t: &(u32, i64, Vec<C64>), w: C64) -> C64 {
        let (den, val, c) = t;
        let q = (C64::new(0.0, 2.0 * PI) * w / *den as f64).exp();
        let mut qn = q.powi(*val as i32);
        let mut s = C64::new(0.0, 0.0);
        for a in c {
            s += a * qn;
            qn *= q;
        }
        s
    }
}

impl TileEval for SeriesTiles {
    fn eval_tile(&self, tile: usize, w: C64) -> C64 {
        if tile == 0 || self.level == 1 {
            return Self::sum(&self.inf, w);
        }
        let z = self.zero.as_ref().expect("cusp 0 expansion present at level > 1");
        Self::sum(z, w + (tile - 1) as f64)
    }
}

/// A level-one form: the same value on every tile.
pub struct Level1Tiles<F: Fn(C64) -> C64 + Sync>(pub F);

impl<F: Fn(C64) -> C64 + Sync> TileEval for Level1Tiles<F> {
    fn eval_tile(&self, _: usize, w: C64) -> C64 {
        (self.0)(w)
    }
}

/// `sum c_i f_i`.
pub struct Combination(pub Vec<(C64, Box<dyn TileEval>)>);

impl TileEval for Combination {
    fn eval_tile(&self, tile: usize, w: C64) -> C64 {
        self.0.iter().map(|(c, f)| c * f.eval_tile(tile, w)).sum()
    }
}

/// The identically zero form.
pub struct ZeroTiles;

impl TileEval for ZeroTiles {
    fn eval_tile(&self, _: usize, _: C64) -> C64 {
        C64::new(0.0, 0.0)
    }
}

/// `(E_4^2 E_6 / Delta) / (j - j_tau)` in double precision.
pub fn level1_generating_f64(j_tau: C64) -> impl Fn(C64) -> C64 + Sync {
    use crate::modval::{delta_f64, e4_f64, e6_f64};
    move |w| {
        let e4 = e4_f64(w);
        e4 * e4 * e6_f64(w) / (e4 * e4 * e4 - j_tau * delta_f64(w))
    }
}

/// Tile evaluator for a third-kind form.
pub fn third_kind_tiles(g: &ThirdKindForm<Complex>) -> Result<Box<dyn TileEval>> {
    model_tiles(&g.model, &g.form)
}

fn model_tiles(m: &PointModel, form: &FormExpansion<Complex>) -> Result<Box<dyn TileEval>> {
    Ok(match m {
        PointModel::Level1 { j_tau } => Box::new(Level1Tiles(level1_generating_f64(to_c64(j_tau)))),
        PointModel::Eta(_) => Box::new(SeriesTiles::new(form)?),
        PointModel::Projected { base, corrections } => {
            let mut parts: Vec<(C64, Box<dyn TileEval>)> = vec![(C64::new(1.0, 0.0), model_tiles(base, form)?)];
            for (c, f) in corrections {
                parts.push((-c, Box::new(SeriesTiles::new(f)?)));
            }
            Box::new(Combination(parts))
        }
    })
}

/// A region removed from the fundamental domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Excision {
    /// `Im(sigma_t z) > 1/eps` in the width-normalized local coordinate at `t`.
    Cusp(Cusp),
    /// A disk of radius `eps` about `center` (a point of the standard domain), in the
    /// listed tiles or in all tiles.
    Point { center: C64, tiles: Option<Vec<usize>> },
}

/// Tiling of `X_0(level)` together with the excised neighbourhoods.
#[derive(Clone, Debug)]
pub struct PuncturedDomainSpec {
    pub level: u64,
    pub excised: Vec<Excision>,
    pub tiling: Vec<Mat>,
}

#[derive(Clone, Copy, Debug)]
struct Hole {
    center: C64,
    half: f64,
}

impl PuncturedDomainSpec {
    /// Points must lie strictly inside `{|x| < 1/2, y > 1}`; at most one per tile.
    pub fn new(level: u64, excised: Vec<Excision>) -> Result<Self> {
        let tiling = coset_reps(level)?;
        let s = PuncturedDomainSpec { level, excised, tiling };
        for t in 0..s.tiling.len() {
            s.hole(t)?;
        }
        Ok(s)
    }

    fn hole(&self, tile: usize) -> Result<Option<Hole>> {
        let mut found = None;
        for e in &self.excised {
            if let Excision::Point { center, tiles } = e {
                if tiles.as_ref().is_some_and(|ts| !ts.contains(&tile)) {
                    continue;
                }
                if found.is_some() {
                    return Err(Error::Unsupported("more than one excised point in a tile".into()));
                }
                let half = 0.9 * (center.im - 1.0).min(0.5 - center.re.abs()).min(0.25);
                if half <= 0.0 {
                    return Err(Error::Unsupported(format!("excised point {center} must lie strictly inside the domain above y = 1")));
                }
                found = Some(Hole { center: *center, half });
            }
        }
        Ok(found)
    }

    /// Largest admissible radius: a third of the distance to the domain boundary.
    pub fn max_epsilon(&self) -> f64 {
        (0..self.tiling.len())
            .filter_map(|t| self.hole(t).ok().flatten())
            .map(|h| h.half / 0.9 / 3.0)
            .fold(f64::INFINITY, f64::min)
    }

    fn top(&self, tile: usize, eps: f64) -> Option<f64> {
        let c = tile_cusp(tile);
        self.excised.contains(&Excision::Cusp(c)).then(|| c.width(self.level) as f64 / eps)
    }
}

const NODES: usize = 64;

fn gl() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let r = GaussLegendre::new(NonZeroUsize::new(NODES).expect("nonzero"));
        r.as_node_weight_pairs().to_vec()
    })
}

fn gl_1d(a: f64, b: f64, mut f: impl FnMut(f64) -> C64) -> C64 {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    gl().iter().map(|&(x, w)| f(m + h * x) * w).sum::<C64>() * h
}

fn rect(x0: f64, x1: f64, y0: f64, y1: f64, f: &impl Fn(C64) -> C64) -> C64 {
    gl_1d(y0, y1, |y| gl_1d(x0, x1, |x| f(C64::new(x, y))))
}

/// Square `[c - b, c + b]^2` minus the disk of radius `eps`, in polar coordinates.
fn box_minus_disk(h: &Hole, eps: f64, f: &impl Fn(C64) -> C64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for k in 0..8 {
        let t0 = k as f64 * FRAC_PI_4;
        s += gl_1d(t0, t0 + FRAC_PI_4, |th| {
            let (sn, cs) = th.sin_cos();
            let r_max = h.half / cs.abs().max(sn.abs());
            let dir = C64::new(cs, sn);
            gl_1d(eps, r_max, |r| f(h.center + dir * r) * r)
        });
    }
    s
}

fn integrate_tile(f: &dyn TileEval, g: &dyn TileEval, k: i32, spec: &PuncturedDomainSpec, tile: usize, eps: f64) -> Result<C64> {
    let integrand = |w: C64| f.eval_tile(tile, w) * g.eval_tile(tile, w).conj() * w.im.powi(k - 2);
    // below y = 1: the arc |w| = 1
    let mut total = gl_1d(-0.5, 0.5, |x| gl_1d((1.0 - x * x).sqrt(), 1.0, |y| integrand(C64::new(x, y))));
    let hole = spec.hole(tile)?;
    let top = spec.top(tile, eps);
    let mut breaks = Vec::new();
    if let Some(h) = hole {
        if eps >= h.half / 0.9 / 3.0 {
            return Err(Error::DomainError(format!("eps = {eps} exceeds a third of the separation")));
        }
        breaks.push(h.center.im - h.half);
        breaks.push(h.center.im + h.half);
    }
    let mut y: f64 = 1.0;
    let mut small = 0;
    let mut prev = f64::INFINITY;
    let mut growing = 0;
    loop {
        let mut next: f64 = y + (y / 2.0f64).clamp(0.5, 32.0);
        if let Some(&b) = breaks.iter().find(|&&b| b > y + 1e-12 && b < next) {
            next = b;
        }
        if let Some(t) = top {
            next = next.min(t);
        }
        let piece = match hole {
            Some(h) if (y - (h.center.im - h.half)).abs() < 1e-12 => {
                let (x0, x1) = (h.center.re - h.half, h.center.re + h.half);
                rect(-0.5, x0, y, next, &integrand) + rect(x1, 0.5, y, next, &integrand) + box_minus_disk(&h, eps, &integrand)
            }
            _ => rect(-0.5, 0.5, y, next, &integrand),
        };
        if !piece.re.is_finite() || !piece.im.is_finite() {
            return Err(Error::Divergent(format!("non-finite integrand on tile {tile} near y = {y}")));
        }
        total += piece;
        y = next;
        let m = piece.norm();
        small = if m <= 1e-17 * total.norm().max(1e-300) { small + 1 } else { 0 };
        if let Some(t) = top {
            if y >= t || (small >= 2 && y > 3.0) {
                break;
            }
            continue;
        }
        growing = if y > 20.0 && m >= prev { growing + 1 } else { 0 };
        if growing >= 3 {
            return Err(Error::Divergent(format!("tile {tile} sums grow towards the cusp")));
        }
        prev = m;
        if small >= 2 || m == 0.0 {
            break;
        }
        if y > 1e4 {
            return Err(Error::Divergent(format!("tile {tile} does not decay by y = 1e4")));
        }
    }
    Ok(total)
}

/// `int f conj(g) y^k dmu` over the punctured domain for one `eps`.
pub fn integrate(f: &dyn TileEval, g: &dyn TileEval, k: i32, spec: &PuncturedDomainSpec, eps: f64) -> Result<C64> {
    let parts: Vec<Result<C64>> = (0..spec.tiling.len()).into_par_iter().map(|t| integrate_tile(f, g, k, spec, t, eps)).collect();
    let mut s = C64::new(0.0, 0.0);
    for p in parts {
        s += p?;
    }
    Ok(s)
}

/// Pairing value with its convergence history.
#[derive(Clone, Debug)]
pub struct PairingRecord {
    pub value: C64,
    pub per_eps: Vec<(f64, C64)>,
    pub error: f64,
}

impl PairingRecord {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,re,im\n");
        for (e, v) in &self.per_eps {
            s.push_str(&format!("{e:e},{:.17e},{:.17e}\n", v.re, v.im));
        }
        s
    }
}

pub const DEFAULT_SCHEDULE: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Least-squares fit of `v = L + a eps log eps + b eps`, plus `c eps^2` when there are
/// at least four points; returns `L`.
pub fn extrapolate(points: &[(f64, C64)]) -> Result<C64> {
    if points.len() < 3 {
        return Err(Error::DomainError("extrapolation needs at least 3 points".into()));
    }
    let k = if points.len() >= 4 { 4 } else { 3 };
    let basis = |e: f64| [1.0, e * e.ln(), e, e * e];
    let mut ata = vec![vec![C64::new(0.0, 0.0); k]; k];
    let mut atb = vec![C64::new(0.0, 0.0); k];
    for &(e, v) in points {
        let r = basis(e);
        for i in 0..k {
            for j in 0..k {
                ata[i][j] += r[i] * r[j];
            }
            atb[i] += v * r[i];
        }
    }
    Ok(crate::thirdkind::solve_complex(&ata, &atb)?[0])
}

/// Regularized pairing by quadrature, extrapolated to `eps -> 0`.
///
/// The error estimate is the change in the extrapolant when the largest `eps` is dropped.
pub fn reg_pairing_numeric(f: &dyn TileEval, g: &dyn TileEval, k: i32, spec: &PuncturedDomainSpec, schedule: &[f64]) -> Result<PairingRecord> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[1] >= w[0]) || schedule[schedule.len() - 1] <= 0.0 {
        return Err(Error::DomainError("schedule must be strictly decreasing, positive, with at least 3 values".into()));
    }
    let vals: Vec<Result<C64>> = schedule.par_iter().map(|&e| integrate(f, g, k, spec, e)).collect();
    let per_eps = schedule.iter().copied().zip(vals.into_iter().collect::<Result<Vec<_>>>()?).collect::<Vec<_>>();
    let value = extrapolate(&per_eps)?;
    let error = if per_eps.len() > 3 {
        (extrapolate(&per_eps[1..])? - value).norm()
    } else {
        (value - per_eps[2].1).norm()
    };
    Ok(PairingRecord { value, per_eps, error })
}

/// Petersson norm `(f, f)` of a cusp form of weight `k`.
pub fn petersson_norm(f: &dyn TileEval, k: i32, level: u64) -> Result<f64> {
    let spec = PuncturedDomainSpec::new(level, Vec::new())?;
    Ok(integrate(f, f, k, &spec, 1.0)?.re)
}

/// `sum_t alpha_t sum_{m+n=0} a_f^t(m) a_g^t(n)` over the cusps of `g`.
pub fn coefficient_term<C: Coeff>(f: &HarmonicData<C>, g: &FormExpansion<C>) -> Result<C> {
    if f.weight != 0 || g.weight != 2 {
        return Err(Error::Unsupported("coefficient pairing is implemented for f of weight 0 and g of weight 2".into()));
    }
    if f.level != g.level {
        return Err(Error::DomainError("f and g live on different levels".into()));
    }
    let mut total: Option<C> = None;
    for (cusp, gs) in &g.expansions {
        let fc = f.at(*cusp).map_err(|_| Error::IncompleteData(format!("f has no expansion at cusp {}", cusp.name())))?;
        let fs = &fc.aplus;
        if fs.denom() != gs.denom() {
            return Err(Error::DenomMismatch(fs.denom(), gs.denom()));
        }
        if gs.order() < -fs.valuation() {
            return Err(Error::InsufficientCoefficients { needed: -fs.valuation(), have: gs.order() });
        }
        if fs.order() < -gs.valuation() {
            return Err(Error::InsufficientCoefficients { needed: -gs.valuation(), have: fs.order() });
        }
        let mut s = C::zero(gs.ctx());
        for (m, a) in fs.terms() {
            if let Some(b) = gs.coeff_ref(-m) {
                s.add_mul(a, b);
            }
        }
        let s = s.scale(&Rational::from(cusp.width(g.level)));
        match &mut total {
            Some(t) => t.add_assign(&s),
            None => total = Some(s),
        }
    }
    total.ok_or_else(|| Error::IncompleteData("g has no expansions".into()))
}

/// Value of a weight-0 form at `z`, using whichever cusp expansion converges faster.
pub fn eval_weight0<C: Coeff>(f: &HarmonicData<C>, z: &Complex, prec: u32) -> Result<Complex> {
    let y_inf = z.imag().to_f64();
    let w = Complex::with_val(prec, -Complex::with_val(prec, z.recip_ref()));
    let y_zero = w.imag().to_f64() / f.level as f64;
    if f.level == 1 || y_inf >= y_zero || f.at(Cusp::Zero).is_err() {
        Ok(eval_harmonic(f, z, Cusp::Infinity, prec, None)?.value)
    } else {
        Ok(eval_harmonic(f, &w, Cusp::Zero, prec, None)?.value)
    }
}

/// Coefficient formula for the regularized pairing: the coefficient term plus
/// `sum_tau (2 pi i / e_tau) Res_tau(g) f(tau)`.
pub fn reg_pairing_coeff<C: Coeff>(f: &HarmonicData<C>, g: &FormExpansion<C>, interior: &[InteriorResidue], prec: u32) -> Result<Complex> {
    let mut v = coefficient_term(f, g)?.to_complex(prec);
    for r in interior {
        let fv = eval_weight0(f, &Complex::with_val(prec, &r.point.z), prec)?;
        let w = Complex::with_val(prec, &r.raw / u32::from(r.point.elliptic_order));
        v += Complex::with_val(prec, w * fv);
    }
    Ok(v)
}

/// `m^{-1} lambda_m pairing`.
pub fn period_combination(lambda: C64, m: u64, pairing: C64) -> C64 {
    lambda * pairing / m as f64
}

/// Numerical Gram data for a cusp form basis at prime level.
pub struct NumericGram {
    forms: Vec<FormExpansion<Complex>>,
    tiles: Vec<SeriesTiles>,
    gram: Vec<Vec<C64>>,
    pub schedule: Vec<f64>,
}

impl NumericGram {
    pub fn new(forms: Vec<FormExpansion<Complex>>, schedule: &[f64]) -> Result<Self> {
        let tiles = forms.iter().map(SeriesTiles::new).collect::<Result<Vec<_>>>()?;
        let level = forms.first().map_or(1, |f| f.level);
        let spec = PuncturedDomainSpec::new(level, Vec::new())?;
        let n = forms.len();
        let mut gram = vec![vec![C64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = integrate(&tiles[i], &tiles[j], 2, &spec, 1.0)?;
            }
        }
        Ok(NumericGram { forms, tiles, gram, schedule: schedule.to_vec() })
    }

    /// Record of `(f_i, psi)_reg`.
    pub fn pairing_record(&self, i: usize, psi: &ThirdKindForm<Complex>) -> Result<PairingRecord> {
        let level = self.forms[i].level;
        let g = third_kind_tiles(psi)?;
        let spec = third_kind_domain(psi, level)?;
        reg_pairing_numeric(&self.tiles[i], g.as_ref(), 2, &spec, &self.schedule)
    }
}

/// Excisions for a third-kind form: both cusps, and its interior poles reduced into
/// the standard domain (level-one forms have their pole at the same place in every tile).
pub fn third_kind_domain(psi: &ThirdKindForm<Complex>, level: u64) -> Result<PuncturedDomainSpec> {
    let mut ex = vec![Excision::Cusp(Cusp::Infinity)];
    if level > 1 {
        ex.push(Excision::Cusp(Cusp::Zero));
    }
    let poles: Vec<&InteriorResidue> = psi.interior.iter().collect();
    if !poles.is_empty() && psi.form.level != 1 {
        return Err(Error::Unsupported("interior poles of forms above level one".into()));
    }
    for p in poles {
        let r = p.point.reduced();
        ex.push(Excision::Point { center: to_c64(&r.z), tiles: None });
    }
    PuncturedDomainSpec::new(level, ex)
}

impl GramProvider for NumericGram {
    fn dim(&self) -> usize {
        self.forms.len()
    }
    fn gram(&self, i: usize, j: usize) -> Result<C64> {
        Ok(self.gram[i][j])
    }
    fn against(&self, i: usize, psi: &ThirdKindForm<Complex>) -> Result<C64> {
        Ok(self.pairing_record(i, psi)?.value)
    }
    fn basis_form(&self, i: usize) -> &FormExpansion<Complex> {
        &self.forms[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical_forms::{delta, eisenstein_en, eta_quotient, faber, EtaQuotient};
    use crate::halfplane::HPoint;
    use crate::numeric::bits;
    use crate::thirdkind::{eta_dlog, level1_third_kind};

    const DELTA_NORM: f64 = 1.035_362_056_8e-6;

    #[test]
    fn coset_reps_shape() {
        assert_eq!(coset_reps(2).unwrap().len(), 3);
        let r = coset_reps(11).unwrap();
        assert_eq!(r.len(), 12);
        assert_eq!(r[0], [[1, 0], [0, 1]]);
        // lower rows are distinct points of P^1(Z/11)
        let mut classes: Vec<i64> = r.iter().map(|m| if m[1][0] % 11 == 0 { -1 } else { m[1][1].rem_euclid(11) }).collect();
        classes.sort();
        classes.dedup();
        assert_eq!(classes.len(), 12);
        assert!(matches!(coset_reps(12), Err(Error::Unsupported(_))));
    }

    /// Adaptive Simpson oracle for `int_F |Delta|^2 y^10 dx dy` on the standard domain.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
    }

    fn delta_product(w: C64) -> C64 {
        let q = (C64::new(0.0, 2.0 * PI) * w).exp();
        let mut p = C64::new(1.0, 0.0);
        let mut qn = q;
        for _ in 0..60 {
            p *= C64::new(1.0, 0.0) - qn;
            qn *= q;
        }
        q * p.powi(24)
    }

    #[test]
    fn delta_norm_against_adaptive_oracle() {
        let d = FormExpansion::new(12, 1, vec![(Cusp::Infinity, delta(40).unwrap())], "Delta").unwrap();
        let tiles = SeriesTiles::new(&d).unwrap();
        let v = petersson_norm(&tiles, 12, 1).unwrap();
        let inner = |x: f64| {
            let y0 = (1.0 - x * x).sqrt();
            simpson(&|y: f64| delta_product(C64::new(x, y)).norm_sqr() * y.powi(10), y0, 12.0, 1e-17)
        };
        let oracle = 2.0 * simpson(&inner, 0.0, 0.5, 1e-16);
        assert!(((v - oracle) / oracle).abs() < 1e-8, "{v} vs {oracle}");
        assert!(((v - DELTA_NORM) / DELTA_NORM).abs() < 1e-9, "{v}");
    }

    #[test]
    fn level1_generating_far_up() {
        let g = level1_generating_f64(C64::new(1000.0, 5.0));
        for y in [20.0, 200.0, 900.0] {
            assert!((g(C64::new(0.1, y)) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn tiling_area() {
        // f = g = 1 in weight 0: hyperbolic area with both cusps cut off
        let one = Level1Tiles(|_| C64::new(1.0, 0.0));
        let spec = PuncturedDomainSpec::new(11, vec![Excision::Cusp(Cusp::Infinity), Excision::Cusp(Cusp::Zero)]).unwrap();
        let eps = 0.1;
        let v = integrate(&one, &one, 0, &spec, eps).unwrap();
        let expect = 12.0 * PI / 3.0 - 2.0 * eps;
        assert!((v.re - expect).abs() < 1e-12, "{v} vs {expect}");
        let open = PuncturedDomainSpec::new(11, Vec::new()).unwrap();
        assert!(matches!(integrate(&one, &one, 0, &open, eps), Err(Error::Divergent(_))));
    }

    #[test]
    fn zero_and_trivial_pairings() {
        let f = SeriesTiles::new(&eta_quotient(&[(1, 2), (11, 2)], 11, 140).unwrap()).unwrap();
        let spec = PuncturedDomainSpec::new(11, Vec::new()).unwrap();
        let r = reg_pairing_numeric(&f, &ZeroTiles, 2, &spec, &DEFAULT_SCHEDULE).unwrap();
        assert_eq!(r.value, C64::new(0.0, 0.0));
        assert!(r.to_csv().starts_with("epsilon,re,im\n1e-1,"));
        assert!(reg_pairing_numeric(&f, &ZeroTiles, 2, &spec, &[0.1, 0.2, 0.05]).is_err());
    }

    #[test]
    fn series_tiles_refuse_short_expansions() {
        let f = eta_quotient(&[(1, 2), (11, 2)], 11, 20).unwrap();
        assert!(matches!(SeriesTiles::new(&f), Err(Error::InsufficientCoefficients { .. })));
    }

    #[test]
    fn excision_validation() {
        assert!(PuncturedDomainSpec::new(11, vec![Excision::Point { center: C64::new(0.0, 1.0), tiles: None }]).is_err());
        let s = PuncturedDomainSpec::new(11, vec![Excision::Point { center: C64::new(0.1, 1.3), tiles: None }]).unwrap();
        assert!((s.max_epsilon() - 0.25 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_recovers_model() {
        let pts: Vec<(f64, C64)> = DEFAULT_SCHEDULE.iter().map(|&e| (e, C64::new(2.0 + 3.0 * e * e.ln() - e, 1.0 + e))).collect();
        let l = extrapolate(&pts).unwrap();
        assert!((l - C64::new(2.0, 1.0)).norm() < 1e-12);
        let sq: Vec<(f64, C64)> = DEFAULT_SCHEDULE.iter().map(|&e| (e, C64::new(2.0 - 5.0 * e * e + e * e.ln(), 0.0))).collect();
        assert!((extrapolate(&sq).unwrap() - C64::new(2.0, 0.0)).norm() < 1e-11);
        assert!((extrapolate(&sq[..3]).unwrap() - C64::new(2.0, 0.0)).norm() > 1e-4);
    }

    #[test]
    fn period_combination_examples() {
        assert_eq!(period_combination(C64::new(1.0, 0.0), 1, C64::new(PI, 0.0)), C64::new(PI, 0.0));
        assert_eq!(period_combination(C64::new(0.0, 0.0), 3, C64::new(PI, 0.0)), C64::new(0.0, 0.0));
        let l2 = (-1.0 + 5f64.sqrt()) / 2.0;
        assert!((period_combination(C64::new(l2, 0.0), 2, C64::new(1.0, 0.0)).re - 0.309_016_994_374_947_4).abs() < 1e-15);
    }

    fn hauptmodul() -> EtaQuotient {
        EtaQuotient::new(&[(1, 12), (11, -12)])
    }

    #[test]
    fn coefficient_formula_residue_theorem() {
        // f dt/t for f a polynomial in t is exact, so the coefficient term vanishes
        let t = eta_quotient(&hauptmodul().factors, 11, 40).unwrap();
        let g = eta_dlog(&hauptmodul(), 11, 40).unwrap();
        let mut f = t.clone();
        for _ in 0..3 {
            let h = HarmonicData::from_form(&f).unwrap();
            assert_eq!(coefficient_term(&h, &g.form).unwrap(), Rational::new());
            f = f.mul(&t).unwrap();
            f.weight = 0;
        }
        // t against E_11: residues of t E_11 dz at the cusps cancel
        let h = HarmonicData::from_form(&t).unwrap();
        let en = eisenstein_en(11, 40).unwrap();
        assert_eq!(coefficient_term(&h, &en).unwrap(), Rational::new());
    }

    #[test]
    fn coefficient_formula_toy_and_cuspidal() {
        let c = Rational::from((7, 3));
        let f = FormExpansion::new(0, 1, vec![(Cusp::Infinity, crate::qseries::QSeries::monomial((), 1, -1, Rational::from(1), 5).unwrap())], "q^-1").unwrap();
        let g = FormExpansion::new(2, 1, vec![(Cusp::Infinity, crate::qseries::QSeries::monomial((), 1, 1, c.clone(), 5).unwrap())], "toy").unwrap();
        assert_eq!(coefficient_term(&HarmonicData::from_form(&f).unwrap(), &g).unwrap(), c);
        let hol = FormExpansion::new(0, 11, vec![
            (Cusp::Infinity, crate::qseries::QSeries::monomial((), 1, 0, Rational::from(1), 20).unwrap()),
            (Cusp::Zero, crate::qseries::QSeries::monomial((), 11, 0, Rational::from(1), 20).unwrap()),
        ], "1").unwrap();
        let f11 = eta_quotient(&[(1, 2), (11, 2)], 11, 20).unwrap();
        assert_eq!(coefficient_term(&HarmonicData::from_form(&hol).unwrap(), &f11).unwrap(), Rational::new());
        let partial = FormExpansion { expansions: vec![hol.expansions[0].clone()], ..hol.clone() };
        assert!(matches!(
            coefficient_term(&HarmonicData { cusps: vec![HarmonicData::from_form(&hol).unwrap().cusps[0].clone()], ..HarmonicData::from_form(&hol).unwrap() }, &f11),
            Err(Error::IncompleteData(_))
        ));
        let _ = partial;
    }

    #[test]
    fn coefficient_formula_linearity() {
        let t = eta_quotient(&hauptmodul().factors, 11, 30).unwrap();
        let h = HarmonicData::from_form(&t).unwrap();
        let g1 = eisenstein_en(11, 30).unwrap();
        let g2 = eta_quotient(&[(1, 2), (11, 2)], 11, 30).unwrap();
        let (a, b) = (Rational::from((3, 7)), Rational::from(-5));
        let comb = g1.scale(&a).add(&g2.scale(&b)).unwrap();
        let lhs = coefficient_term(&h, &comb).unwrap();
        let rhs = (&a * coefficient_term(&h, &g1).unwrap()) + (&b * coefficient_term(&h, &g2).unwrap());
        assert_eq!(lhs, rhs);
        let t2 = t.mul(&t).unwrap();
        let h2 = HarmonicData::from_form(&FormExpansion { weight: 0, ..t2.clone() }).unwrap();
        let sum = HarmonicData::from_form(&FormExpansion { weight: 0, ..t.add(&FormExpansion { weight: 0, ..t2 }).unwrap() }).unwrap();
        assert_eq!(coefficient_term(&sum, &g2).unwrap(), coefficient_term(&h, &g2).unwrap() + coefficient_term(&h2, &g2).unwrap());
    }

    #[test]
    fn coefficient_formula_gives_orbit_identity() {
        let digits = 40;
        let tau = HPoint::new(Complex::with_val(bits(200), (0.3, 1.7))).unwrap();
        let g = level1_third_kind(&tau, 6, digits).unwrap();
        for m in 1..=5u32 {
            let jm = FormExpansion::new(0, 1, vec![(Cusp::Infinity, faber(m, 8).unwrap())], "j_m").unwrap().to_float(digits);
            let h = HarmonicData::from_form(&jm).unwrap();
            let v = reg_pairing_coeff(&h, &g.form, &g.interior, bits(digits)).unwrap();
            let scale = crate::numeric::cabs_f64(&g.form.inf().coeff(m as i64).unwrap());
            assert!(crate::numeric::cabs_f64(&v) < 1e-28 * scale.max(1.0), "m = {m}: {}", crate::numeric::cabs_f64(&v));
        }
    }

    #[test]
    fn quadrature_of_canonical_dlog_vanishes() {
        let f = SeriesTiles::new(&eta_quotient(&[(1, 2), (11, 2)], 11, 160).unwrap()).unwrap();
        let g = eta_dlog(&hauptmodul(), 11, 160).unwrap();
        let gt = third_kind_tiles(&g.to_float(30)).unwrap();
        let spec = third_kind_domain(&g.to_float(30), 11).unwrap();
        let r = reg_pairing_numeric(&f, gt.as_ref(), 2, &spec, &DEFAULT_SCHEDULE).unwrap();
        assert!(r.value.norm() < 1e-9, "{:?}", r);
    }
}
