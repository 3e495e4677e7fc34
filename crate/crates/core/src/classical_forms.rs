//! Exact q-expansions of classical forms and multi-cusp form expansions.

use rug::ops::Pow;
use rug::{Complex, Integer, Rational};

use crate::error::{Error, Result};
use crate::qseries::{Coeff, ExactSeries, QSeries};

/// Cusps of `X_0(N)` for `N = 1` or prime `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cusp {
    Infinity,
    Zero,
}

impl Cusp {
    /// Width of the cusp on `X_0(level)`.
    pub fn width(self, level: u64) -> u32 {
        match self {
            Cusp::Infinity => 1,
            Cusp::Zero => level as u32,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cusp::Infinity => "inf",
            Cusp::Zero => "zero",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inf" | "infinity" | "oo" => Some(Cusp::Infinity),
            "zero" | "0" => Some(Cusp::Zero),
            _ => None,
        }
    }
}

/// Cusps of `X_0(level)` handled by the library.
pub fn cusps(level: u64) -> Result<Vec<Cusp>> {
    if level == 1 {
        Ok(vec![Cusp::Infinity])
    } else if is_prime(level) {
        Ok(vec![Cusp::Infinity, Cusp::Zero])
    } else {
        Err(Error::Unsupported(format!(
            "level {level}: only N = 1 and prime N are supported"
        )))
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Expansions of a form at each cusp of `X_0(level)`.
///
/// The expansion at `Cusp::Zero` is that of `f|_k S` with `S = [[0,-1],[1,0]]`,
/// written in `q^(1/level)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormExpansion<C: Coeff> {
    pub weight: i32,
    pub level: u64,
    pub expansions: Vec<(Cusp, QSeries<C>)>,
    pub provenance: String,
}

pub type ExactForm = FormExpansion<Rational>;

impl<C: Coeff> FormExpansion<C> {
    pub fn new(weight: i32, level: u64, expansions: Vec<(Cusp, QSeries<C>)>, provenance: impl Into<String>) -> Result<Self> {
        let wanted = cusps(level)?;
        for c in &wanted {
            let s = expansions
                .iter()
                .find(|(d, _)| d == c)
                .map(|(_, s)| s)
                .ok_or_else(|| Error::IncompleteData(format!("missing expansion at cusp {}", c.name())))?;
            if s.denom() != c.width(level) {
                return Err(Error::DenomMismatch(s.denom(), c.width(level)));
            }
        }
        if expansions.len() != wanted.len() {
            return Err(Error::IncompleteData("unexpected cusp in expansion list".into()));
        }
        Ok(FormExpansion {
            weight,
            level,
            expansions,
            provenance: provenance.into(),
        })
    }

    pub fn at(&self, cusp: Cusp) -> Option<&QSeries<C>> {
        self.expansions.iter().find(|(c, _)| *c == cusp).map(|(_, s)| s)
    }

    pub fn inf(&self) -> &QSeries<C> {
        self.at(Cusp::Infinity).expect("every form has an expansion at infinity")
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&QSeries<C>, &QSeries<C>) -> Result<QSeries<C>>) -> Result<Self> {
        if self.level != other.level || self.weight != other.weight {
            return Err(Error::DomainError("forms differ in level or weight".into()));
        }
        let expansions = self
            .expansions
            .iter()
            .map(|(c, s)| {
                let t = other.at(*c).ok_or_else(|| Error::IncompleteData("cusp mismatch".into()))?;
                Ok((*c, f(s, t)?))
            })
            .collect::<Result<_>>()?;
        Ok(FormExpansion {
            weight: self.weight,
            level: self.level,
            expansions,
            provenance: self.provenance.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    /// Cusp-wise product; weights add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(&FormExpansion { weight: self.weight, ..other.clone() }, |a, b| a.mul(b))?;
        out.weight = self.weight + other.weight;
        Ok(out)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        self.map(|s| s.scale(q))
    }

    pub fn map(&self, f: impl Fn(&QSeries<C>) -> QSeries<C>) -> Self {
        FormExpansion {
            weight: self.weight,
            level: self.level,
            expansions: self.expansions.iter().map(|(c, s)| (*c, f(s))).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Regard a level-1 form as a form on `X_0(level)`.
    pub fn promote_level(&self, level: u64) -> Result<Self> {
        if self.level != 1 {
            return Err(Error::DomainError("only level-1 forms can be promoted".into()));
        }
        if level == 1 {
            return Ok(self.clone());
        }
        let inf = self.inf().clone();
        let zero = inf.rescale(level as u32)?;
        FormExpansion::new(self.weight, level, vec![(Cusp::Infinity, inf), (Cusp::Zero, zero)], self.provenance.clone())
    }

    /// Promote coefficients to complex floats.
    pub fn to_float(&self, digits: u32) -> FormExpansion<Complex> {
        FormExpansion {
            weight: self.weight,
            level: self.level,
            expansions: self.expansions.iter().map(|(c, s)| (*c, s.to_float(digits))).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Smallest known order over all cusps, in local-parameter units.
    pub fn min_order(&self) -> i64 {
        self.expansions.iter().map(|(_, s)| s.order()).min().unwrap_or(0)
    }
}

/// Divisor power sum `sigma_k(n)`.
pub fn sigma(k: u32, n: u64) -> Integer {
    let mut s = Integer::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            s += Integer::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += Integer::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`).
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rational::from(1));
            continue;
        }
        let mut s = Rational::new();
        for (k, bk) in b.iter().enumerate() {
            let c = Integer::from(Integer::binomial_u(m as u32 + 1, k as u32));
            s += Rational::from(bk * &c);
        }
        b.push(-s / (m as u32 + 1));
    }
    b
}

/// Normalized Eisenstein series `E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n` for even `k >= 2`.
pub fn eisenstein(k: u32, order: i64) -> Result<ExactSeries> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::DomainError(format!("Eisenstein weight {k} must be even and >= 2")));
    }
    if order < 0 {
        return Err(Error::EmptyWindow { valuation: 0, order });
    }
    let bk = bernoulli(k as usize).pop().expect("nonempty");
    let c = -Rational::from(2 * k) / bk;
    let mut coeffs = vec![Rational::from(1)];
    for n in 1..=order {
        coeffs.push(Rational::from(&c * sigma(k - 1, n as u64)));
    }
    QSeries::from_dense((), 1, 0, coeffs, order)
}

/// `E_N(z) = E_2(z) - N E_2(Nz)` on `X_0(N)`, with its expansion at `0` when `N` is prime.
pub fn eisenstein_en(level: u64, order: i64) -> Result<ExactForm> {
    if level < 2 {
        return Err(Error::DomainError("E_N needs N >= 2".into()));
    }
    let e2 = eisenstein(2, order)?;
    let n = level as u32;
    let inf = e2.sub(&e2.substitute_power(n)?.truncate(order)?.scale(&Rational::from(n)))?;
    let mut expansions = vec![(Cusp::Infinity, inf)];
    if cusps(level)?.contains(&Cusp::Zero) {
        // E_N|S (w) = E_2(w) - E_2(w/N)/N in q^(1/N)
        let slow = QSeries::from_dense((), n, 0, e2.coeffs().to_vec(), order)?;
        let fast = e2.rescale(n)?.truncate(order)?;
        let zero = fast.sub(&slow.scale(&Rational::from((1, n))))?;
        expansions.push((Cusp::Zero, zero));
    }
    FormExpansion::new(2, level, expansions, format!("E_N, N = {level}"))
}

/// `Delta = (E_4^3 - E_6^2) / 1728`.
pub fn delta(order: i64) -> Result<ExactSeries> {
    let e4 = eisenstein(4, order)?;
    let e6 = eisenstein(6, order)?;
    let d = e4.pow(3)?.sub(&e6.pow(2)?)?;
    Ok(d.scale(&Rational::from((1, 1728))).trimmed())
}

/// `j = E_4^3 / Delta`, known to `order`.
pub fn jfunction(order: i64) -> Result<ExactSeries> {
    let e4 = eisenstein(4, order + 2)?;
    let j = e4.pow(3)?.div(&delta(order + 2)?)?;
    j.truncate(order)
}

/// `E_4^2 E_6 / Delta = -theta j`, known to `order`.
pub fn e4sq_e6_over_delta(order: i64) -> Result<ExactSeries> {
    let e4 = eisenstein(4, order + 2)?;
    let e6 = eisenstein(6, order + 2)?;
    e4.pow(2)?.mul(&e6)?.div(&delta(order + 2)?)?.truncate(order)
}

/// Euler product `prod (1 - q^n)` via the pentagonal number theorem.
pub fn euler_product(order: i64) -> Result<ExactSeries> {
    let mut terms = Vec::new();
    for k in 0i64.. {
        let a = k * (3 * k - 1) / 2;
        let b = k * (3 * k + 1) / 2;
        if a > order {
            break;
        }
        let s = if k % 2 == 0 { 1 } else { -1 };
        terms.push((a, Rational::from(s)));
        if k > 0 && b <= order {
            terms.push((b, Rational::from(s)));
        }
    }
    QSeries::from_terms((), 1, 0, order, terms)
}

/// Exponent vector of an eta quotient `prod_d eta(d z)^{r_d}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaQuotient {
    pub factors: Vec<(u64, i64)>,
}

impl EtaQuotient {
    pub fn new(factors: &[(u64, i64)]) -> Self {
        let mut f: Vec<(u64, i64)> = factors.iter().copied().filter(|&(_, r)| r != 0).collect();
        f.sort();
        EtaQuotient { factors: f }
    }

    pub fn weight(&self) -> Result<i32> {
        let s: i64 = self.factors.iter().map(|&(_, r)| r).sum();
        if s % 2 != 0 {
            return Err(Error::BadEtaIndex(format!("sum of exponents {s} is odd")));
        }
        Ok((s / 2) as i32)
    }

    /// `prod_d eta(d z)^{r_d} = q^(shift/24) * (power series)`; returns the shift.
    fn inf_shift24(&self) -> i64 {
        self.factors.iter().map(|&(d, r)| d as i64 * r).sum()
    }

    /// Expansion at infinity, known to `order`.
    pub fn expansion_inf(&self, order: i64) -> Result<ExactSeries> {
        let s = self.inf_shift24();
        if s % 24 != 0 {
            return Err(Error::BadEtaIndex(format!("order at infinity {s}/24 is not integral")));
        }
        self.product(1, |d| d, s / 24, order)
    }

    /// Expansion of `f|S` in `q^(1/level)`, known to `order` in that variable.
    ///
    /// `f|S (w) = (-i)^k prod d^{-r_d/2} eta(w/d)^{r_d}`.
    pub fn expansion_zero(&self, level: u64, order: i64) -> Result<ExactSeries> {
        let k = self.weight()?;
        if k % 2 != 0 {
            return Err(Error::Unsupported("odd weight: (-i)^k is not rational".into()));
        }
        let s: i64 = self.factors.iter().map(|&(d, r)| (level / d) as i64 * r).sum();
        if s % 24 != 0 {
            return Err(Error::BadEtaIndex(format!("order at 0 is {s}/24 in q^(1/{level})")));
        }
        let mut scalar = Rational::from(if k % 4 == 0 { 1 } else { -1 });
        for &(d, r) in &self.factors {
            if r % 2 != 0 && !is_square(d) {
                return Err(Error::Unsupported(format!("d = {d}^(-{r}/2) is irrational")));
            }
            let base = if r % 2 == 0 {
                Rational::from(d)
            } else {
                Rational::from(isqrt(d))
            };
            let e = if r % 2 == 0 { r / 2 } else { r };
            scalar *= rat_pow(&base, -e);
        }
        let p = self.product(level as u32, |d| level / d, s / 24, order)?;
        Ok(p.scale(&scalar))
    }

    fn product(&self, denom: u32, stride: impl Fn(u64) -> u64, shift: i64, order: i64) -> Result<ExactSeries> {
        let inner = order - shift;
        let mut acc = QSeries::one((), inner.max(0))?;
        for &(d, r) in &self.factors {
            let m = stride(d);
            let base = euler_product(inner.max(0) / m as i64)?;
            let sub = base.substitute_power(m as u32)?.truncate(inner.max(0))?;
            acc = acc.mul(&sub.pow(r)?)?;
        }
        let acc = QSeries::from_dense((), denom, 0, acc.coeffs().to_vec(), inner)?;
        Ok(acc.shift(shift))
    }

    /// `f|W_N = scalar * (eta quotient with r'_d = r_{N/d})`, `W_N` normalized by `det^{k/2}`.
    ///
    /// The scalar is `(-i)^k N^{-k/2} prod_d (N/d)^{r_d/2}`; returns its square
    /// together with the sign `(-i)^k` when the scalar itself is not rational.
    pub fn fricke(&self, level: u64) -> Result<(Rational, EtaQuotient)> {
        let k = self.weight()?;
        for &(d, _) in &self.factors {
            if !level.is_multiple_of(d) {
                return Err(Error::BadEtaIndex(format!("{d} does not divide {level}")));
            }
        }
        let mut sq = rat_pow(&Rational::from(level), -k as i64);
        for &(d, r) in &self.factors {
            sq *= rat_pow(&Rational::from(level / d), r);
        }
        let scalar = rational_sqrt(&sq).ok_or_else(|| Error::Unsupported("Fricke scalar is irrational".into()))?;
        let sign = match k.rem_euclid(4) {
            0 => 1,
            2 => -1,
            _ => return Err(Error::Unsupported("odd weight Fricke sign".into())),
        };
        let image = EtaQuotient::new(&self.factors.iter().map(|&(d, r)| (level / d, r)).collect::<Vec<_>>());
        Ok(((scalar * sign), image))
    }
}

/// Eta quotient as a form on `X_0(level)` with expansions at every cusp.
pub fn eta_quotient(r: &[(u64, i64)], level: u64, order: i64) -> Result<ExactForm> {
    let q = EtaQuotient::new(r);
    for &(d, _) in &q.factors {
        if d == 0 || !level.is_multiple_of(d) {
            return Err(Error::BadEtaIndex(format!("{d} does not divide {level}")));
        }
    }
    let k = q.weight()?;
    let mut expansions = vec![(Cusp::Infinity, q.expansion_inf(order)?)];
    if cusps(level)?.contains(&Cusp::Zero) {
        expansions.push((Cusp::Zero, q.expansion_zero(level, order)?));
    }
    let label = q
        .factors
        .iter()
        .map(|(d, r)| format!("eta({d}z)^{r}"))
        .collect::<Vec<_>>()
        .join(" ");
    FormExpansion::new(k, level, expansions, label)
}

/// The weakly holomorphic function `j_m = q^{-m} + O(q)`, known to `order`.
pub fn faber(m: u32, order: i64) -> Result<ExactSeries> {
    Ok(faber_family(m, order)?.pop().expect("nonempty").0)
}

/// `j_m` as a polynomial in `j` (coefficients from degree 0 upward).
pub fn faber_polynomial(m: u32) -> Result<Vec<Integer>> {
    Ok(faber_family(m, 1)?.pop().expect("nonempty").1)
}

/// `(j_k, P_k)` for `k = 0..=m`, each series known to `order`.
pub fn faber_family(m: u32, order: i64) -> Result<Vec<(ExactSeries, Vec<Integer>)>> {
    if order < 0 {
        return Err(Error::DomainError("order must be nonnegative".into()));
    }
    let k_top = order + i64::from(m);
    let j1 = jfunction(k_top)?.sub(&ExactSeries::monomial((), 1, 0, Rational::from(744), k_top)?)?;
    let mut fam: Vec<(ExactSeries, Vec<Integer>)> = vec![(QSeries::one((), k_top)?, vec![Integer::from(1)])];
    for k in 1..=m as i64 {
        let (prev_s, prev_p) = fam.last().expect("nonempty").clone();
        let mut s = if k == 1 { j1.clone() } else { j1.mul(&prev_s)? };
        // (x - 744) * P_{k-1}
        let mut p = vec![Integer::new(); prev_p.len() + 1];
        for (i, c) in prev_p.iter().enumerate() {
            p[i + 1] += c;
            p[i] -= Integer::from(c * 744);
        }
        if k > 1 {
            for i in (0..k).rev() {
                let c = s.coeff_known(-i)?;
                if c.is_zero() {
                    continue;
                }
                let (si, pi) = &fam[i as usize];
                s = s.sub(&si.scale(&c))?;
                let ci = c.numer().clone();
                for (t, pc) in pi.iter().enumerate() {
                    p[t] -= Integer::from(&ci * pc);
                }
            }
        }
        fam.push((s, p));
    }
    fam.into_iter()
        .map(|(s, p)| Ok((s.with_valuation(-(m as i64)).trimmed().truncate(order)?, p)))
        .collect()
}

fn rat_pow(b: &Rational, e: i64) -> Rational {
    let mut r = Rational::from(1);
    for _ in 0..e.unsigned_abs() {
        r *= b;
    }
    if e < 0 {
        r.recip_mut();
    }
    r
}

fn isqrt(n: u64) -> u64 {
    Integer::from(n).sqrt().to_u64().expect("fits")
}

fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if *q < 0 {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    if !n.is_perfect_square() || !d.is_perfect_square() {
        return None;
    }
    Some(Rational::from((n.clone().sqrt(), d.clone().sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &ExactSeries, from: i64, to: i64) -> Vec<i64> {
        (from..=to).map(|n| s.coeff(n).unwrap().numer().to_i64().unwrap()).collect()
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(1, 12), 28);
        assert_eq!(sigma(3, 2), 9);
        assert_eq!(sigma(0, 36), 9);
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(12);
        assert_eq!(b[2], Rational::from((1, 6)));
        assert_eq!(b[4], Rational::from((-1, 30)));
        assert_eq!(b[12], Rational::from((-691, 2730)));
    }

    #[test]
    fn eisenstein_series() {
        assert_eq!(ints(&eisenstein(4, 3).unwrap(), 0, 3), vec![1, 240, 2160, 6720]);
        assert_eq!(ints(&eisenstein(6, 2).unwrap(), 0, 2), vec![1, -504, -16632]);
        assert_eq!(ints(&eisenstein(2, 3).unwrap(), 0, 3), vec![1, -24, -72, -96]);
    }

    #[test]
    fn delta_and_j() {
        let d = delta(6).unwrap();
        assert_eq!(ints(&d, 1, 6), vec![1, -24, 252, -1472, 4830, -6048]);
        let j = jfunction(3).unwrap();
        assert_eq!(j.valuation(), -1);
        assert_eq!(j.order(), 3);
        assert_eq!(ints(&j, -1, 3), vec![1, 744, 196884, 21493760, 864299970]);
    }

    #[test]
    fn delta_is_eta24() {
        let d = delta(40).unwrap();
        let e = EtaQuotient::new(&[(1, 24)]).expansion_inf(40).unwrap();
        assert_eq!(d, e);
    }

    #[test]
    fn faber_j2() {
        let j2 = faber(2, 4).unwrap();
        assert_eq!(j2.coeff(-2), Some(Rational::from(1)));
        assert_eq!(j2.coeff(-1), Some(Rational::new()));
        assert_eq!(j2.coeff(0), Some(Rational::new()));
        assert_eq!(j2.coeff(1), Some(Rational::from(42987520)));
        let p = faber_polynomial(2).unwrap();
        assert_eq!(p, vec![Integer::from(159768), Integer::from(-1488), Integer::from(1)]);
    }

    #[test]
    fn faber_polynomial_reproduces_series() {
        let order = 6;
        for m in 1..=5u32 {
            let jm = faber(m, order).unwrap();
            let p = faber_polynomial(m).unwrap();
            let j = jfunction(order + m as i64 + 2).unwrap();
            let mut acc = ExactSeries::zero((), 1, -(m as i64), order).unwrap();
            let mut pw = ExactSeries::one((), order + 2 * m as i64).unwrap();
            for c in &p {
                acc = acc.add(&pw.scale(&Rational::from(c))).unwrap();
                pw = pw.mul(&j).unwrap();
            }
            assert_eq!(acc.truncate(order).unwrap(), jm, "m = {m}");
        }
    }

    #[test]
    fn f11_expansions() {
        let f = eta_quotient(&[(1, 2), (11, 2)], 11, 12).unwrap();
        assert_eq!(f.weight, 2);
        assert_eq!(ints(f.inf(), 1, 10), vec![1, -2, -1, 2, 1, 2, -2, 0, -2, -2]);
        let z = f.at(Cusp::Zero).unwrap();
        assert_eq!(z.denom(), 11);
        assert_eq!(z.leading_exponent(), Some(1));
        assert_eq!(z.coeff(1), Some(Rational::from((-1, 11))));
        assert_eq!(z.coeff(2), Some(Rational::from((2, 11))));
    }

    #[test]
    fn hauptmodul_t11() {
        let t = eta_quotient(&[(1, 12), (11, -12)], 11, 10).unwrap();
        assert_eq!(t.weight, 0);
        assert_eq!(t.inf().leading_exponent(), Some(-5));
        assert_eq!(t.at(Cusp::Zero).unwrap().leading_exponent(), Some(5));
        let (c, img) = EtaQuotient::new(&[(1, 12), (11, -12)]).fricke(11).unwrap();
        assert_eq!(c, Rational::from(1771561));
        assert_eq!(img, EtaQuotient::new(&[(1, -12), (11, 12)]));
    }

    #[test]
    fn fricke_is_an_involution_up_to_sign() {
        for r in [vec![(1u64, 2i64), (11, 2)], vec![(1, 12), (11, -12)], vec![(1, 4), (23, 4)]] {
            let q = EtaQuotient::new(&r);
            let n = r.iter().map(|x| x.0).max().unwrap();
            let (c1, img) = q.fricke(n).unwrap();
            let (c2, back) = img.fricke(n).unwrap();
            assert_eq!(back, q);
            let k = q.weight().unwrap();
            assert_eq!(c1 * c2, Rational::from(if k % 2 == 0 { 1 } else { -1 }));
        }
    }

    #[test]
    fn e11_expansions() {
        let e = eisenstein_en(11, 5).unwrap();
        assert_eq!(ints(e.inf(), 0, 3), vec![-10, -24, -72, -96]);
        let z = e.at(Cusp::Zero).unwrap();
        assert_eq!(z.coeff(0), Some(Rational::from((10, 11))));
        assert_eq!(z.coeff(1), Some(Rational::from((24, 11))));
        assert_eq!(z.order(), 5);
    }

    #[test]
    fn bad_eta_index() {
        assert!(matches!(eta_quotient(&[(3, 2)], 11, 5), Err(Error::BadEtaIndex(_))));
        assert!(matches!(eta_quotient(&[(1, 1)], 1, 5), Err(Error::BadEtaIndex(_))));
    }
}
