//! Truncated Laurent series in `q^(1/denom)`.
//!
//! A series stores coefficients for every exponent `n/denom` with
//! `valuation <= n <= order`; everything above `order` is unknown.
//! Exponents are kept as integer numerators over the common denominator.

use std::fmt;

use rug::{Complex, Rational};

use crate::error::{Error, Result};
use crate::numeric::{bits, digits_of, fmt_complex, fmt_rational, parse_complex_pair, parse_rational};

/// Coefficient ring for [`QSeries`].
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync {
    /// Shared context (precision for floats, nothing for exact values).
    type Ctx: Copy + fmt::Debug + PartialEq + Eq + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self {
        Self::from_rational(&Rational::from(1), ctx)
    }
    fn from_rational(q: &Rational, ctx: Self::Ctx) -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn sub_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self);
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn scale(&self, q: &Rational) -> Self;
    fn to_complex(&self, prec: u32) -> Complex;
    fn to_text(&self) -> String;
    /// Domain tag used in the series text format.
    fn domain_tag(ctx: Self::Ctx) -> String;
}

impl Coeff for Rational {
    type Ctx = ();

    fn ctx(&self) {}
    fn zero(_: ()) -> Self {
        Rational::new()
    }
    fn from_rational(q: &Rational, _: ()) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        *self.numer() == 0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
    fn mul(&self, other: &Self) -> Self {
        Rational::from(self * other)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += Rational::from(a * b);
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn inv(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(Rational::from(self.recip_ref()))
        }
    }
    fn scale(&self, q: &Rational) -> Self {
        Rational::from(self * q)
    }
    fn to_complex(&self, prec: u32) -> Complex {
        crate::numeric::rat_to_complex(self, prec)
    }
    fn to_text(&self) -> String {
        fmt_rational(self)
    }
    fn domain_tag(_: ()) -> String {
        "exact".to_string()
    }
}

/// Binary precision of a float coefficient domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Prec(pub u32);

impl Prec {
    pub fn from_digits(digits: u32) -> Self {
        Prec(bits(digits))
    }
    pub fn digits(self) -> u32 {
        digits_of(self.0)
    }
}

impl Coeff for Complex {
    type Ctx = Prec;

    fn ctx(&self) -> Prec {
        Prec(self.prec().0)
    }
    fn zero(ctx: Prec) -> Self {
        Complex::new(ctx.0)
    }
    fn from_rational(q: &Rational, ctx: Prec) -> Self {
        crate::numeric::rat_to_complex(q, ctx.0)
    }
    fn is_zero(&self) -> bool {
        self.real().is_zero() && self.imag().is_zero()
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
    fn mul(&self, other: &Self) -> Self {
        Complex::with_val(self.prec(), self * other)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn neg(&self) -> Self {
        Complex::with_val(self.prec(), -self)
    }
    fn conj(&self) -> Self {
        Complex::with_val(self.prec(), self.conj_ref())
    }
    fn inv(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(Complex::with_val(self.prec(), self.recip_ref()))
        }
    }
    fn scale(&self, q: &Rational) -> Self {
        let mut z = self.clone();
        z *= q;
        z
    }
    fn to_complex(&self, prec: u32) -> Complex {
        Complex::with_val(prec, self)
    }
    fn to_text(&self) -> String {
        fmt_complex(self, digits_of(self.prec().0) as usize)
    }
    fn domain_tag(ctx: Prec) -> String {
        format!("float {}", ctx.0)
    }
}

/// Exact rational series.
pub type ExactSeries = QSeries<Rational>;
/// Complex floating series at a fixed working precision.
pub type FloatSeries = QSeries<Complex>;

/// A truncated Laurent series `sum c_n q^(n/denom)`, known for `valuation <= n <= order`.
#[derive(Clone, Debug)]
pub struct QSeries<C: Coeff> {
    ctx: C::Ctx,
    valuation: i64,
    order: i64,
    denom: u32,
    coeffs: Vec<C>,
}

impl<C: Coeff> QSeries<C> {
    /// Build from a dense coefficient vector starting at `valuation`.
    ///
    /// Missing entries up to `order` are filled with zeros; extra entries are dropped.
    pub fn from_dense(
        ctx: C::Ctx,
        denom: u32,
        valuation: i64,
        mut coeffs: Vec<C>,
        order: i64,
    ) -> Result<Self> {
        if denom == 0 {
            return Err(Error::DomainError("exponent denominator must be positive".into()));
        }
        if order < valuation {
            return Err(Error::EmptyWindow { valuation, order });
        }
        let len = (order - valuation + 1) as usize;
        coeffs.truncate(len);
        coeffs.resize(len, C::zero(ctx));
        Ok(QSeries {
            ctx,
            valuation,
            order,
            denom,
            coeffs,
        })
    }

    /// Build from sparse `(exponent numerator, value)` terms; terms above `order` are ignored.
    pub fn from_terms<I>(ctx: C::Ctx, denom: u32, valuation: i64, order: i64, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, C)>,
    {
        let mut s = Self::zero(ctx, denom, valuation, order)?;
        for (n, c) in terms {
            if n < valuation {
                return Err(Error::DomainError(format!(
                    "term exponent {n} below valuation {valuation}"
                )));
            }
            if n <= order {
                s.coeffs[(n - valuation) as usize].add_assign(&c);
            }
        }
        Ok(s)
    }

    pub fn zero(ctx: C::Ctx, denom: u32, valuation: i64, order: i64) -> Result<Self> {
        Self::from_dense(ctx, denom, valuation, Vec::new(), order)
    }

    /// The constant series `1 + O(q^(order+1))`.
    pub fn one(ctx: C::Ctx, order: i64) -> Result<Self> {
        Self::from_terms(ctx, 1, 0, order, [(0, C::one(ctx))])
    }

    /// The monomial `c q^(n/denom)` known to `order`.
    pub fn monomial(ctx: C::Ctx, denom: u32, n: i64, c: C, order: i64) -> Result<Self> {
        Self::from_terms(ctx, denom, n, order, [(n, c)])
    }

    pub fn ctx(&self) -> C::Ctx {
        self.ctx
    }
    pub fn valuation(&self) -> i64 {
        self.valuation
    }
    pub fn order(&self) -> i64 {
        self.order
    }
    pub fn denom(&self) -> u32 {
        self.denom
    }
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient at exponent numerator `n`, `None` when beyond the known window.
    pub fn coeff(&self, n: i64) -> Option<C> {
        if n > self.order {
            None
        } else if n < self.valuation {
            Some(C::zero(self.ctx))
        } else {
            Some(self.coeffs[(n - self.valuation) as usize].clone())
        }
    }

    /// Like [`coeff`](Self::coeff) but treats the unknown tail as an error.
    pub fn coeff_known(&self, n: i64) -> Result<C> {
        self.coeff(n).ok_or(Error::InsufficientCoefficients {
            needed: n,
            have: self.order,
        })
    }

    pub fn coeff_ref(&self, n: i64) -> Option<&C> {
        if n < self.valuation || n > self.order {
            None
        } else {
            Some(&self.coeffs[(n - self.valuation) as usize])
        }
    }

    /// Iterate `(n, c_n)` over the stored window.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        let v = self.valuation;
        self.coeffs.iter().enumerate().map(move |(i, c)| (v + i as i64, c))
    }

    /// Exponent numerator of the first nonzero coefficient.
    pub fn leading_exponent(&self) -> Option<i64> {
        self.terms().find(|(_, c)| !c.is_zero()).map(|(n, _)| n)
    }

    /// Drop leading zero coefficients (the window's top is unchanged).
    pub fn trimmed(&self) -> Self {
        match self.leading_exponent() {
            Some(n) if n > self.valuation => {
                let skip = (n - self.valuation) as usize;
                QSeries {
                    ctx: self.ctx,
                    valuation: n,
                    order: self.order,
                    denom: self.denom,
                    coeffs: self.coeffs[skip..].to_vec(),
                }
            }
            _ => self.clone(),
        }
    }

    /// Lower the known window to `order` (no-op if already lower).
    pub fn truncate(&self, order: i64) -> Result<Self> {
        if order >= self.order {
            return Ok(self.clone());
        }
        Self::from_dense(self.ctx, self.denom, self.valuation, self.coeffs.clone(), order)
    }

    /// Extend the stored window downwards to `valuation` with explicit zeros.
    pub fn with_valuation(&self, valuation: i64) -> Self {
        if valuation >= self.valuation {
            return self.clone();
        }
        let mut coeffs = vec![C::zero(self.ctx); (self.valuation - valuation) as usize];
        coeffs.extend(self.coeffs.iter().cloned());
        QSeries {
            ctx: self.ctx,
            valuation,
            order: self.order,
            denom: self.denom,
            coeffs,
        }
    }

    /// Rewrite over a denominator that is a multiple of the current one.
    pub fn rescale(&self, denom: u32) -> Result<Self> {
        if !denom.is_multiple_of(self.denom) {
            return Err(Error::DenomMismatch(self.denom, denom));
        }
        let r = i64::from(denom / self.denom);
        if r == 1 {
            return Ok(self.clone());
        }
        let terms = self.terms().map(|(n, c)| (n * r, c.clone()));
        Self::from_terms(self.ctx, denom, self.valuation * r, self.order * r, terms)
    }

    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        let d = lcm(self.denom, other.denom);
        Ok((self.rescale(d)?, other.rescale(d)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_signed(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_signed(other, true)
    }

    fn add_signed(&self, other: &Self, negate: bool) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let v = a.valuation.min(b.valuation);
        let m = a.order.min(b.order);
        let mut out = a.with_valuation(v).truncate(m)?;
        if m < v {
            return Err(Error::EmptyWindow { valuation: v, order: m });
        }
        for (n, c) in b.terms() {
            if n > m {
                break;
            }
            let slot = &mut out.coeffs[(n - v) as usize];
            if negate {
                slot.sub_assign(c);
            } else {
                slot.add_assign(c);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        self.map(|c| c.scale(q))
    }

    /// Multiply every coefficient by a ring element.
    pub fn scale_by(&self, s: &C) -> Self {
        self.map(|c| c.mul(s))
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        QSeries {
            ctx: self.ctx,
            valuation: self.valuation,
            order: self.order,
            denom: self.denom,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Multiply by `q^(shift/denom)`.
    pub fn shift(&self, shift: i64) -> Self {
        QSeries {
            ctx: self.ctx,
            valuation: self.valuation + shift,
            order: self.order + shift,
            denom: self.denom,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Cauchy product; known to `min(M_a + v_b, M_b + v_a)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let v = a.valuation + b.valuation;
        let m = (a.order + b.valuation).min(b.order + a.valuation);
        let mut out = Self::zero(a.ctx, a.denom, v, m)?;
        for (i, ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let ni = a.valuation + i as i64;
            for (j, cb) in b.coeffs.iter().enumerate() {
                let n = ni + b.valuation + j as i64;
                if n > m {
                    break;
                }
                out.coeffs[(n - v) as usize].add_mul(ca, cb);
            }
        }
        Ok(out)
    }

    /// Multiplicative inverse; the result is known to `order - 2 * valuation`.
    pub fn invert(&self) -> Result<Self> {
        let a = self.trimmed();
        let lead = a.coeffs.first().ok_or(Error::NotAUnit)?;
        let inv0 = lead.inv().ok_or(Error::NotAUnit)?;
        let v = -a.valuation;
        let m = a.order - 2 * a.valuation;
        if m < v {
            return Err(Error::EmptyWindow { valuation: v, order: m });
        }
        let len = (m - v + 1) as usize;
        let mut out: Vec<C> = Vec::with_capacity(len);
        out.push(inv0.clone());
        for k in 1..len {
            let mut s = C::zero(a.ctx);
            for i in 1..=k.min(a.coeffs.len() - 1) {
                s.add_mul(&a.coeffs[i], &out[k - i]);
            }
            out.push(s.mul(&inv0).neg());
        }
        Self::from_dense(a.ctx, a.denom, v, out, m)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.invert()?)
    }

    /// Integer power by repeated squaring; negative powers go through [`invert`](Self::invert).
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.invert()?.pow(-e);
        }
        let mut result = Self::one(self.ctx, self.order - self.valuation)?.rescale(self.denom)?;
        result = result.truncate((self.order - self.valuation).max(0))?;
        let mut base = self.clone();
        let mut e = e;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result.mul(&base)? };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// `theta = q d/dq`: the coefficient at exponent `n/denom` is multiplied by `n/denom`.
    pub fn theta(&self) -> Self {
        let d = i64::from(self.denom);
        QSeries {
            ctx: self.ctx,
            valuation: self.valuation,
            order: self.order,
            denom: self.denom,
            coeffs: self
                .terms()
                .map(|(n, c)| c.scale(&Rational::from((n, d))))
                .collect(),
        }
    }

    /// Substitute `q -> q^m` (the operator `V_m`); known to `m * (order + 1) - 1`.
    pub fn substitute_power(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::DomainError("V_m needs m >= 1".into()));
        }
        let m = i64::from(m);
        let terms = self.terms().map(|(n, c)| (n * m, c.clone()));
        Self::from_terms(self.ctx, self.denom, self.valuation * m, m * (self.order + 1) - 1, terms)
    }

    /// Semantic equality: same denominator and order, same coefficients over the union window.
    pub fn same_as(&self, other: &Self) -> bool {
        if self.denom != other.denom || self.order != other.order || self.ctx != other.ctx {
            return false;
        }
        let v = self.valuation.min(other.valuation);
        (v..=self.order).all(|n| self.coeff(n) == other.coeff(n))
    }

    /// Convert the coefficient domain.
    pub fn convert<D: Coeff>(&self, ctx: D::Ctx, f: impl Fn(&C) -> D) -> QSeries<D> {
        QSeries {
            ctx,
            valuation: self.valuation,
            order: self.order,
            denom: self.denom,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Promote to complex floats at `digits` decimal digits.
    pub fn to_float(&self, digits: u32) -> FloatSeries {
        let prec = Prec::from_digits(digits);
        self.convert(prec, |c| c.to_complex(prec.0))
    }

    /// Text form: a header line, then one `n value` line per stored exponent.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "qseries denom {} valuation {} order {} domain {}\n",
            self.denom,
            self.valuation,
            self.order,
            C::domain_tag(self.ctx)
        );
        for (n, c) in self.terms() {
            s.push_str(&format!("{n} {}\n", c.to_text().replace(',', " ")));
        }
        s
    }
}

impl<C: Coeff> PartialEq for QSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl<C: Coeff> fmt::Display for QSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let e = if self.denom == 1 {
                n.to_string()
            } else {
                fmt_rational(&Rational::from((n, i64::from(self.denom))))
            };
            write!(f, "({})*q^{e}", c.to_text())?;
        }
        if first {
            write!(f, "0")?;
        }
        let top = if self.denom == 1 {
            (self.order + 1).to_string()
        } else {
            fmt_rational(&Rational::from((self.order + 1, i64::from(self.denom))))
        };
        write!(f, " + O(q^{top})")
    }
}

impl ExactSeries {
    /// Parse the text produced by [`QSeries::to_text`] for an exact series.
    pub fn from_text(text: &str) -> Result<Self> {
        let (hdr, body) = parse_header(text)?;
        if hdr.domain != "exact" {
            return Err(Error::parse(1, 1, "expected an exact series"));
        }
        let mut terms = Vec::new();
        for (line_no, line) in body {
            let (n, v) = split_term(line, line_no)?;
            let q = parse_rational(v).ok_or_else(|| Error::parse(line_no, 1, "bad rational"))?;
            terms.push((n, q));
        }
        QSeries::from_terms((), hdr.denom, hdr.valuation, hdr.order, terms)
    }
}

impl FloatSeries {
    /// Parse the text produced by [`QSeries::to_text`] for a float series.
    pub fn from_text(text: &str) -> Result<Self> {
        let (hdr, body) = parse_header(text)?;
        let prec = hdr
            .domain
            .strip_prefix("float ")
            .and_then(|p| p.parse::<u32>().ok())
            .ok_or_else(|| Error::parse(1, 1, "expected a float series"))?;
        let mut terms = Vec::new();
        for (line_no, line) in body {
            let (n, v) = split_term(line, line_no)?;
            let pair = v.trim().replacen(' ', ",", 1);
            let z = parse_complex_pair(&pair, prec)
                .ok_or_else(|| Error::parse(line_no, 1, "bad complex value"))?;
            terms.push((n, z));
        }
        QSeries::from_terms(Prec(prec), hdr.denom, hdr.valuation, hdr.order, terms)
    }
}

struct Header {
    denom: u32,
    valuation: i64,
    order: i64,
    domain: String,
}

fn parse_header(text: &str) -> Result<(Header, Vec<(usize, &str)>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| Error::parse(1, 1, "empty input"))?;
    let tok: Vec<&str> = first.split_whitespace().collect();
    let bad = || Error::parse(1, 1, "malformed qseries header");
    if tok.len() < 8
        || tok[0] != "qseries"
        || tok[1] != "denom"
        || tok[3] != "valuation"
        || tok[5] != "order"
        || tok[7] != "domain"
    {
        return Err(bad());
    }
    let hdr = Header {
        denom: tok[2].parse().map_err(|_| bad())?,
        valuation: tok[4].parse().map_err(|_| bad())?,
        order: tok[6].parse().map_err(|_| bad())?,
        domain: tok[8..].join(" "),
    };
    let body = lines.filter(|(_, l)| !l.trim().is_empty()).collect();
    Ok((hdr, body))
}

fn split_term(line: &str, line_no: usize) -> Result<(i64, &str)> {
    let line = line.trim();
    let (n, v) = line
        .split_once(' ')
        .ok_or_else(|| Error::parse(line_no, 1, "expected `n value`"))?;
    let n = n
        .parse::<i64>()
        .map_err(|_| Error::parse(line_no, 1, "bad exponent"))?;
    Ok((n, v))
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    (u64::from(a) / gcd(u64::from(a), u64::from(b)) * u64::from(b)) as u32
}
