//! Hecke eigen-analysis of weight-2 cusp form spaces from ingested bases.

use std::collections::BTreeMap;
use std::fmt;

use rug::{Complex, Integer, Rational};

use crate::classical_forms::FormExpansion;
use crate::error::{Error, Result};
use crate::mfcoeffs::MfcFile;
use crate::numeric::{bits, to_c64, C64};
use crate::operators::{hecke_t, HeckeConvention};
use crate::pairing::{petersson_norm, SeriesTiles};
use crate::qseries::QSeries;

/// An echelonized exact basis of `S_2(Gamma_0(N))`.
#[derive(Clone, Debug)]
pub struct CuspBasis {
    pub level: u64,
    pub weight: i32,
    pub dim: usize,
    /// Basis `i` has `a(n) = delta_{i+1, n}` for `n <= dim`.
    pub forms: Vec<FormExpansion<Rational>>,
    pub n_max: i64,
    pub echelon: bool,
    pub provenance: String,
}

/// Parse an `mfcoeffs` file and echelonize it.
pub fn ingest_basis(text: &str) -> Result<CuspBasis> {
    let file = MfcFile::parse(text)?;
    let forms = file.exact_forms()?;
    CuspBasis::from_forms(forms, &file.provenance.join("; "))
}

fn combine(forms: &[FormExpansion<Rational>], coeffs: &[Rational]) -> Result<FormExpansion<Rational>> {
    let mut acc: Option<FormExpansion<Rational>> = None;
    for (f, c) in forms.iter().zip(coeffs) {
        if *c == 0 {
            continue;
        }
        let t = f.scale(c);
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t)?,
        });
    }
    acc.map_or_else(|| Ok(forms[0].scale(&Rational::new())), Ok)
}

impl CuspBasis {
    pub fn from_forms(forms: Vec<FormExpansion<Rational>>, provenance: &str) -> Result<Self> {
        let d = forms.len();
        let first = forms.first().ok_or_else(|| Error::BadBasis("empty basis".into()))?;
        let (level, weight) = (first.level, first.weight);
        if forms.iter().any(|f| f.level != level || f.weight != weight) {
            return Err(Error::BadBasis("mixed levels or weights".into()));
        }
        let n_max = forms.iter().map(|f| f.inf().order()).min().unwrap_or(0);
        if n_max < d as i64 {
            return Err(Error::InsufficientCoefficients { needed: d as i64, have: n_max });
        }
        // rows: coefficient vectors at infinity; track the transform applied
        let mut rows: Vec<Vec<Rational>> = forms.iter().map(|f| (1..=n_max).map(|n| f.inf().coeff(n).unwrap_or_default()).collect()).collect();
        let mut tr: Vec<Vec<Rational>> = (0..d).map(|i| (0..d).map(|j| Rational::from(u32::from(i == j))).collect()).collect();
        let mut r = 0;
        let mut pivots = Vec::new();
        for c in 0..n_max as usize {
            if r == d {
                break;
            }
            let Some(p) = (r..d).find(|&i| rows[i][c] != 0) else { continue };
            rows.swap(r, p);
            tr.swap(r, p);
            let inv = Rational::from(rows[r][c].recip_ref());
            for v in rows[r].iter_mut().chain(tr[r].iter_mut()) {
                *v *= &inv;
            }
            for i in 0..d {
                if i != r && rows[i][c] != 0 {
                    let f = rows[i][c].clone();
                    for j in 0..rows[i].len() {
                        let s = Rational::from(&f * &rows[r][j]);
                        rows[i][j] -= s;
                    }
                    for j in 0..d {
                        let s = Rational::from(&f * &tr[r][j]);
                        tr[i][j] -= s;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        if r < d {
            return Err(Error::BadBasis(format!("rank {r} < declared dimension {d}")));
        }
        if pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return Err(Error::BadBasis(format!("pivot columns {pivots:?} are not 1..{d}")));
        }
        let ech = tr.iter().map(|t| combine(&forms, t)).collect::<Result<Vec<_>>>()?;
        Ok(CuspBasis {
            level,
            weight,
            dim: d,
            forms: ech,
            n_max,
            echelon: true,
            provenance: provenance.to_string(),
        })
    }

    pub fn coeff(&self, i: usize, n: i64) -> Rational {
        self.forms[i].inf().coeff(n).unwrap_or_default()
    }
}

pub type RatMatrix = Vec<Vec<Rational>>;

/// Matrix of normalized `T_m`: row `i` holds the coordinates of `f_i | T_m`.
pub fn hecke_matrix(b: &CuspBasis, m: u64) -> Result<RatMatrix> {
    let d = b.dim;
    let need = m as i64 * d as i64;
    if b.n_max < need {
        return Err(Error::InsufficientCoefficients { needed: need, have: b.n_max });
    }
    let mut out = Vec::with_capacity(d);
    for f in &b.forms {
        let t = hecke_t(f.inf(), m, b.weight, b.level, HeckeConvention::Normalized)?;
        let row: Vec<Rational> = (1..=d as i64).map(|n| t.coeff(n).unwrap_or_default()).collect();
        for n in d as i64 + 1..=t.order() {
            let mut s = Rational::new();
            for (j, c) in row.iter().enumerate() {
                s += Rational::from(c * &b.coeff(j, n));
            }
            if s != t.coeff(n).unwrap_or_default() {
                return Err(Error::BadBasis(format!("T_{m} image leaves the span at n = {n}")));
            }
        }
        out.push(row);
    }
    Ok(out)
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Rational::new(), |s, k| s + Rational::from(&a[i][k] * &b[k][j])))
                .collect()
        })
        .collect()
}

/// `a + b sqrt(d)` with rational `a, b` and squarefree `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    pub a: Rational,
    pub b: Rational,
    pub d: Integer,
}

fn squarefree_part(n: &Integer) -> (Integer, Integer) {
    let mut core = Integer::from(n.signum_ref());
    let mut sq = Integer::from(1);
    let mut m = Integer::from(n.abs_ref());
    let mut p = Integer::from(2);
    while Integer::from(&p * &p) <= m {
        let mut e = 0;
        while m.is_divisible(&p) {
            m /= &p;
            e += 1;
        }
        if e % 2 == 1 {
            core *= &p;
        }
        for _ in 0..e / 2 {
            sq *= &p;
        }
        p += 1;
    }
    core *= m;
    (core, sq)
}

impl Quad {
    pub fn rational(a: Rational) -> Self {
        Quad { a, b: Rational::new(), d: Integer::from(1) }
    }

    /// `(t + u sqrt(disc)) / 2`, reduced to a squarefree radicand.
    pub fn from_disc(t: Rational, u: Rational, disc: &Integer) -> Self {
        let (core, sq) = squarefree_part(disc);
        let a = t / 2u32;
        let b = (u * sq) / 2u32;
        if core == 1 {
            return Quad::rational(a + b);
        }
        if core == 0 {
            return Quad::rational(a);
        }
        Quad { a, b, d: core }
    }

    fn field(&self, o: &Quad) -> Integer {
        if self.b == 0 {
            o.d.clone()
        } else {
            self.d.clone()
        }
    }

    fn check(&self, o: &Quad) {
        assert!(self.b == 0 || o.b == 0 || self.d == o.d, "quadratic numbers from different fields");
    }

    pub fn add(&self, o: &Quad) -> Quad {
        self.check(o);
        Quad { a: Rational::from(&self.a + &o.a), b: Rational::from(&self.b + &o.b), d: self.field(o) }.norm_rep()
    }

    pub fn neg(&self) -> Quad {
        Quad { a: Rational::from(-&self.a), b: Rational::from(-&self.b), d: self.d.clone() }
    }

    pub fn sub(&self, o: &Quad) -> Quad {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Quad) -> Quad {
        self.check(o);
        let d = self.field(o);
        let a = Rational::from(&self.a * &o.a) + Rational::from(&self.b * &o.b) * &d;
        let b = Rational::from(&self.a * &o.b) + Rational::from(&self.b * &o.a);
        Quad { a, b, d }.norm_rep()
    }

    pub fn conj(&self) -> Quad {
        Quad { a: self.a.clone(), b: Rational::from(-&self.b), d: self.d.clone() }
    }

    pub fn norm(&self) -> Rational {
        Rational::from(&self.a * &self.a) - Rational::from(&self.b * &self.b) * &self.d
    }

    pub fn inv(&self) -> Option<Quad> {
        let n = self.norm();
        if n == 0 {
            return None;
        }
        let c = self.conj();
        Some(Quad { a: Rational::from(&c.a / &n), b: Rational::from(&c.b / &n), d: c.d }.norm_rep())
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    fn norm_rep(self) -> Quad {
        if self.b == 0 {
            Quad { d: Integer::from(1), ..self }
        } else {
            self
        }
    }

    pub fn to_c64(&self) -> C64 {
        let d = self.d.to_f64();
        let r = if d >= 0.0 { C64::new(d.sqrt(), 0.0) } else { C64::new(0.0, (-d).sqrt()) };
        C64::new(self.a.to_f64(), 0.0) + r * self.b.to_f64()
    }
}

impl fmt::Display for Quad {
    /// `(t + u*sqrt(d))/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = crate::numeric::fmt_rational(&Rational::from(&self.a * 2u32));
        if self.b == 0 {
            return write!(f, "({t})/2");
        }
        let u = crate::numeric::fmt_rational(&Rational::from(&self.b * 2u32));
        write!(f, "({t} + {u}*sqrt({}))/2", self.d)
    }
}

/// Exact quadratic or floating scalar.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Quad),
    Float(C64),
}

impl Scalar {
    pub fn to_c64(&self) -> C64 {
        match self {
            Scalar::Exact(q) => q.to_c64(),
            Scalar::Float(z) => *z,
        }
    }

    pub fn from_rational(q: &Rational, exact: bool) -> Self {
        if exact {
            Scalar::Exact(Quad::rational(q.clone()))
        } else {
            Scalar::Float(C64::new(q.to_f64(), 0.0))
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.add(b)),
            _ => Scalar::Float(self.to_c64() + o.to_c64()),
        }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.sub(b)),
            _ => Scalar::Float(self.to_c64() - o.to_c64()),
        }
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
            _ => Scalar::Float(self.to_c64() * o.to_c64()),
        }
    }

    pub fn div(&self, o: &Scalar) -> Option<Scalar> {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => b.inv().map(|i| Scalar::Exact(a.mul(&i))),
            _ => {
                let z = o.to_c64();
                (z.norm() > 0.0).then(|| Scalar::Float(self.to_c64() / z))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(z) => z.norm() == 0.0,
        }
    }

    /// Exact equality, or agreement to `tol` relative for floats.
    pub fn close(&self, o: &Scalar, tol: f64) -> bool {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.to_c64() - o.to_c64()).norm() <= tol * (1.0 + self.to_c64().norm()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Float(z) => write!(f, "{:.15e} {:.15e}", z.re, z.im),
        }
    }
}

/// A normalized eigenform: coordinates in the echelon basis with `a(1) = 1`.
#[derive(Clone, Debug)]
pub struct Eigenform {
    pub vector: Vec<Scalar>,
}

impl Eigenform {
    /// `a(n)` of the eigenform.
    pub fn coeff(&self, b: &CuspBasis, n: i64) -> Scalar {
        let exact = matches!(self.vector[0], Scalar::Exact(_));
        self.vector
            .iter()
            .enumerate()
            .fold(Scalar::from_rational(&Rational::new(), exact), |s, (i, v)| s.add(&v.mul(&Scalar::from_rational(&b.coeff(i, n), exact))))
    }

    /// Float expansion at both cusps.
    pub fn float_form(&self, b: &CuspBasis, digits: u32) -> Result<FormExpansion<Complex>> {
        let p = bits(digits);
        let mut exps = Vec::new();
        for (c, _) in &b.forms[0].expansions {
            let mut acc: Option<QSeries<Complex>> = None;
            for (i, v) in self.vector.iter().enumerate() {
                let z = v.to_c64();
                let s = b.forms[i].at(*c).expect("basis forms share cusps").to_float(digits);
                let s = s.map(|x| Complex::with_val(p, x * Complex::with_val(p, (z.re, z.im))));
                acc = Some(match acc {
                    None => s,
                    Some(a) => a.add(&s)?,
                });
            }
            exps.push((*c, acc.expect("nonempty basis")));
        }
        FormExpansion::new(b.weight, b.level, exps, format!("eigenform of {}", b.provenance))
    }
}

/// Simultaneous eigenforms with their Hecke eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub level: u64,
    pub exact: bool,
    pub forms: Vec<Eigenform>,
    pub lambdas: BTreeMap<u64, Vec<Scalar>>,
}

fn row_times(v: &[Scalar], m: &RatMatrix, exact: bool) -> Vec<Scalar> {
    let d = v.len();
    (0..d)
        .map(|j| (0..d).fold(Scalar::from_rational(&Rational::new(), exact), |s, i| s.add(&v[i].mul(&Scalar::from_rational(&m[i][j], exact)))))
        .collect()
}

/// `lambda` with `v M = lambda v`, checked on every coordinate.
fn eigenvalue_of(v: &[Scalar], m: &RatMatrix, exact: bool, tol: f64) -> Result<Scalar> {
    let w = row_times(v, m, exact);
    let lam = w[0].div(&v[0]).ok_or_else(|| Error::EigenFailure("eigenvector has a(1) = 0".into()))?;
    for (wi, vi) in w.iter().zip(v) {
        if !wi.close(&lam.mul(vi), tol) {
            return Err(Error::EigenFailure("vector is not an eigenvector of every probe".into()));
        }
    }
    Ok(lam)
}

fn exact_eigenvectors(m: &RatMatrix) -> Option<Vec<Vec<Scalar>>> {
    match m.len() {
        1 => Some(vec![vec![Scalar::Exact(Quad::rational(Rational::from(1)))]]),
        2 => {
            let (a, b, c, d) = (&m[0][0], &m[0][1], &m[1][0], &m[1][1]);
            let tr = Rational::from(a + d);
            let det = Rational::from(a * d) - Rational::from(b * c);
            let disc = Rational::from(&tr * &tr) - Rational::from(&det * 4u32);
            if disc == 0 {
                return None;
            }
            // scale the discriminant to an integer: sqrt(p/q) = sqrt(pq)/q
            let (p, q) = disc.into_numer_denom();
            let rad = Integer::from(&p * &q);
            let mut out = Vec::new();
            for sign in [1i32, -1] {
                let u = Rational::from((Integer::from(sign), q.clone()));
                let lam = Quad::from_disc(tr.clone(), u, &rad);
                let one = |r: &Rational| Quad::rational(r.clone());
                let v = if *c != 0 {
                    vec![one(c), lam.sub(&one(a))]
                } else if *b != 0 {
                    if lam == one(a) {
                        vec![one(&Rational::from(a - d)), one(b)]
                    } else {
                        vec![Quad::rational(Rational::new()), one(&Rational::from(1))]
                    }
                } else if lam == one(a) {
                    vec![one(&Rational::from(1)), Quad::rational(Rational::new())]
                } else {
                    vec![Quad::rational(Rational::new()), one(&Rational::from(1))]
                };
                let inv = v[0].inv()?;
                out.push(v.iter().map(|x| Scalar::Exact(x.mul(&inv))).collect());
            }
            Some(out)
        }
        _ => None,
    }
}

fn float_eigenvectors(m: &RatMatrix) -> Result<Vec<Vec<Scalar>>> {
    let d = m.len();
    let mt = nalgebra::DMatrix::<f64>::from_fn(d, d, |i, j| m[j][i].to_f64());
    let eig = mt.complex_eigenvalues();
    let mut out = Vec::new();
    for k in 0..d {
        let lam = eig[k];
        for other in 0..k {
            if (eig[other] - lam).norm() < 1e-9 * (1.0 + lam.norm()) {
                return Err(Error::EigenFailure("repeated eigenvalue in the probe combination".into()));
            }
        }
        // inverse iteration on M^T - lambda
        let shift = lam + C64::new(1e-10 * (1.0 + lam.norm()), 0.0);
        let a: Vec<Vec<C64>> = (0..d).map(|i| (0..d).map(|j| C64::new(mt[(i, j)], 0.0) - if i == j { shift } else { C64::new(0.0, 0.0) }).collect()).collect();
        let mut x: Vec<C64> = (0..d).map(|i| C64::new(1.0 + i as f64 * 0.37, 0.1 * i as f64)).collect();
        for _ in 0..3 {
            x = crate::thirdkind::solve_complex(&a, &x).map_err(|_| Error::EigenFailure("inverse iteration failed".into()))?;
            let n = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            x.iter_mut().for_each(|v| *v /= n);
        }
        let x0 = x[0];
        if x0.norm() < 1e-12 {
            return Err(Error::EigenFailure("eigenvector has a(1) = 0".into()));
        }
        out.push(x.iter().map(|v| Scalar::Float(v / x0)).collect());
    }
    Ok(out)
}

/// Simultaneous eigenforms of the probe operators, normalized to `a(1) = 1`.
///
/// Exact over a quadratic field when `dim <= 2` and `force_float` is off.
pub fn eigensystem(b: &CuspBasis, probes: &[u64], force_float: bool) -> Result<EigenSystem> {
    let mats = probes.iter().map(|&m| Ok((m, hecke_matrix(b, m)?))).collect::<Result<Vec<_>>>()?;
    for (i, (m1, a)) in mats.iter().enumerate() {
        for (m2, c) in &mats[i + 1..] {
            if mat_mul(a, c) != mat_mul(c, a) {
                return Err(Error::EigenFailure(format!("T_{m1} and T_{m2} do not commute")));
            }
        }
    }
    // generic combination of the probes
    let d = b.dim;
    let mut comb = vec![vec![Rational::new(); d]; d];
    for (k, (_, m)) in mats.iter().enumerate() {
        let w = Rational::from(2 * k as u32 + 1);
        for i in 0..d {
            for j in 0..d {
                comb[i][j] += Rational::from(&w * &m[i][j]);
            }
        }
    }
    let (exact, vecs) = match (force_float, exact_eigenvectors(&comb)) {
        (false, Some(v)) => (true, v),
        _ => (false, float_eigenvectors(&comb)?),
    };
    let tol = if exact { 0.0 } else { 1e-8 };
    let mut lambdas = BTreeMap::new();
    for (m, mat) in &mats {
        let l = vecs.iter().map(|v| eigenvalue_of(v, mat, exact, tol)).collect::<Result<Vec<_>>>()?;
        lambdas.insert(*m, l);
    }
    Ok(EigenSystem {
        level: b.level,
        exact,
        forms: vecs.into_iter().map(|vector| Eigenform { vector }).collect(),
        lambdas,
    })
}

impl EigenSystem {
    /// `lambda_{i,m}` for every eigenform, from the matrix of `T_m`.
    pub fn lambda(&self, b: &CuspBasis, m: u64) -> Result<Vec<Scalar>> {
        if let Some(l) = self.lambdas.get(&m) {
            return Ok(l.clone());
        }
        let mat = hecke_matrix(b, m)?;
        let tol = if self.exact { 0.0 } else { 1e-8 };
        self.forms.iter().map(|f| eigenvalue_of(&f.vector, &mat, self.exact, tol)).collect()
    }

    /// `i,m,re,im` rows.
    pub fn to_csv(&self, b: &CuspBasis, ms: &[u64]) -> Result<String> {
        let mut s = String::from("i,m,re,im\n");
        for &m in ms {
            for (i, l) in self.lambda(b, m)?.iter().enumerate() {
                let z = l.to_c64();
                s.push_str(&format!("{},{m},{:.17e},{:.17e}\n", i + 1, z.re, z.im));
            }
        }
        Ok(s)
    }

    /// Eigenvalues at primes violating `|lambda_p| <= 2 sqrt(p)`.
    pub fn ramanujan_violations(&self, b: &CuspBasis, primes: &[u64]) -> Result<Vec<(usize, u64)>> {
        let mut bad = Vec::new();
        for &p in primes {
            for (i, l) in self.lambda(b, p)?.iter().enumerate() {
                if l.to_c64().norm() > 2.0 * (p as f64).sqrt() + 1e-12 {
                    bad.push((i, p));
                }
            }
        }
        Ok(bad)
    }

    /// Petersson norms `(f_i, f_i)` of the eigenforms.
    pub fn norms(&self, b: &CuspBasis) -> Result<Vec<f64>> {
        self.forms.iter().map(|f| petersson_norm(&SeriesTiles::new(&f.float_form(b, 20)?)?, 2, b.level)).collect()
    }
}

fn solve_scalar(mut a: Vec<Vec<Scalar>>, mut rhs: Vec<Scalar>) -> Result<Vec<Scalar>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n)
            .filter(|&i| !a[i][c].is_zero())
            .max_by(|&i, &j| a[i][c].to_c64().norm().total_cmp(&a[j][c].to_c64().norm()))
            .ok_or(Error::BasisDegenerate)?;
        a.swap(p, c);
        rhs.swap(p, c);
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].div(&a[c][c]).ok_or(Error::BasisDegenerate)?;
                for t in c..n {
                    a[r][t] = a[r][t].sub(&f.mul(&a[c][t]));
                }
                rhs[r] = rhs[r].sub(&f.mul(&rhs[c]));
            }
        }
    }
    (0..n).map(|i| rhs[i].div(&a[i][i]).ok_or(Error::BasisDegenerate)).collect()
}

/// `g = sum beta_i f_i` over the eigenforms, solved on coefficients `1..d` and checked
/// on `d+1..2d`.
pub fn decompose(g: &[Scalar], e: &EigenSystem, b: &CuspBasis) -> Result<Vec<Scalar>> {
    let d = b.dim;
    if g.len() < 2 * d {
        return Err(Error::InsufficientCoefficients { needed: 2 * d as i64, have: g.len() as i64 });
    }
    let a: Vec<Vec<Scalar>> = (1..=d as i64).map(|n| e.forms.iter().map(|f| f.coeff(b, n)).collect()).collect();
    let beta = solve_scalar(a, g[..d].to_vec())?;
    let gnorm = g[..2 * d].iter().map(|v| v.to_c64().norm()).fold(0.0, f64::max);
    let mut residual: f64 = 0.0;
    for n in d + 1..=2 * d {
        let s = e.forms.iter().zip(&beta).fold(C64::new(0.0, 0.0), |s, (f, bi)| s + f.coeff(b, n as i64).to_c64() * bi.to_c64());
        residual = residual.max((s - g[n - 1].to_c64()).norm());
    }
    if residual > 1e-8 * gnorm.max(f64::MIN_POSITIVE) {
        return Err(Error::NotInSpan { residual });
    }
    Ok(beta)
}

/// Coefficients `a(1..=n)` of an exact series as scalars.
pub fn exact_coeffs(g: &QSeries<Rational>, n: usize) -> Vec<Scalar> {
    (1..=n as i64).map(|k| Scalar::Exact(Quad::rational(g.coeff(k).unwrap_or_default()))).collect()
}

/// Coefficients `a(1..=n)` of a float series as scalars.
pub fn float_coeffs(g: &QSeries<Complex>, n: usize) -> Vec<Scalar> {
    (1..=n as i64).map(|k| Scalar::Float(g.coeff(k).map_or(C64::new(0.0, 0.0), |c| to_c64(&c)))).collect()
}

/// `m^{-1} sum_i alpha_i conj(beta_i) lambda_{i,m} (f_i, f_i)`.
pub fn lemma43_expansion(alpha: &[C64], beta: &[C64], norms: &[f64], lambda: &[C64], m: u64) -> Result<C64> {
    let n = alpha.len();
    if beta.len() != n || norms.len() != n || lambda.len() != n {
        return Err(Error::DomainError("lemma43_expansion needs equal-length inputs".into()));
    }
    let s: C64 = (0..n).map(|i| alpha[i] * beta[i].conj() * lambda[i] * norms[i]).sum();
    Ok(s / m as f64)
}

/// Coefficients `a(1..=n)` of `sum beta_i f_i` over the eigenforms.
pub fn synthesize(beta: &[Scalar], e: &EigenSystem, b: &CuspBasis, n: usize) -> Vec<Scalar> {
    (1..=n as i64)
        .map(|k| {
            e.forms
                .iter()
                .zip(beta)
                .fold(Scalar::from_rational(&Rational::new(), e.exact), |s, (f, bi)| s.add(&f.coeff(b, k).mul(bi)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F11: &str = include_str!("../fixtures/s2_gamma0_11.mfc");
    const F23: &str = include_str!("../fixtures/s2_gamma0_23.mfc");
    const F29: &str = include_str!("../fixtures/s2_gamma0_29.mfc");
    const F31: &str = include_str!("../fixtures/s2_gamma0_31.mfc");

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn level_11() {
        let b = ingest_basis(F11).unwrap();
        assert_eq!(b.coeff(0, 1), q(1));
        assert_eq!(b.coeff(0, 2), q(-2));
        assert_eq!(hecke_matrix(&b, 1).unwrap(), vec![vec![q(1)]]);
        assert_eq!(hecke_matrix(&b, 2).unwrap(), vec![vec![q(-2)]]);
        let e = eigensystem(&b, &[2, 3], false).unwrap();
        assert_eq!(e.forms.len(), 1);
        for m in [2u64, 3, 5, 7] {
            assert_eq!(e.lambda(&b, m).unwrap()[0], Scalar::Exact(Quad::rational(b.coeff(0, m as i64))));
        }
        assert!(matches!(hecke_matrix(&b, 11), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn level_23_quadratic() {
        let b = ingest_basis(F23).unwrap();
        for i in 0..2 {
            for n in 1..=2 {
                assert_eq!(b.coeff(i, n), q(i64::from(i as i64 + 1 == n)));
            }
        }
        let m2 = hecke_matrix(&b, 2).unwrap();
        let tr = Rational::from(&m2[0][0] + &m2[1][1]);
        let det = Rational::from(&m2[0][0] * &m2[1][1]) - Rational::from(&m2[0][1] * &m2[1][0]);
        assert_eq!((tr, det), (q(-1), q(-1)));
        let e = eigensystem(&b, &[2, 3, 5, 7, 13], false).unwrap();
        assert!(e.exact);
        let l2 = e.lambda(&b, 2).unwrap();
        assert_eq!(l2[0].mul(&l2[1]), Scalar::Exact(Quad::rational(q(-1))));
        assert_eq!(l2[0].add(&l2[1]), Scalar::Exact(Quad::rational(q(-1))));
        assert_eq!(format!("{}", l2[0]), "(-1 + 1*sqrt(5))/2");
        let (l3, l6, l4) = (e.lambda(&b, 3).unwrap(), e.lambda(&b, 6).unwrap(), e.lambda(&b, 4).unwrap());
        for i in 0..2 {
            assert_eq!(l6[i], l2[i].mul(&l3[i]));
            assert_eq!(l4[i], l2[i].mul(&l2[i]).sub(&Scalar::Exact(Quad::rational(q(2)))));
            // eigenvalues are the eigenform coefficients
            assert_eq!(e.forms[i].coeff(&b, 2), l2[i]);
        }
        assert!(e.ramanujan_violations(&b, &[2, 3, 5, 7, 11, 13, 17, 19]).unwrap().is_empty());
    }

    #[test]
    fn hecke_algebra_on_fixtures() {
        for text in [F11, F23, F29, F31] {
            let b = ingest_basis(text).unwrap();
            let ms = [2u64, 3, 5, 7, 13];
            let mats: Vec<RatMatrix> = ms.iter().map(|&m| hecke_matrix(&b, m).unwrap()).collect();
            for a in &mats {
                for c in &mats {
                    assert_eq!(mat_mul(a, c), mat_mul(c, a));
                }
            }
            let e = eigensystem(&b, &ms, false).unwrap();
            for p in [2u64, 3, 5, 7] {
                if b.level.is_multiple_of(p) {
                    continue;
                }
                let (lp, lp2) = (e.lambda(&b, p).unwrap(), e.lambda(&b, p * p).unwrap());
                for i in 0..b.dim {
                    assert_eq!(lp2[i], lp[i].mul(&lp[i]).sub(&Scalar::Exact(Quad::rational(q(p as i64)))));
                }
            }
            let l10 = e.lambda(&b, 10).unwrap();
            let (l2, l5) = (e.lambda(&b, 2).unwrap(), e.lambda(&b, 5).unwrap());
            for i in 0..b.dim {
                assert_eq!(l10[i], l2[i].mul(&l5[i]));
            }
        }
    }

    #[test]
    fn float_path_agrees_with_exact() {
        let b = ingest_basis(F23).unwrap();
        let ex = eigensystem(&b, &[2, 3], false).unwrap();
        let fl = eigensystem(&b, &[2, 3], true).unwrap();
        assert!(!fl.exact);
        let (le, lf) = (ex.lambda(&b, 5).unwrap(), fl.lambda(&b, 5).unwrap());
        for x in &le {
            assert!(lf.iter().any(|y| (x.to_c64() - y.to_c64()).norm() < 1e-10));
        }
    }

    #[test]
    fn decompositions() {
        let b = ingest_basis(F23).unwrap();
        let e = eigensystem(&b, &[2, 3], false).unwrap();
        let one = Scalar::Exact(Quad::rational(q(1)));
        let zero = Scalar::Exact(Quad::rational(q(0)));
        let g1 = synthesize(&[one.clone(), zero.clone()], &e, &b, 4);
        assert_eq!(decompose(&g1, &e, &b).unwrap(), vec![one.clone(), zero.clone()]);
        let beta = vec![Scalar::Exact(Quad::rational(q(2))), Scalar::Exact(Quad::rational(q(3)))];
        let g = synthesize(&beta, &e, &b, 4);
        assert_eq!(decompose(&g, &e, &b).unwrap(), beta);
        // a rational basis element decomposes over the quadratic field
        let f1 = exact_coeffs(b.forms[0].inf(), 4);
        let bf = decompose(&f1, &e, &b).unwrap();
        assert_eq!(synthesize(&bf, &e, &b, 4), f1);
        let mut off = f1.clone();
        off[3] = off[3].add(&one);
        assert!(matches!(decompose(&off, &e, &b), Err(Error::NotInSpan { .. })));
    }

    #[test]
    fn lemma43_examples() {
        let z = C64::new(0.0, 0.0);
        assert_eq!(lemma43_expansion(&[C64::new(1.0, 0.0)], &[z], &[0.5], &[C64::new(3.0, 0.0)], 2).unwrap(), z);
        let v = lemma43_expansion(&[C64::new(2.0, 1.0)], &[C64::new(0.0, 1.0)], &[0.25], &[C64::new(1.0, 0.0)], 1).unwrap();
        assert!((v - C64::new(2.0, 1.0) * C64::new(0.0, -1.0) * 0.25).norm() < 1e-15);
        assert!(lemma43_expansion(&[z], &[], &[], &[], 1).is_err());
    }

    #[test]
    fn bad_inputs() {
        let text = "format mfcoeffs 1\nlevel 11\nweight 2\ndim 2\nbasis 1 cusp inf part aplus 1 1\nbasis 1 cusp zero part aplus 1 1\nbasis 2 cusp inf part aplus 1 2\nbasis 2 cusp zero part aplus 1 2\n";
        assert!(matches!(ingest_basis(text), Err(Error::InsufficientCoefficients { .. }) | Err(Error::BadBasis(_))));
        let text = "format mfcoeffs 1\nlevel 11\nweight 2\ndim 2\nbasis 1 cusp inf part aplus 1 1\nbasis 1 cusp inf part aplus 2 1\nbasis 1 cusp zero part aplus 1 1\nbasis 2 cusp inf part aplus 1 2\nbasis 2 cusp inf part aplus 2 2\nbasis 2 cusp zero part aplus 1 2\n";
        assert!(matches!(ingest_basis(text), Err(Error::BadBasis(_))));
    }

    #[test]
    fn eigenform_norm_at_level_11() {
        let b = ingest_basis(F11).unwrap();
        let e = eigensystem(&b, &[2], false).unwrap();
        let n = e.norms(&b).unwrap();
        // independent evaluation of the eta product in the same quadrature
        let eta = crate::classical_forms::eta_quotient(&[(1, 2), (11, 2)], 11, 400).unwrap();
        let oracle = petersson_norm(&SeriesTiles::new(&eta).unwrap(), 2, 11).unwrap();
        assert!((n[0] - oracle).abs() < 1e-12 * oracle);
        assert!(n[0] > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn synthesize_then_decompose(a in -50i64..50, bb in -50i64..50, c in -50i64..50, d in -50i64..50) {
            let b = ingest_basis(F29).unwrap();
            let e = eigensystem(&b, &[2, 3], false).unwrap();
            let beta = if let Scalar::Exact(l) = &e.lambda(&b, 2).unwrap()[0] {
                let root = Quad { a: Rational::new(), b: Rational::from(1), d: l.d.clone() };
                let mk = |x: i64, y: i64| Scalar::Exact(Quad::rational(q(x)).add(&Quad::rational(q(y)).mul(&root)));
                vec![mk(a, bb), mk(c, d)]
            } else {
                unreachable!()
            };
            let g = synthesize(&beta, &e, &b, 2 * b.dim);
            prop_assert_eq!(decompose(&g, &e, &b).unwrap(), beta);
        }
    }
}
