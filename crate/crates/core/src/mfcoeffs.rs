//! The `mfcoeffs` v1 coefficient file format.
//!
//! ```text
//! format mfcoeffs 1
//! level 11
//! weight 2
//! dim 1
//! provenance <free text>
//! basis 1 cusp inf part aplus 1 1
//! ```

use std::fmt::Write as _;

use rug::{Complex, Rational};

use crate::classical_forms::{Cusp, FormExpansion};
use crate::error::{Error, Result};
use crate::harmonic::{b_series, HarmonicCusp, HarmonicData};
use crate::numeric::{bits, fmt_rational, parse_float, parse_rational};
use crate::qseries::{Coeff, Prec, QSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    APlus,
    BMinus,
    BZero,
}

impl Part {
    pub fn name(self) -> &'static str {
        match self {
            Part::APlus => "aplus",
            Part::BMinus => "bminus",
            Part::BZero => "bzero",
        }
    }
}

/// A coefficient value: canonical rational or a pair of decimal strings.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float { re: String, im: String },
}

impl Value {
    pub fn to_text(&self) -> String {
        match self {
            Value::Exact(q) => fmt_rational(q),
            Value::Float { re, im } => format!("{re},{im}"),
        }
    }

    pub fn to_complex(&self, prec: u32) -> Complex {
        match self {
            Value::Exact(q) => q.to_complex(prec),
            Value::Float { re, im } => Complex::with_val(
                prec,
                (parse_float(re, prec).unwrap_or_else(|| rug::Float::new(prec)), parse_float(im, prec).unwrap_or_else(|| rug::Float::new(prec))),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub basis: usize,
    pub cusp: Cusp,
    pub part: Part,
    pub n: i64,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MfcFile {
    pub level: u64,
    pub weight: i32,
    pub dim: usize,
    pub provenance: Vec<String>,
    pub rows: Vec<Row>,
}

fn column_of(line: &str, token_index: usize) -> usize {
    let mut col = 1;
    let mut seen = 0;
    let mut in_token = false;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            in_token = false;
        } else if !in_token {
            in_token = true;
            if seen == token_index {
                return i + 1;
            }
            seen += 1;
        }
        col = i + 2;
    }
    col
}

fn parse_value(tok: &str, line: usize, col: usize) -> Result<Value> {
    if let Some((re, im)) = tok.split_once(',') {
        if parse_float(re, 64).is_none() || parse_float(im, 64).is_none() {
            return Err(Error::parse(line, col, format!("bad complex value {tok:?}")));
        }
        return Ok(Value::Float { re: re.to_string(), im: im.to_string() });
    }
    parse_rational(tok)
        .map(Value::Exact)
        .ok_or_else(|| Error::parse(line, col, format!("bad rational value {tok:?}")))
}

impl MfcFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut level = None;
        let mut weight = None;
        let mut dim = None;
        let mut provenance = Vec::new();
        let mut rows = Vec::new();
        let mut seen_format = false;
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let ln = idx + 1;
            last_line = ln;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let col = |i: usize| column_of(raw, i);
            if !seen_format {
                if toks != ["format", "mfcoeffs", "1"] {
                    return Err(Error::parse(ln, 1, "expected 'format mfcoeffs 1'"));
                }
                seen_format = true;
                continue;
            }
            let want = |n: usize| -> Result<()> {
                if toks.len() != n {
                    Err(Error::parse(ln, col(toks.len().min(n)), format!("expected {n} fields, found {}", toks.len())))
                } else {
                    Ok(())
                }
            };
            match toks[0] {
                "level" => {
                    want(2)?;
                    level = Some(toks[1].parse::<u64>().map_err(|_| Error::parse(ln, col(1), "bad level"))?);
                }
                "weight" => {
                    want(2)?;
                    weight = Some(toks[1].parse::<i32>().map_err(|_| Error::parse(ln, col(1), "bad weight"))?);
                }
                "dim" => {
                    want(2)?;
                    dim = Some(toks[1].parse::<usize>().map_err(|_| Error::parse(ln, col(1), "bad dim"))?);
                }
                "provenance" => {
                    let rest = raw.trim_start()["provenance".len()..].trim().to_string();
                    provenance.push(rest);
                }
                "basis" => {
                    if level.is_none() || weight.is_none() || dim.is_none() {
                        let missing = ["level", "weight", "dim"]
                            .iter()
                            .zip([level.is_none(), weight.is_none(), dim.is_none()])
                            .find(|(_, m)| *m)
                            .map(|(n, _)| *n)
                            .unwrap_or("header");
                        return Err(Error::parse(ln, 1, format!("missing '{missing}' header before data")));
                    }
                    want(8)?;
                    if toks[2] != "cusp" || toks[4] != "part" {
                        return Err(Error::parse(ln, col(if toks[2] != "cusp" { 2 } else { 4 }), "expected 'cusp' and 'part' keywords"));
                    }
                    let basis = toks[1].parse::<usize>().map_err(|_| Error::parse(ln, col(1), "bad basis index"))?;
                    if basis == 0 || basis > dim.unwrap_or(0) {
                        return Err(Error::parse(ln, col(1), format!("basis index {basis} outside 1..={}", dim.unwrap_or(0))));
                    }
                    let cusp = Cusp::parse(toks[3]).ok_or_else(|| Error::parse(ln, col(3), format!("unknown cusp {:?}", toks[3])))?;
                    let part = match toks[5] {
                        "aplus" => Part::APlus,
                        "bminus" => Part::BMinus,
                        "bzero" => Part::BZero,
                        other => return Err(Error::parse(ln, col(5), format!("unknown part {other:?}"))),
                    };
                    let n = toks[6].parse::<i64>().map_err(|_| Error::parse(ln, col(6), "bad exponent"))?;
                    let value = parse_value(toks[7], ln, col(7))?;
                    rows.push(Row { basis, cusp, part, n, value });
                }
                other => return Err(Error::parse(ln, 1, format!("unknown keyword {other:?}"))),
            }
        }
        if !seen_format {
            return Err(Error::parse(last_line.max(1), 1, "empty file"));
        }
        let end = last_line + 1;
        let level = level.ok_or_else(|| Error::parse(end, 1, "missing 'level' header"))?;
        let weight = weight.ok_or_else(|| Error::parse(end, 1, "missing 'weight' header"))?;
        let dim = dim.ok_or_else(|| Error::parse(end, 1, "missing 'dim' header"))?;
        let present: std::collections::BTreeSet<usize> = rows.iter().map(|r| r.basis).collect();
        if present.len() != dim {
            return Err(Error::parse(end, 1, format!("dim {dim} but {} basis elements present", present.len())));
        }
        Ok(MfcFile { level, weight, dim, provenance, rows })
    }

    pub fn emit(&self) -> String {
        let mut s = format!("format mfcoeffs 1\nlevel {}\nweight {}\ndim {}\n", self.level, self.weight, self.dim);
        for p in &self.provenance {
            let _ = writeln!(s, "provenance {p}");
        }
        for r in &self.rows {
            let _ = writeln!(s, "basis {} cusp {} part {} {} {}", r.basis, r.cusp.name(), r.part.name(), r.n, r.value.to_text());
        }
        s
    }

    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|r| matches!(r.value, Value::Exact(_)))
    }

    fn rows_of(&self, basis: usize, cusp: Cusp, part: Part) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.basis == basis && r.cusp == cusp && r.part == part)
    }

    fn series<C: Coeff>(&self, basis: usize, cusp: Cusp, ctx: C::Ctx, conv: &impl Fn(&Value) -> Result<C>) -> Result<Option<QSeries<C>>> {
        let rows: Vec<&Row> = self.rows_of(basis, cusp, Part::APlus).collect();
        if rows.is_empty() {
            return Ok(None);
        }
        let lo = rows.iter().map(|r| r.n).min().unwrap_or(0).min(0);
        let hi = rows.iter().map(|r| r.n).max().unwrap_or(0);
        let terms = rows.iter().map(|r| Ok((r.n, conv(&r.value)?))).collect::<Result<Vec<_>>>()?;
        Ok(Some(QSeries::from_terms(ctx, cusp.width(self.level), lo, hi, terms)?))
    }

    fn form_with<C: Coeff>(&self, basis: usize, ctx: C::Ctx, conv: impl Fn(&Value) -> Result<C>) -> Result<FormExpansion<C>> {
        let mut exps = Vec::new();
        for c in crate::classical_forms::cusps(self.level)? {
            let s = self
                .series(basis, c, ctx, &conv)?
                .ok_or_else(|| Error::IncompleteData(format!("basis {basis} has no rows at cusp {}", c.name())))?;
            exps.push((c, s));
        }
        FormExpansion::new(self.weight, self.level, exps, self.provenance.join("; "))
    }

    /// Holomorphic parts as exact forms.
    pub fn exact_forms(&self) -> Result<Vec<FormExpansion<Rational>>> {
        (1..=self.dim)
            .map(|b| {
                self.form_with(b, (), |v| match v {
                    Value::Exact(q) => Ok(q.clone()),
                    Value::Float { .. } => Err(Error::DomainError("file holds float coefficients".into())),
                })
            })
            .collect()
    }

    /// Holomorphic parts as float forms.
    pub fn float_forms(&self, digits: u32) -> Result<Vec<FormExpansion<Complex>>> {
        let p = bits(digits);
        (1..=self.dim).map(|b| self.form_with(b, Prec(p), |v| Ok(v.to_complex(p)))).collect()
    }

    /// Harmonic data for basis element `basis` (rows tagged `bminus` and `bzero`).
    pub fn harmonic(&self, basis: usize, digits: u32) -> Result<HarmonicData<Complex>> {
        let p = bits(digits);
        let ctx = Prec(p);
        let mut data = Vec::new();
        for c in crate::classical_forms::cusps(self.level)? {
            let width = c.width(self.level);
            let aplus = self
                .series(basis, c, ctx, &|v: &Value| Ok(v.to_complex(p)))?
                .ok_or_else(|| Error::IncompleteData(format!("basis {basis} has no aplus rows at cusp {}", c.name())))?;
            let b: Vec<(i64, Complex)> = self.rows_of(basis, c, Part::BMinus).map(|r| (r.n, r.value.to_complex(p))).collect();
            let lo = b.iter().map(|x| -x.0).min().unwrap_or(-1);
            let hi = b.iter().map(|x| -x.0).max().unwrap_or(-1);
            let bminus = b_series(ctx, width, b, lo, hi)?;
            let bzero = self.rows_of(basis, c, Part::BZero).next().map(|r| r.value.to_complex(p)).unwrap_or_else(|| Complex::new(p));
            data.push(HarmonicCusp { cusp: c, width, aplus, bminus, bzero });
        }
        HarmonicData::new(self.weight, self.level, data, self.provenance.join("; "))
    }

    /// Exact holomorphic forms as an `aplus` file.
    pub fn from_exact_forms(forms: &[FormExpansion<Rational>], provenance: &str) -> Result<Self> {
        let first = forms.first().ok_or_else(|| Error::DomainError("no forms".into()))?;
        let mut rows = Vec::new();
        for (i, f) in forms.iter().enumerate() {
            for (c, s) in &f.expansions {
                for (n, v) in s.terms() {
                    rows.push(Row { basis: i + 1, cusp: *c, part: Part::APlus, n, value: Value::Exact(v.clone()) });
                }
            }
        }
        Ok(MfcFile {
            level: first.level,
            weight: first.weight,
            dim: forms.len(),
            provenance: vec![provenance.to_string()],
            rows,
        })
    }
}
