use std::fmt::Write as _;
use std::path::PathBuf;

use rug::{Complex, Rational};

use hol_core::classical_forms::{delta, eisenstein, eisenstein_en, eta_quotient, faber, jfunction, Cusp, EtaQuotient, FormExpansion};
use hol_core::eigen::{decompose, eigensystem, hecke_matrix, ingest_basis, lemma43_expansion, CuspBasis, Scalar};
use hol_core::fixtures::s2_basis;
use hol_core::halfplane::{cm_detect, hecke_orbit, HPoint};
use hol_core::harmonic::HarmonicData;
use hol_core::lattice::{algdep, hilbert_class_experiment, orbit_transcendence_report};
use hol_core::numeric::{bits, fmt_complex, fmt_rational, parse_complex_pair, parse_float, parse_rational, to_c64, C64};
use hol_core::operators::sieve_prime;
use hol_core::pairing::{reg_pairing_coeff, reg_pairing_numeric, third_kind_domain, third_kind_tiles, NumericGram, SeriesTiles};
use hol_core::qseries::ExactSeries;
use hol_core::thirdkind::{canonical_project, eta_dlog, level1_third_kind, level1_working_digits, scholl_experiment};
use hol_core::verify::{self, admissible, VerifyConfig, SUITES};
use hol_core::{Error, Result};

use crate::cache::{self, Cache};
use crate::{Cli, Command, EigenOp, Global, PairOp, SeriesName, ThirdKindOp};

/// Text for stdout, CSV for `--csv`, and the exit status.
pub struct Output {
    pub text: String,
    pub csv: String,
    pub status: u8,
}

impl Output {
    fn ok(text: String, csv: String) -> Self {
        Output { text, csv, status: 0 }
    }

    fn encode(&self) -> Vec<u8> {
        format!("{} {}\n{}{}", self.status, self.text.len(), self.text, self.csv).into_bytes()
    }

    fn decode(raw: &[u8]) -> Option<Self> {
        let s = std::str::from_utf8(raw).ok()?;
        let (head, body) = s.split_once('\n')?;
        let (status, len) = head.split_once(' ')?;
        let len: usize = len.parse().ok()?;
        let text = body.get(..len)?.to_string();
        let csv = body.get(len..)?.to_string();
        Some(Output { text, csv, status: status.parse().ok()? })
    }
}

fn cache_dir(g: &Global) -> PathBuf {
    if let Some(d) = &g.cache_dir {
        return d.clone();
    }
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(x).join("hol");
    }
    match std::env::var_os("HOME") {
        Some(h) => PathBuf::from(h).join(".cache").join("hol"),
        None => PathBuf::from(".hol-cache"),
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    let out = if let Command::Verify { .. } = cli.command {
        dispatch(&cli.command, g)?
    } else if g.no_cache {
        dispatch(&cli.command, g)?
    } else {
        let params = vec![
            format!("{:?}", cli.command),
            format!("{:?}", g.schedule),
            format!("{:?}", g.residue_sign),
            format!("{} {:e}", g.max_degree, g.max_height),
        ];
        let key = cache::key(command_name(&cli.command), &params, g.prec, g.order);
        let store = Cache::new(cache_dir(g));
        match store.get(&key).and_then(|raw| Output::decode(&raw)) {
            Some(o) => o,
            None => {
                let o = dispatch(&cli.command, g)?;
                store.put(&key, &o.encode());
                o
            }
        }
    };
    print!("{}", out.text);
    if let Some(path) = &g.csv {
        std::fs::write(path, &out.csv).map_err(|e| Error::DomainError(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(out.status)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Qexp { .. } => "qexp",
        Command::Orbit { .. } => "orbit",
        Command::Evalj { .. } => "evalj",
        Command::Cmcheck { .. } => "cmcheck",
        Command::Algdep { .. } => "algdep",
        Command::Hclass { .. } => "hclass",
        Command::Thirdkind { .. } => "thirdkind",
        Command::Pair { .. } => "pair",
        Command::Norm { .. } => "norm",
        Command::Eigen { .. } => "eigen",
        Command::Sieve { .. } => "sieve",
        Command::Verify { .. } => "verify",
        Command::Report { .. } => "report",
    }
}

fn dispatch(c: &Command, g: &Global) -> Result<Output> {
    match c {
        Command::Qexp { series, m, level, eta } => qexp(*series, *m, *level, eta, g),
        Command::Orbit { m, tau, level } => orbit(*m, tau, *level, g),
        Command::Evalj { tau } => evalj(tau, g),
        Command::Cmcheck { tau, max_disc } => cmcheck(tau, *max_disc, g),
        Command::Algdep { value } => algdep_cmd(value, g),
        Command::Hclass { disc } => hclass(*disc, g),
        Command::Thirdkind { op } => thirdkind(op, g),
        Command::Pair { op } => pair(op, g),
        Command::Norm { level } => norm(*level),
        Command::Eigen { op } => eigen(op),
        Command::Sieve { series, primes } => sieve(*series, primes, g),
        Command::Verify { suite, m_max, tau } => verify_cmd(suite, *m_max, tau, g),
        Command::Report { tau, ms } => report(tau, ms, g),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::DomainError(msg.into())
}

fn bad_arg(msg: impl Into<String>) -> Error {
    Error::Parse { line: 1, column: 1, message: msg.into() }
}

fn parse_tau(s: &str, digits: u32) -> Result<HPoint> {
    HPoint::parse(s, bits(digits))
}

fn parse_eta(s: &str) -> Result<Vec<(u64, i64)>> {
    s.split(',')
        .map(|p| {
            let (d, r) = p.trim().split_once(':').ok_or_else(|| bad_arg(format!("expected `d:r` in `{p}`")))?;
            let d = d.trim().parse().map_err(|_| bad_arg(format!("bad index `{d}`")))?;
            let r = r.trim().parse().map_err(|_| bad_arg(format!("bad exponent `{r}`")))?;
            Ok((d, r))
        })
        .collect()
}

fn basis(level: u64) -> Result<CuspBasis> {
    let text = s2_basis(level).ok_or_else(|| Error::Unsupported(format!("no bundled basis at level {level} (have 11, 23, 29, 31)")))?;
    ingest_basis(text)
}

fn exponent(n: i64, denom: u32) -> String {
    fmt_rational(&Rational::from((n, i64::from(denom))))
}

/// `q^-2 + 0 + 42987520*q + …`: nonzero terms and the constant term, first few only.
fn pretty(s: &ExactSeries) -> String {
    let mut parts = Vec::new();
    let mut more = false;
    for (n, c) in s.terms() {
        if *c == 0 && n != 0 {
            continue;
        }
        if parts.len() == 5 {
            more = true;
            break;
        }
        let q = match exponent(n, s.denom()).as_str() {
            "0" => String::new(),
            "1" => "q".into(),
            e if e.contains('/') => format!("q^({e})"),
            e => format!("q^{e}"),
        };
        let c = fmt_rational(c);
        parts.push(match (q.is_empty(), c.as_str()) {
            (true, _) => c,
            (false, "1") => q,
            (false, "-1") => format!("-{q}"),
            (false, _) => format!("{c}*{q}"),
        });
    }
    let tail = if more { "…".to_string() } else { format!("O(q^{})", exponent(s.order() + 1, s.denom())) };
    if parts.is_empty() {
        tail
    } else {
        format!("{} + {tail}", parts.join(" + ")).replace("+ -", "- ")
    }
}

fn series_rows(s: &ExactSeries, prefix: &str) -> String {
    let mut out = String::new();
    for (n, c) in s.terms() {
        let _ = writeln!(out, "{prefix}{},{}", exponent(n, s.denom()), fmt_rational(c));
    }
    out
}

fn series_output(s: &ExactSeries) -> Output {
    let rows = series_rows(s, "");
    Output::ok(format!("{}\nn,coefficient\n{rows}", pretty(s)), format!("n,coefficient\n{rows}"))
}

fn form_output(f: &FormExpansion<Rational>, header: &str) -> Output {
    let mut text = format!("{header}\n");
    let mut csv = String::from("cusp,n,coefficient\n");
    for (c, s) in &f.expansions {
        let _ = writeln!(text, "cusp {}: {}", c.name(), pretty(s));
        csv.push_str(&series_rows(s, &format!("{},", c.name())));
    }
    text.push_str(&csv);
    Output::ok(text, csv)
}

fn level_one_series(name: SeriesName, m: u32, order: i64) -> Result<ExactSeries> {
    match name {
        SeriesName::E2 => eisenstein(2, order),
        SeriesName::E4 => eisenstein(4, order),
        SeriesName::E6 => eisenstein(6, order),
        SeriesName::Delta => delta(order),
        SeriesName::J => jfunction(order),
        SeriesName::Faber => faber(m, order),
        SeriesName::En | SeriesName::Eta => Err(usage("this series lives above level one")),
    }
}

fn qexp(name: SeriesName, m: u32, level: u64, eta: &str, g: &Global) -> Result<Output> {
    match name {
        SeriesName::En => Ok(form_output(&eisenstein_en(level, g.order)?, &format!("E_{level}"))),
        SeriesName::Eta => Ok(form_output(&eta_quotient(&parse_eta(eta)?, level, g.order)?, &format!("eta quotient {eta} at level {level}"))),
        _ => Ok(series_output(&level_one_series(name, m, g.order)?)),
    }
}

fn orbit(m: u64, tau: &str, level: u64, g: &Global) -> Result<Output> {
    let t = parse_tau(tau, g.prec + 10)?;
    let pts = hecke_orbit(m, &t, level)?;
    let mut abd = Vec::new();
    for a in (1..=m).filter(|a| m.is_multiple_of(*a)) {
        for b in 0..m / a {
            abd.push((a, b, m / a));
        }
    }
    let digits = g.prec as usize;
    let mut text = format!("T_{m}.tau for tau = {t}: {} points\na,b,d,point\n", pts.len());
    let mut csv = String::from("a,b,d,re,im\n");
    for ((a, b, d), p) in abd.iter().zip(&pts) {
        let _ = writeln!(text, "{a},{b},{d},{p}");
        let _ = writeln!(csv, "{a},{b},{d},{}", fmt_complex(&p.z, digits));
    }
    Ok(Output::ok(text, csv))
}

fn evalj(tau: &str, g: &Global) -> Result<Output> {
    let t = parse_tau(tau, g.prec + 20)?;
    let v = hol_core::modval::j(&t.z, bits(g.prec + 20))?;
    let s = fmt_complex(&v, g.prec as usize);
    Ok(Output::ok(format!("j({t}) = {s}\n"), format!("re,im\n{s}\n")))
}

fn cmcheck(tau: &str, max_disc: u64, g: &Global) -> Result<Output> {
    let t = parse_tau(tau, g.prec)?;
    Ok(match t.cm.or_else(|| cm_detect(&t, max_disc)) {
        Some(f) => Output::ok(
            format!("CM point: root of {}x^2{:+}x{:+}, discriminant {}\n", f.a, f.b, f.c, f.disc()),
            format!("a,b,c,disc\n{},{},{},{}\n", f.a, f.b, f.c, f.disc()),
        ),
        None => Output::ok(format!("no integral form with |disc| <= {max_disc}\n"), "a,b,c,disc\n".into()),
    })
}

fn poly_text(p: &[rug::Integer]) -> String {
    let mut terms = Vec::new();
    for (k, c) in p.iter().enumerate().rev() {
        if *c == 0 {
            continue;
        }
        let x = match k {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{k}"),
        };
        terms.push(match (x.is_empty(), c.to_string().as_str()) {
            (true, s) => s.to_string(),
            (false, "1") => x,
            (false, "-1") => format!("-{x}"),
            (false, s) => format!("{s}*{x}"),
        });
    }
    terms.join(" + ").replace("+ -", "- ")
}

fn poly_csv(p: &[rug::Integer]) -> String {
    let mut s = String::from("degree,coefficient\n");
    for (k, c) in p.iter().enumerate() {
        let _ = writeln!(s, "{k},{c}");
    }
    s
}

fn algdep_cmd(value: &str, g: &Global) -> Result<Output> {
    let parse = |d: u32| -> Result<Complex> {
        let p = bits(d);
        if value.contains(',') {
            parse_complex_pair(value, p)
        } else {
            parse_float(value, p).map(|x| Complex::with_val(p, (x, 0)))
        }
        .ok_or_else(|| bad_arg(format!("expected `re` or `re,im`, got `{value}`")))
    };
    parse(g.prec)?;
    let out = algdep(&parse, &g.algdep())?;
    Ok(match &out.poly {
        Some(p) => Output::ok(
            format!("{}: {}\nresidual {:e} at {} digits\n", out.verdict, poly_text(p), out.residual, out.digits),
            poly_csv(p),
        ),
        None => Output::ok(format!("{}: no relation with degree <= {} and height <= {:e}\n", out.verdict, g.max_degree, g.max_height), poly_csv(&[])),
    })
}

fn hclass(disc: i64, g: &Global) -> Result<Output> {
    let r = hilbert_class_experiment(disc, g.prec)?;
    let mut text = format!("H_{disc}(x) = {}\nclass number {}\n", poly_text(&r.poly), r.forms.len());
    for (f, res) in r.forms.iter().zip(&r.root_residuals) {
        let _ = writeln!(text, "form ({}, {}, {}): |H(j(tau_Q))| = {res:.3e}", f.a, f.b, f.c);
    }
    let _ = writeln!(text, "rounding residual {:.3e} at {} digits", r.rounding_residual, r.digits);
    Ok(Output::ok(text, poly_csv(&r.poly)))
}

/// Parse `tau` precisely enough for the level-one construction.
fn level1_tau(tau: &str, order: i64, digits: u32) -> Result<HPoint> {
    let probe = parse_tau(tau, 60)?;
    parse_tau(tau, level1_working_digits(&probe, order, digits) + 20)
}

fn thirdkind(op: &ThirdKindOp, g: &Global) -> Result<Output> {
    let digits = g.prec as usize;
    match op {
        ThirdKindOp::Level1 { tau } => {
            let t = level1_tau(tau, g.order, g.prec)?;
            let f = level1_third_kind(&t, g.order, g.prec)?;
            let mut text = g.orientation().apply(&f.divisor).to_text();
            for r in &f.interior {
                let _ = writeln!(text, "interior residue at {}: 2 pi i Res = {}, weighted {}", r.point, fmt_complex(&r.raw, 20), r.weighted);
            }
            let mut csv = String::from("n,re,im\n");
            for (n, c) in f.form.inf().terms() {
                let _ = writeln!(csv, "{n},{}", fmt_complex(c, digits));
            }
            text.push_str(&csv);
            Ok(Output::ok(text, csv))
        }
        ThirdKindOp::Etadlog { eta, level } => {
            let f = eta_dlog(&EtaQuotient::new(&parse_eta(eta)?), *level, g.order)?;
            let mut out = form_output(&f.form, &format!("dlog of eta quotient {eta}"));
            out.text = format!("{}{}", g.orientation().apply(&f.divisor).to_text(), out.text);
            Ok(out)
        }
        ThirdKindOp::Project { tau, level } => {
            let b = basis(*level)?;
            let work = 30;
            let t = level1_tau(tau, g.order, work)?;
            let psi = level1_third_kind(&t, g.order, work)?;
            let spec = third_kind_domain(&psi, *level)?;
            let forms = b.forms.iter().map(|f| f.to_float(work)).collect();
            let gram = NumericGram::new(forms, &admissible(&g.schedule, &spec))?;
            let (phi, c) = canonical_project(&psi, &gram)?;
            let mut text = g.orientation().apply(&phi.divisor).to_text();
            let mut csv = String::from("i,re,im\n");
            for (i, ci) in c.iter().enumerate() {
                let _ = writeln!(text, "c_{} = {:.12e}", i + 1, ci);
                let _ = writeln!(csv, "{},{:.17e},{:.17e}", i + 1, ci.re, ci.im);
            }
            let _ = writeln!(text, "coefficients of Phi at infinity");
            for n in 0..=5.min(phi.form.inf().order()) {
                if let Some(v) = phi.form.inf().coeff(n) {
                    let _ = writeln!(text, "{n},{}", fmt_complex(&v, 20));
                }
            }
            Ok(Output::ok(text, csv))
        }
        ThirdKindOp::Scholl { tau, indices } => {
            let top = indices.iter().copied().max().unwrap_or(1).max(1);
            let t = level1_tau(tau, top, g.prec + 40)?;
            let f = level1_third_kind(&t, top, g.prec)?;
            let r = scholl_experiment(&f, indices, &g.algdep())?;
            let mut text = String::new();
            for row in &r.rows {
                let rel = row.outcome.poly.as_ref().map_or("no relation".to_string(), |p| poly_text(p));
                let _ = writeln!(text, "c_{}: {} ({})", row.n, rel, row.outcome.verdict);
            }
            let _ = writeln!(text, "verdict: {}", r.verdict);
            Ok(Output::ok(text, r.to_csv()))
        }
    }
}

fn jm_pairing(tau: &str, m: u32, order: i64, digits: u32) -> Result<(Complex, Complex)> {
    let t = level1_tau(tau, i64::from(m) + 1, digits)?;
    let g = level1_third_kind(&t, i64::from(m) + 1, digits)?;
    let jm = FormExpansion::new(0, 1, vec![(Cusp::Infinity, faber(m, order.max(i64::from(m) + 1))?)], format!("j_{m}"))?.to_float(digits);
    let v = reg_pairing_coeff(&HarmonicData::from_form(&jm)?, &g.form, &g.interior, bits(digits))?;
    Ok((v, g.form.inf().coeff_known(i64::from(m))?))
}

fn dlog_pairings(eta: &str, level: u64, schedule: &[f64]) -> Result<Vec<hol_core::pairing::PairingRecord>> {
    let b = basis(level)?;
    let e = eigensystem(&b, &probes_for(level), false)?;
    let g = eta_dlog(&EtaQuotient::new(&parse_eta(eta)?), level, 200)?.to_float(30);
    let gt = third_kind_tiles(&g)?;
    let spec = third_kind_domain(&g, level)?;
    e.forms
        .iter()
        .map(|f| reg_pairing_numeric(&SeriesTiles::new(&f.float_form(&b, 30)?)?, gt.as_ref(), 2, &spec, schedule))
        .collect()
}

fn pair(op: &PairOp, g: &Global) -> Result<Output> {
    match op {
        PairOp::Coeff { tau, m } => {
            let (v, c) = jm_pairing(tau, *m, g.order, g.prec)?;
            let s = fmt_complex(&v, 20);
            Ok(Output::ok(
                format!("(j_{m}, g_tau)_reg by the coefficient formula = {s}\nc_{m}(tau) = {}\n", fmt_complex(&c, 20)),
                format!("re,im\n{s}\n"),
            ))
        }
        PairOp::Numeric { eta, level } => {
            let recs = dlog_pairings(eta, *level, &g.schedule)?;
            let mut text = String::new();
            let mut csv = String::from("i,epsilon,re,im\n");
            for (i, r) in recs.iter().enumerate() {
                let _ = writeln!(text, "(f_{}, dt/t)_reg = {:.12e} (error estimate {:.2e})", i + 1, r.value, r.error);
                for line in r.to_csv().lines().skip(1) {
                    let _ = writeln!(csv, "{},{line}", i + 1);
                }
            }
            Ok(Output::ok(text, csv))
        }
        PairOp::Compare { tau, m } => {
            let (v, _) = jm_pairing(tau, *m, g.order, g.prec)?;
            let recs = dlog_pairings("1:12,11:-12", 11, &g.schedule)?;
            let c = to_c64(&v);
            let n = recs[0].value;
            Ok(Output::ok(
                format!(
                    "coefficient formula, (j_{m}, g_tau) at tau = {tau}: {c:.3e}\nquadrature, (f11, dt/t) at level 11: {n:.3e}\nboth vanish in exact arithmetic\n"
                ),
                format!("method,re,im\ncoefficient,{:e},{:e}\nquadrature,{:e},{:e}\n", c.re, c.im, n.re, n.im),
            ))
        }
    }
}

fn probes_for(level: u64) -> Vec<u64> {
    [2u64, 3, 5, 7, 13].into_iter().filter(|p| !level.is_multiple_of(*p)).collect()
}

fn norm(level: u64) -> Result<Output> {
    let b = basis(level)?;
    let e = eigensystem(&b, &probes_for(level), false)?;
    let norms = e.norms(&b)?;
    let mut text = String::new();
    let mut csv = String::from("i,norm\n");
    for (i, n) in norms.iter().enumerate() {
        let _ = writeln!(text, "(f_{0}, f_{0}) = {n:.15e}", i + 1);
        let _ = writeln!(csv, "{},{n:.17e}", i + 1);
    }
    Ok(Output::ok(text, csv))
}

fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    s.split(';')
        .map(|p| {
            let p = p.trim();
            let (re, im) = p.split_once(',').unwrap_or((p, "0"));
            match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                (Ok(a), Ok(b)) => Ok(C64::new(a, b)),
                _ => Err(bad_arg(format!("expected `re,im`, got `{p}`"))),
            }
        })
        .collect()
}

fn eigen(op: &EigenOp) -> Result<Output> {
    match op {
        EigenOp::Matrix { level, m } => {
            let b = basis(*level)?;
            let mat = hecke_matrix(&b, *m)?;
            let rows: Vec<String> = mat.iter().map(|r| r.iter().map(fmt_rational).collect::<Vec<_>>().join(",")).collect();
            let body = rows.join("\n") + "\n";
            Ok(Output::ok(format!("T_{m} on S_2(Gamma_0({level})), rows = images of the echelon basis\n{body}"), body))
        }
        EigenOp::System { level, probes } => {
            let b = basis(*level)?;
            let e = eigensystem(&b, probes, false)?;
            let mut text = format!("{} eigenforms ({})\n", e.forms.len(), if e.exact { "exact" } else { "floating point" });
            for &m in probes {
                for (i, l) in e.lambda(&b, m)?.iter().enumerate() {
                    let _ = writeln!(text, "lambda_{},{m} = {l}", i + 1);
                }
            }
            Ok(Output::ok(text, e.to_csv(&b, probes)?))
        }
        EigenOp::Decompose { level, coeffs } => {
            let b = basis(*level)?;
            let e = eigensystem(&b, &probes_for(*level), false)?;
            let g = coeffs
                .split(',')
                .map(|c| {
                    let q = parse_rational(c).ok_or_else(|| bad_arg(format!("bad rational `{c}`")))?;
                    Ok(Scalar::from_rational(&q, e.exact))
                })
                .collect::<Result<Vec<_>>>()?;
            let beta = decompose(&g, &e, &b)?;
            let mut text = String::new();
            let mut csv = String::from("i,re,im\n");
            for (i, v) in beta.iter().enumerate() {
                let z = v.to_c64();
                let _ = writeln!(text, "beta_{} = {v}", i + 1);
                let _ = writeln!(csv, "{},{:.17e},{:.17e}", i + 1, z.re, z.im);
            }
            Ok(Output::ok(text, csv))
        }
        EigenOp::Lemma43 { level, m, alpha, beta } => {
            let b = basis(*level)?;
            let e = eigensystem(&b, &probes_for(*level), false)?;
            let norms = e.norms(&b)?;
            let lambda: Vec<C64> = e.lambda(&b, *m)?.iter().map(Scalar::to_c64).collect();
            let v = lemma43_expansion(&parse_complex_list(alpha)?, &parse_complex_list(beta)?, &norms, &lambda, *m)?;
            Ok(Output::ok(format!("{v:.15e}\n"), format!("re,im\n{:.17e},{:.17e}\n", v.re, v.im)))
        }
    }
}

fn sieve(name: SeriesName, primes: &[u64], g: &Global) -> Result<Output> {
    let mut f = level_one_series(name, 1, g.order)?;
    for &p in primes {
        if !hol_core::classical_forms::is_prime(p) {
            return Err(usage(format!("{p} is not prime")));
        }
        f = sieve_prime(&f, p)?;
    }
    Ok(series_output(&f))
}

fn verify_cmd(suite: &str, m_max: Option<u64>, taus: &[String], g: &Global) -> Result<Output> {
    let mut cfg = VerifyConfig {
        digits: g.prec,
        order: g.order,
        schedule: g.schedule.clone(),
        ..VerifyConfig::default()
    };
    if let Some(m) = m_max {
        cfg.m_max = m;
    }
    if !taus.is_empty() {
        cfg.taus = taus.to_vec();
    }
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    if names.iter().any(|n| !SUITES.contains(n)) {
        eprintln!("error: unknown suite `{suite}`; known: all, {}", SUITES.join(", "));
        return Ok(Output { text: String::new(), csv: String::new(), status: 2 });
    }
    let mut text = String::new();
    let mut csv = String::from("suite,check,pass,detail\n");
    let mut status = 0;
    for name in names {
        let s = verify::run(name, &cfg).ok_or_else(|| usage(format!("unknown suite `{name}`")))?;
        for c in &s.checks {
            let _ = writeln!(text, "{c}");
            let _ = writeln!(csv, "{},{},{},\"{}\"", s.name, c.name.replace(',', ";"), c.pass, c.detail.replace('"', "'"));
        }
        let _ = writeln!(text, "{}", s.summary());
        if !s.pass() {
            status = 1;
        }
    }
    Ok(Output { text, csv, status })
}

fn report(tau: &str, ms: &[u64], g: &Global) -> Result<Output> {
    let top = ms.iter().copied().max().unwrap_or(1) as i64;
    let s = g.algdep();
    let t = level1_tau(tau, top, s.digits + s.confirm_extra + 20)?;
    let f = |z: &Complex, p: u32| -> Result<Complex> {
        let mut v = hol_core::modval::j(z, p)?;
        v -= 744u32;
        Ok(v)
    };
    let rows = orbit_transcendence_report(&f, &t, ms, 1, &s)?;
    let mut text = format!("orbit sums of j - 744 at tau = {t}\n");
    let mut csv = String::from("m,verdict,polynomial,residual\n");
    for r in &rows {
        let rel = r.outcome.poly.as_ref().map_or("none".to_string(), |p| poly_text(p));
        let _ = writeln!(text, "m={}: {} {rel}", r.m, r.outcome.verdict);
        let _ = writeln!(csv, "{},{},{rel},{:e}", r.m, r.outcome.verdict, r.outcome.residual);
    }
    let all_alg = rows.iter().all(|r| r.outcome.verdict == hol_core::lattice::Verdict::AlgebraicEvidence);
    let _ = writeln!(text, "summary: {}", if all_alg { "recognized for every m" } else { "unrecognized for some m" });
    Ok(Output::ok(text, csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faber_header() {
        let out = series_output(&faber(2, 5).unwrap());
        assert!(out.text.starts_with("q^-2 + 0 + 42987520*q + "), "{}", out.text);
        assert!(out.csv.contains("\n1,42987520\n"));
    }

    #[test]
    fn output_round_trip() {
        let o = Output { text: "a\nb\n".into(), csv: "x,y\n".into(), status: 1 };
        let back = Output::decode(&o.encode()).unwrap();
        assert_eq!((back.text, back.csv, back.status), (o.text, o.csv, o.status));
    }

    #[test]
    fn eta_and_polys() {
        assert_eq!(parse_eta("1:12, 11:-12").unwrap(), vec![(1, 12), (11, -12)]);
        assert!(parse_eta("1-12").is_err());
        let p: Vec<rug::Integer> = [-1728, 1].iter().map(|&c| rug::Integer::from(c)).collect();
        assert_eq!(poly_text(&p), "x - 1728");
        let p: Vec<rug::Integer> = [-1, -1, 1].iter().map(|&c| rug::Integer::from(c)).collect();
        assert_eq!(poly_text(&p), "x^2 - x - 1");
    }

    fn cli(args: &[&str]) -> Cli {
        use clap::Parser;
        Cli::try_parse_from(std::iter::once("hol").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn orbit_rows_and_statuses() {
        let c = cli(&["orbit", "--m", "2", "--tau", "i", "--no-cache"]);
        let out = dispatch(&c.command, &c.global).unwrap();
        assert_eq!(out.csv.lines().count(), 4);
        assert!(out.text.contains("2,0,1,0+2.0"), "{}", out.text);
        let c = cli(&["verify", "sieve", "--order", "100"]);
        assert_eq!(dispatch(&c.command, &c.global).unwrap().status, 0);
        let c = cli(&["verify", "nope"]);
        assert_eq!(dispatch(&c.command, &c.global).unwrap().status, 2);
        let c = cli(&["norm", "--level", "37"]);
        assert!(dispatch(&c.command, &c.global).is_err());
    }

    #[test]
    fn cached_output_is_identical() {
        let dir = std::env::temp_dir().join(format!("hol-cmd-cache-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let d = dir.to_str().unwrap();
        let c = cli(&["qexp", "delta", "--order", "50", "--cache-dir", d]);
        let csv = dir.join("out.csv");
        let mut c2 = cli(&["qexp", "delta", "--order", "50", "--cache-dir", d, "--csv", csv.to_str().unwrap()]);
        assert_eq!(run(&c).unwrap(), 0);
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        assert_eq!(run(&c2).unwrap(), 0);
        let fresh = dispatch(&c.command, &c.global).unwrap();
        assert_eq!(std::fs::read_to_string(&csv).unwrap(), fresh.csv);
        assert!(fresh.csv.contains("\n11,534612\n"));
        c2.global.order = 51;
        assert_eq!(run(&c2).unwrap(), 0);
        assert_eq!(std::fs::read_dir(&dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "entry")).count(), 2);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
