use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use pseudotwin::arith::{sieve_slice, DyadicRange};
use pseudotwin::counting::{pi_hat, pi_hat_table, pi_hat_via_n, sigma_terms};
use pseudotwin::expsums::{
    bilinear_sums, linear_bound, linear_sum, linear_sup_report, s0_sum, wvdc_check, CoefficientPair,
};
use pseudotwin::golden::GoldenStore;
use pseudotwin::specfun::{floor_inverse_li, inverse_li, li_from_2_with, Precision};
use pseudotwin::vaughan::{
    coeff_a, coeff_b, decompose_sum, default_cut, default_h, prime_exp_sum, s_total_range,
    vaughan_identity_check, VaughanParams,
};
use pseudotwin::Error;

use crate::args::*;

/// A checked property did not hold; maps to exit status 1.
#[derive(Debug)]
pub struct AssertionFailed(pub String);

impl fmt::Display for AssertionFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "assertion failed: {}", self.0)
    }
}

impl std::error::Error for AssertionFailed {}

fn fail(msg: impl Into<String>) -> anyhow::Error {
    AssertionFailed(msg.into()).into()
}

/// CSV sink: LF endings, floats with 17 significant digits.
pub struct Sheet {
    w: csv::Writer<Box<dyn Write>>,
}

impl Sheet {
    pub fn open(out: Option<&Path>) -> Result<Self> {
        let sink: Box<dyn Write> = match out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink);
        Ok(Sheet { w })
    }

    fn header(&mut self, cols: &[&str]) -> Result<()> {
        self.w.write_record(cols)?;
        Ok(())
    }

    fn row(&mut self, cells: &[Cell]) -> Result<()> {
        self.w.write_record(cells.iter().map(Cell::render))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

pub enum Cell {
    I(i64),
    U(u64),
    F(f64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::F(v) => format!("{v:.16e}"),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
            Cell::Empty => String::new(),
        }
    }
}

use Cell::{Empty, B, F, I, S, U};

fn provenance(command: &str) -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "pseudotwin {} {command} unix-time {secs}",
        env!("CARGO_PKG_VERSION")
    )
}

fn record_goldens(g: &GoldenArgs, command: &str, entries: &[(String, f64)]) -> Result<()> {
    let Some(path) = &g.goldens else {
        return Ok(());
    };
    let mut store = GoldenStore::load_or_new(path)?;
    let note = provenance(command);
    for (key, value) in entries {
        if store.get(key).is_some_and(|old| old.value == *value) {
            continue;
        }
        store.set(key, *value, &note, g.regenerate)?;
    }
    if store.is_dirty() {
        store.save(path)?;
        eprintln!(
            "recorded {} golden value(s) in {}",
            entries.len(),
            path.display()
        );
    }
    Ok(())
}

pub fn run(cmd: &Command, sheet: &mut Sheet) -> Result<()> {
    match cmd {
        Command::Lival(a) => lival(a, sheet),
        Command::Pihat(a) => pihat(a, sheet),
        Command::PihatTable(a) => pihat_table(a, sheet),
        Command::ExpsumLinear(a) => expsum_linear(a, sheet),
        Command::ExpsumS0(a) => expsum_s0(a, sheet),
        Command::ExpsumBilinear(a) => expsum_bilinear(a, sheet),
        Command::WvdcFuzz(a) => wvdc_fuzz(a, sheet),
        Command::VaughanVerify(a) => vaughan_verify(a, sheet),
        Command::Decompose(a) => decompose(a, sheet),
        Command::STotal(a) => s_total(a, sheet),
        Command::Sigma(a) => sigma(a, sheet),
        Command::Goldens(a) => goldens(a, sheet),
    }
}

fn lival(a: &Lival, sheet: &mut Sheet) -> Result<()> {
    if let Some(x) = a.x {
        let p = match a.precision {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Dd => Precision::DoubleDouble,
        };
        let v = li_from_2_with(x, p)?;
        sheet.header(&["x", "li", "abs_err"])?;
        return sheet.row(&[F(x), F(v.value()), F(v.abs_err())]);
    }
    let y = a.y.expect("clap requires x or y");
    let p = inverse_li(y)?;
    sheet.header(&["y", "inverse_li", "abs_err", "floor", "ambiguous"])?;
    if y >= 0.0 && y.fract() == 0.0 && y <= u64::MAX as f64 {
        let f = floor_inverse_li(y as u64)?;
        sheet.row(&[
            F(y),
            F(p.value()),
            F(p.abs_err()),
            I(f.value),
            B(f.ambiguous),
        ])
    } else {
        sheet.row(&[F(y), F(p.value()), F(p.abs_err()), Empty, Empty])
    }
}

fn pihat(a: &Pihat, sheet: &mut Sheet) -> Result<()> {
    let r = pi_hat(a.x)?;
    let mut cols = vec!["x", "pi_hat", "model", "ratio", "ambiguous"];
    let mut row = vec![
        U(r.x),
        U(r.pi_hat),
        F(r.model),
        F(r.ratio),
        U(r.ambiguous_count),
    ];
    let via = if a.cross_check {
        let v = pi_hat_via_n(a.x)?;
        cols.push("pi_hat_via_n");
        row.push(U(v));
        Some(v)
    } else {
        None
    };
    sheet.header(&cols)?;
    sheet.row(&row)?;
    if r.ambiguous_count > 0 {
        return Err(fail(format!(
            "{} ambiguous floor decisions",
            r.ambiguous_count
        )));
    }
    if let Some(v) = via.filter(|&v| v != r.pi_hat) {
        return Err(fail(format!(
            "indicator count {} != inverse count {v}",
            r.pi_hat
        )));
    }
    Ok(())
}

fn pihat_table(a: &PihatTable, sheet: &mut Sheet) -> Result<()> {
    eprintln!(
        "sweeping primes up to {}",
        a.checkpoints.last().copied().unwrap_or(0)
    );
    let table = pi_hat_table(&a.checkpoints)?;
    sheet.header(&["x", "pi_hat", "model", "ratio", "ambiguous"])?;
    let mut entries = Vec::new();
    for r in &table {
        sheet.row(&[
            U(r.x),
            U(r.pi_hat),
            F(r.model),
            F(r.ratio),
            U(r.ambiguous_count),
        ])?;
        entries.push((format!("pihat.count.{}", r.x), r.pi_hat as f64));
        entries.push((format!("pihat.ratio.{}", r.x), r.ratio));
    }
    let ambiguous: u64 = table.last().map(|r| r.ambiguous_count).unwrap_or(0);
    if ambiguous > 0 {
        return Err(fail(format!("{ambiguous} ambiguous floor decisions")));
    }
    record_goldens(&a.golden, "pihat-table", &entries)
}

fn expsum_linear(a: &ExpsumLinear, sheet: &mut Sheet) -> Result<()> {
    if a.sup {
        let r = linear_sup_report(a.h, a.ell, a.n)?;
        sheet.header(&["h", "ell", "n", "n1_at_sup", "sup_abs", "bound", "ratio"])?;
        return sheet.row(&[
            I(a.h),
            U(a.ell),
            U(a.n),
            U(r.params.n1.unwrap_or(0)),
            F(r.lhs),
            F(r.bound),
            F(r.ratio),
        ]);
    }
    let n1 = a.n1.unwrap_or(2 * a.n);
    let range = DyadicRange::new(a.n, n1)?;
    let s = linear_sum(a.h, a.ell, range)?;
    sheet.header(&["h", "ell", "n", "n1", "re", "im", "abs", "bound", "ratio"])?;
    let mut row = vec![
        I(a.h),
        U(a.ell),
        U(a.n),
        U(n1),
        F(s.re),
        F(s.im),
        F(s.norm()),
    ];
    if a.h == 0 {
        row.extend([Empty, Empty]);
    } else {
        let b = linear_bound(a.h, a.ell, a.n);
        row.extend([F(b), F(s.norm() / b)]);
    }
    sheet.row(&row)
}

fn expsum_s0(a: &ExpsumS0, sheet: &mut Sheet) -> Result<()> {
    let (s, r) = s0_sum(a.h, a.q, a.k, a.l)?;
    sheet.header(&["h", "q", "k", "l", "re", "im", "abs", "bound", "ratio"])?;
    sheet.row(&[
        I(a.h),
        I(a.q),
        U(a.k),
        U(a.l),
        F(s.re),
        F(s.im),
        F(r.lhs),
        F(r.bound),
        F(r.ratio),
    ])
}

fn coefficients(kind: Coeff, start: u64, u: u64, v: u64) -> Result<(Vec<Complex64>, f64)> {
    let slice = sieve_slice(start + 1, 2 * start + 1)?;
    let mut out = Vec::with_capacity(start as usize);
    for m in start + 1..=2 * start {
        let x = match kind {
            Coeff::Ones => 1.0,
            Coeff::A => coeff_a(m, u)? as f64,
            Coeff::B => coeff_b(m, u, v)?.value(),
            Coeff::Lambda => slice.mangoldt(m),
            Coeff::Mu => slice.moebius(m) as f64,
        };
        out.push(Complex64::new(x, 0.0));
    }
    // log-power exponent of the mean-square bound
    let exp = match kind {
        Coeff::Ones | Coeff::Mu => 0.0,
        Coeff::A => 1.5,
        Coeff::B => 1.0,
        Coeff::Lambda => 0.5,
    };
    Ok((out, exp))
}

fn coeff_name(c: Coeff) -> &'static str {
    match c {
        Coeff::Ones => "ones",
        Coeff::A => "a",
        Coeff::B => "b",
        Coeff::Lambda => "lambda",
        Coeff::Mu => "mu",
    }
}

fn expsum_bilinear(a: &ExpsumBilinear, sheet: &mut Sheet) -> Result<()> {
    let cut = ((2 * a.l.max(a.k)) as f64).sqrt().ceil() as u64;
    let (u, v) = (a.u.unwrap_or(cut), a.v.unwrap_or(cut));
    let (alpha, a_exp) = coefficients(a.alpha, a.l, u, v)?;
    let (beta, b_exp) = coefficients(a.beta, a.k, u, v)?;
    let pair = CoefficientPair::new(alpha, a.l, beta, a.k, a_exp, b_exp)?;
    let (ca, cb) = pair.norm_constants();
    let results = bilinear_sums(&pair, &a.h)?;
    sheet.header(&[
        "h", "l", "k", "alpha", "beta", "re", "im", "abs", "bound", "ratio", "c_alpha", "c_beta",
    ])?;
    for (&h, (s, r)) in a.h.iter().zip(results) {
        sheet.row(&[
            I(h),
            U(a.l),
            U(a.k),
            S(coeff_name(a.alpha).into()),
            S(coeff_name(a.beta).into()),
            F(s.re),
            F(s.im),
            F(r.lhs),
            F(r.bound),
            F(r.ratio),
            F(ca),
            F(cb),
        ])?;
    }
    Ok(())
}

fn wvdc_fuzz(a: &WvdcFuzz, sheet: &mut Sheet) -> Result<()> {
    if a.max_k == 0 {
        return Err(Error::InvalidParams("max-k must be >= 1".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    sheet.header(&["trial", "k", "q", "lhs", "rhs", "ok"])?;
    let mut bad = 0u32;
    for t in 0..a.trials {
        let k = rng.gen_range(1..=a.max_k);
        let q = rng.gen_range(1..=k);
        let z: Vec<Complex64> = (0..k)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let (lhs, rhs) = wvdc_check(&z, q)?;
        let ok = lhs <= rhs * (1.0 + 1e-9);
        bad += !ok as u32;
        sheet.row(&[U(t as u64), U(k as u64), U(q as u64), F(lhs), F(rhs), B(ok)])?;
    }
    if bad > 0 {
        return Err(fail(format!(
            "{bad} of {} trials violate the inequality",
            a.trials
        )));
    }
    Ok(())
}

fn vaughan_verify(a: &VaughanVerify, sheet: &mut Sheet) -> Result<()> {
    let ns: Vec<u64> = (a.v + 1..=a.max_n).collect();
    let failures: Vec<u64> = ns
        .par_iter()
        .map(|&n| vaughan_identity_check(n, a.u, a.v).map(|r| (n, r.is_zero())))
        .collect::<pseudotwin::Result<Vec<_>>>()?
        .into_iter()
        .filter(|&(_, ok)| !ok)
        .map(|(n, _)| n)
        .collect();
    for n in failures.iter().take(20) {
        eprintln!("identity fails at n = {n}");
    }
    sheet.header(&["checked", "failures"])?;
    sheet.row(&[U(ns.len() as u64), U(failures.len() as u64)])?;
    if !failures.is_empty() {
        return Err(fail(format!("{} residuals are non-zero", failures.len())));
    }
    Ok(())
}

fn decompose(a: &Decompose, sheet: &mut Sheet) -> Result<()> {
    let n2 = a.n2.unwrap_or(2 * a.n);
    let cut = default_cut(a.n);
    let p = VaughanParams::new(a.u.unwrap_or(cut), a.v.unwrap_or(cut), a.n, n2, 1)?;
    let d = decompose_sum(a.h, &p)?;
    let direct = prime_exp_sum(a.h, a.n, n2)?;
    let gap = (d.total - direct).norm() / direct.norm().max(f64::MIN_POSITIVE);
    sheet.header(&[
        "h",
        "n",
        "n2",
        "u",
        "v",
        "s1_re",
        "s1_im",
        "s2_re",
        "s2_im",
        "s3_re",
        "s3_im",
        "s4_re",
        "s4_im",
        "s5_re",
        "s5_im",
        "total_re",
        "total_im",
        "direct_re",
        "direct_im",
        "rel_gap",
    ])?;
    let mut row = vec![I(a.h), U(a.n), U(n2), U(p.u), U(p.v)];
    for z in [d.s1, d.s2, d.s3, d.s4, d.s5, d.total, direct] {
        row.extend([F(z.re), F(z.im)]);
    }
    row.push(F(gap));
    sheet.row(&row)?;
    if gap > 1e-6 {
        return Err(fail(format!(
            "decomposition differs from the direct sum by {gap:e} relative"
        )));
    }
    Ok(())
}

fn s_total(a: &STotal, sheet: &mut Sheet) -> Result<()> {
    let n2 = a.n2.unwrap_or(2 * a.n);
    let h = a.h_max.unwrap_or_else(|| default_h(a.n));
    eprintln!("summing {h} frequencies over ({}, {n2}]", a.n);
    let s = s_total_range(a.n, n2, h)?;
    sheet.header(&["n", "n2", "h_max", "s", "power_ratio", "log_ratio"])?;
    sheet.row(&[
        U(s.n),
        U(s.n2),
        U(s.h_max as u64),
        F(s.s),
        F(s.power_ratio),
        F(s.log_ratio),
    ])?;
    let key = format!("stotal.power_ratio.{}.{}.{}", s.n, s.n2, s.h_max);
    record_goldens(&a.golden, "s-total", &[(key, s.power_ratio)])
}

fn sigma(a: &Sigma, sheet: &mut Sheet) -> Result<()> {
    let range = DyadicRange::new(a.n, a.n1.unwrap_or(2 * a.n))?;
    let h = a.h_max.unwrap_or_else(|| default_h(a.n));
    let r = sigma_terms(range, h)?;
    sheet.header(&[
        "n",
        "n1",
        "h_max",
        "sigma",
        "sigma1_re",
        "sigma1_im",
        "sigma2",
        "realized_c",
        "target_ratio",
    ])?;
    sheet.row(&[
        U(range.start()),
        U(range.end()),
        U(h as u64),
        F(r.sigma),
        F(r.sigma1.re),
        F(r.sigma1.im),
        F(r.sigma2),
        F(r.realized_c),
        F(r.target_ratio),
    ])
}

fn goldens(a: &Goldens, sheet: &mut Sheet) -> Result<()> {
    let store = if a.init {
        if a.goldens.exists() && !a.regenerate {
            return Err(Error::Golden(format!(
                "{} exists; pass --regenerate to replace it",
                a.goldens.display()
            ))
            .into());
        }
        let s = GoldenStore::new();
        s.save(&a.goldens)?;
        s
    } else {
        GoldenStore::load(&a.goldens)?
    };
    sheet.header(&["key", "value", "note"])?;
    for (k, g) in store.iter() {
        sheet.row(&[S(k.into()), F(g.value), S(g.note.clone())])?;
    }
    Ok(())
}
