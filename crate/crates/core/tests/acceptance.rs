//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Derived constants are checked against `tests/goldens.tsv`; keys missing
//! from the store are recorded on the first run.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pseudotwin::counting::{pi_hat, pi_hat_table, pi_hat_via_n};
use pseudotwin::dd::DoubleDouble;
use pseudotwin::expsums::{bilinear_sum, linear_sup_report, s0_sum, wvdc_check, CoefficientPair};
use pseudotwin::golden::{GoldenOutcome, GoldenStore};
use pseudotwin::specfun::{
    fourier_coeff_g, g_weight, inverse_li, li_from_2_dd, psi_frac, psi_truncated,
};
use pseudotwin::vaughan::{
    coeff_a, coeff_b, decompose_sum, default_h, prime_exp_sum, s_total_range,
    vaughan_identity_check, VaughanParams,
};

const GOLDEN_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

struct Ctx {
    goldens: GoldenStore,
    mismatches: Vec<String>,
}

impl Ctx {
    fn golden(&mut self, key: &str, value: f64) -> bool {
        match self
            .goldens
            .check_or_record(key, value, GOLDEN_TOL, "acceptance run")
        {
            GoldenOutcome::Mismatch { stored } => {
                self.mismatches
                    .push(format!("{key}: stored {stored:e}, got {value:e}"));
                false
            }
            _ => true,
        }
    }
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() <= limit
}

fn vaughan_exactness(_: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for (u, v) in [(2u64, 2u64), (10, 10), (30, 30), (10, 50)] {
        for n in v + 1..=10_000 {
            checked += 1;
            match vaughan_identity_check(n, u, v) {
                Ok(r) if r.is_zero() => {}
                other => failures.push(format!("(u={u},v={v},n={n}): {other:?}")),
            }
        }
    }
    let fast = within(start, Duration::from_secs(60));
    Outcome::new(
        failures.is_empty() && fast,
        format!(
            "{checked} checks, {} failures{}, {:.2?}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first {f})"))
                .unwrap_or_default(),
            start.elapsed()
        ),
    )
}

fn headline(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let xs = [10_000u64, 100_000, 1_000_000, 10_000_000, 100_000_000];
    let table = match pi_hat_table(&xs) {
        Ok(t) => t,
        Err(e) => return Outcome::new(false, format!("error: {e}")),
    };
    let mut ok = within(start, Duration::from_secs(600));
    let mut parts = Vec::new();
    for w in table.windows(2) {
        ok &= (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs() + 0.05;
    }
    for r in &table {
        ok &= r.ambiguous_count == 0;
        if r.x >= 1_000_000 {
            ok &= (0.5..=1.5).contains(&r.ratio);
        }
        ok &= ctx.golden(&format!("pihat.count.{}", r.x), r.pi_hat as f64);
        ok &= ctx.golden(&format!("pihat.ratio.{}", r.x), r.ratio);
        parts.push(format!("{:e}:{:.4}", r.x as f64, r.ratio));
    }
    Outcome::new(
        ok,
        format!("ratios [{}], {:.2?}", parts.join(" "), start.elapsed()),
    )
}

fn cross_algorithm(_: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for x in [100u64, 1_000, 10_000, 100_000] {
        match (pi_hat(x), pi_hat_via_n(x)) {
            (Ok(a), Ok(b)) => {
                ok &= a.pi_hat == b && a.ambiguous_count == 0;
                parts.push(format!("{x}:{}={b}", a.pi_hat));
            }
            (a, b) => {
                ok = false;
                parts.push(format!("{x}: {a:?} / {b:?}"));
            }
        }
    }
    ok &= within(start, Duration::from_secs(30));
    Outcome::new(ok, format!("{}, {:.2?}", parts.join(" "), start.elapsed()))
}

fn wvdc(_: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut violations = 0;
    let mut checks = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=64usize);
        let z: Vec<Complex64> = (0..k)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for q in 1..=k {
            let (lhs, rhs) = wvdc_check(&z, q).expect("valid Q");
            checks += 1;
            if lhs > rhs * (1.0 + 1e-9) {
                violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0,
        format!("1000 sequences, {checks} (z, Q) checks, {violations} violations"),
    )
}

fn bound_ratios(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let mut linear_sup = 0.0f64;
    for h in [1i64, 2, 4, 16, 64] {
        for ell in [1u64, 3, 10] {
            for n in [1u64 << 10, 1 << 12, 1 << 14] {
                let r = linear_sup_report(h, ell, n).expect("linear grid");
                linear_sup = linear_sup.max(r.ratio);
            }
        }
    }
    let mut s0_sup = 0.0f64;
    for h in 1..=4i64 {
        for q in 1..=4i64 {
            for k in [5u64, 50, 500] {
                for l in [1u64 << 7, 1 << 10] {
                    let (_, r) = s0_sum(h, q, k, l).expect("s0 grid");
                    s0_sup = s0_sup.max(r.ratio);
                }
            }
        }
    }
    // α = a(ℓ) (A = 3/2) against β = Λ (B = 1/2), then α = b(r) (A = 1)
    // against β = 1 (B = 0); u = v = 32 so that a and b are both non-trivial.
    let (u, v) = (32u64, 32u64);
    let size = 1u64 << 8;
    let a: Vec<Complex64> = (size + 1..=2 * size)
        .map(|l| Complex64::new(coeff_a(l, u).unwrap() as f64, 0.0))
        .collect();
    let lam: Vec<Complex64> = (size + 1..=2 * size)
        .map(|k| {
            let f = pseudotwin::vaughan::factor(k);
            Complex64::new(
                if f.len() == 1 {
                    (f[0].0 as f64).ln()
                } else {
                    0.0
                },
                0.0,
            )
        })
        .collect();
    let b: Vec<Complex64> = (size + 1..=2 * size)
        .map(|r| Complex64::new(coeff_b(r, u, v).unwrap().value(), 0.0))
        .collect();
    let ones = vec![Complex64::new(1.0, 0.0); size as usize];
    let mut bilinear_sup = 0.0f64;
    let pairs = [
        CoefficientPair::new(a, size, lam, size, 1.5, 0.5),
        CoefficientPair::new(b, size, ones, size, 1.0, 0.0),
    ];
    for pair in pairs {
        let pair = match pair {
            Ok(p) => p,
            Err(e) => return Outcome::new(false, format!("coefficient pair rejected: {e}")),
        };
        for h in 1..=8 {
            let (_, r) = bilinear_sum(&pair, h).expect("bilinear grid");
            bilinear_sup = bilinear_sup.max(r.ratio);
        }
    }
    let mut ok = linear_sup <= 10.0 && s0_sup <= 10.0 && bilinear_sup <= 10.0;
    ok &= ctx.golden("bound.linear.sup", linear_sup);
    ok &= ctx.golden("bound.s0.sup", s0_sup);
    ok &= ctx.golden("bound.bilinear.sup", bilinear_sup);
    Outcome::new(
        ok,
        format!(
            "sup ratios linear {linear_sup:.4}, S0 {s0_sup:.4}, bilinear {bilinear_sup:.3e}, {:.2?}",
            start.elapsed()
        ),
    )
}

fn transport(_: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(64..=1u64 << 14);
        let n2 = rng.gen_range(n + 1..=2 * n);
        let u = rng.gen_range(0..=200u64);
        let v = rng.gen_range(0..=200u64.min(n));
        let h = rng.gen_range(1..=100i64);
        let p = VaughanParams::new(u, v, n, n2, 1).expect("valid draw");
        let d = decompose_sum(h, &p).expect("decompose");
        let direct = prime_exp_sum(h, n, n2).expect("direct");
        worst = worst.max((d.total - direct).norm() / direct.norm());
    }
    Outcome::new(
        worst <= 1e-6,
        format!("50 draws, worst relative gap {worst:.3e}"),
    )
}

fn power_saving(ctx: &mut Ctx) -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::new();
    let mut ok = true;
    for e in [10u32, 13, 16] {
        let n = 1u64 << e;
        let s = s_total_range(n, 2 * n, default_h(n)).expect("s_total");
        let key = format!("stotal.power_ratio.{}.{}.{}", s.n, s.n2, s.h_max);
        ok &= ctx.golden(&key, s.power_ratio);
        ratios.push((e, s.h_max, s.power_ratio, s.log_ratio));
    }
    for w in ratios.windows(2) {
        ok &= w[1].2 < 3.0 * w[0].2;
    }
    let desc: Vec<String> = ratios
        .iter()
        .map(|(e, h, r, l)| format!("2^{e} (H={h}): {r:.4} [S logN/N {l:.3}]"))
        .collect();
    Outcome::new(
        ok,
        format!("power ratios {}, {:.2?}", desc.join(", "), start.elapsed()),
    )
}

fn special_functions(_: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let y: f64 = rng.gen_range(0.0..=1e7);
        let p = inverse_li(y).expect("inverse");
        let back = li_from_2_dd(p.dd()).expect("li").value();
        worst = worst.max((back - y).abs());
    }
    let mut worst_deriv = 0.0f64;
    for i in 0..100 {
        // log-spaced points in [3, 1e9]
        let x = 3f64 * (1e9f64 / 3.0).powf(i as f64 / 99.0);
        let h = x * 1e-4;
        let xd = DoubleDouble::from_f64(x);
        let up = li_from_2_dd(xd.add_f64(h)).unwrap().dd();
        let down = li_from_2_dd(xd.add_f64(-h)).unwrap().dd();
        let fd = (up - down).to_f64() / (2.0 * h);
        worst_deriv = worst_deriv.max((fd * x.ln() - 1.0).abs());
    }
    Outcome::new(
        worst <= 1e-8 && worst_deriv <= 1e-6,
        format!("round-trip worst {worst:.3e}, derivative worst relative {worst_deriv:.3e}"),
    )
}

fn psi_g(ctx: &mut Ctx) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut c_trunc = 0.0f64;
    for big_h in [16u32, 256] {
        let m = 20_000;
        for i in 0..m {
            let theta = (i as f64 + 0.37) / m as f64;
            let err = (psi_frac(theta) - psi_truncated(theta, big_h).unwrap()).abs();
            c_trunc = c_trunc.max(err / g_weight(theta, big_h));
        }
    }
    ok &= c_trunc <= 2.0;
    ok &= ctx.golden("psi.truncation.c", c_trunc);
    parts.push(format!("truncation C {c_trunc:.4}"));
    for big_h in [16u32, 256] {
        let hf = big_h as f64;
        let mut hs: Vec<i64> = (0..=32).collect();
        let mut h = 48i64;
        while h <= 16 * big_h as i64 {
            hs.push(h);
            h = h * 3 / 2;
        }
        let mut c = 0.0f64;
        for h in hs {
            let a = fourier_coeff_g(h, big_h).unwrap();
            let shape = if h == 0 {
                (2.0 * hf).ln() / hf
            } else {
                ((2.0 * hf).ln() / hf).min(hf / (h * h) as f64)
            };
            c = c.max(a.abs() / shape);
        }
        ok &= c <= 10.0;
        ok &= ctx.golden(&format!("g.coeff.c.H{big_h}"), c);
        parts.push(format!("a_h constant at H={big_h} {c:.4}"));
    }
    Outcome::new(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("goldens.tsv");
    let goldens = match GoldenStore::load_or_new(&path) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("cannot load goldens: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut ctx = Ctx {
        goldens,
        mismatches: Vec::new(),
    };
    type Check = fn(&mut Ctx) -> Outcome;
    let criteria: [(&str, Check); 9] = [
        ("Vaughan identity exactness", vaughan_exactness),
        ("headline asymptotic of pi_hat", headline),
        ("cross-algorithm pi_hat oracle", cross_algorithm),
        ("Weyl-van der Corput inequality", wvdc),
        ("bound-ratio suites", bound_ratios),
        ("decomposition transport", transport),
        ("power-saving trend", power_saving),
        ("special-function round-trip", special_functions),
        ("psi/g machinery", psi_g),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = check(&mut ctx);
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag}: {name}: {}", i + 1, out.detail);
        failed += !out.pass as usize;
    }
    for m in &ctx.mismatches {
        println!("golden mismatch: {m}");
    }
    if ctx.goldens.is_dirty() {
        if let Err(e) = ctx.goldens.save(&path) {
            eprintln!("cannot save goldens: {e}");
            return ExitCode::FAILURE;
        }
        println!("recorded new goldens in {}", path.display());
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
