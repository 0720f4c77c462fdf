//! Vaughan's identity for `Λ(n)`, `n > v`:
//!
//! ```text
//! Λ(n) = Σ_{kℓ=n, k>v, ℓ>u} Λ(k) a(ℓ) + Σ_{kℓ=n, ℓ≤u} μ(ℓ) log k - Σ_{kr=n, r≤uv} b(r)
//! a(ℓ) = Σ_{d|ℓ, d>u} μ(d),    b(r) = Σ_{ℓm=r, ℓ≤v, m≤u} Λ(ℓ) μ(m)
//! ```
//!
//! Every term is an integer combination of `log p`, so the identity is checked
//! exactly in a [`LogPrimeVector`]. The same decomposition is then transported
//! through the weight `e(h·Li(n))` to split the prime exponential sum into the
//! bilinear pieces `S₁`, `S₂`, `S₃ = S₄ + S₅`.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{sieve_slice_with_budget, ArithSlice};
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::expsums::{bilinear_sum_window, phase, CoefficientPair};
use crate::specfun::li_int_dd;

/// `Σ m_p log p` with integer coefficients, held exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogPrimeVector(BTreeMap<u64, i64>);

impl LogPrimeVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `m · log p`.
    pub fn log_prime(p: u64, m: i64) -> Self {
        let mut v = Self::zero();
        v.add_term(p, m);
        v
    }

    /// `log n` from its factorization.
    pub fn log_of(factors: &[(u64, u32)]) -> Self {
        let mut v = Self::zero();
        for &(p, k) in factors {
            v.add_term(p, k as i64);
        }
        v
    }

    pub fn add_term(&mut self, p: u64, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.0.entry(p).or_insert(0);
        *e += m;
        if *e == 0 {
            self.0.remove(&p);
        }
    }

    pub fn scaled(&self, m: i64) -> Self {
        let mut v = Self::zero();
        for (&p, &c) in &self.0 {
            v.add_term(p, c * m);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficient(&self, p: u64) -> i64 {
        self.0.get(&p).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.0.iter().map(|(&p, &m)| (p, m))
    }

    pub fn value(&self) -> f64 {
        self.0
            .iter()
            .map(|(&p, &m)| m as f64 * (p as f64).ln())
            .sum()
    }
}

impl AddAssign<&LogPrimeVector> for LogPrimeVector {
    fn add_assign(&mut self, rhs: &LogPrimeVector) {
        for (&p, &m) in &rhs.0 {
            self.add_term(p, m);
        }
    }
}

impl Add for LogPrimeVector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += &rhs;
        self
    }
}

impl Neg for LogPrimeVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scaled(-1)
    }
}

impl Sub for LogPrimeVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Factorization by trial division.
pub fn factor(n: u64) -> Vec<(u64, u32)> {
    let mut m = n;
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut k = 0;
            while m.is_multiple_of(p) {
                m /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// A divisor together with its exponent vector against the parent's primes.
#[derive(Clone, Debug)]
struct Divisor {
    d: u64,
    exps: Vec<u32>,
}

impl Divisor {
    fn moebius(&self) -> i64 {
        if self.exps.iter().any(|&e| e >= 2) {
            0
        } else if self.exps.iter().filter(|&&e| e == 1).count() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Prime `p` when the divisor is `p^k` with `k >= 1`.
    fn prime_power_base(&self, primes: &[u64]) -> Option<u64> {
        let mut nz = self.exps.iter().enumerate().filter(|(_, &e)| e > 0);
        match (nz.next(), nz.next()) {
            (Some((i, _)), None) => Some(primes[i]),
            _ => None,
        }
    }

    fn sub_divisors(&self, primes: &[u64]) -> Vec<Divisor> {
        enumerate_divisors(primes, &self.exps)
    }

    fn cofactor(&self, parent: &[u32], primes: &[u64]) -> Divisor {
        let exps: Vec<u32> = parent.iter().zip(&self.exps).map(|(a, b)| a - b).collect();
        let d = primes.iter().zip(&exps).map(|(&p, &e)| p.pow(e)).product();
        Divisor { d, exps }
    }
}

fn enumerate_divisors(primes: &[u64], exps: &[u32]) -> Vec<Divisor> {
    let mut out = vec![Divisor {
        d: 1,
        exps: vec![0; primes.len()],
    }];
    for (i, (&p, &e)) in primes.iter().zip(exps).enumerate() {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for div in &out {
            let mut d = div.d;
            for k in 0..=e {
                let mut ex = div.exps.clone();
                ex[i] = k;
                next.push(Divisor { d, exps: ex });
                d *= p;
            }
        }
        out = next;
    }
    out
}

fn split_factors(n: u64) -> (Vec<u64>, Vec<u32>) {
    factor(n).into_iter().unzip()
}

/// `a(ℓ) = Σ_{d|ℓ, d>u} μ(d)`; `|a(ℓ)| ≤ d(ℓ)`.
pub fn coeff_a(ell: u64, u: u64) -> Result<i64> {
    if !(1..=100_000_000).contains(&ell) {
        return Err(Error::InvalidParams(format!(
            "coeff_a needs 1 <= ell <= 1e8, got {ell}"
        )));
    }
    let (primes, exps) = split_factors(ell);
    let divs = enumerate_divisors(&primes, &exps);
    let a: i64 = divs.iter().filter(|d| d.d > u).map(Divisor::moebius).sum();
    assert!(a.unsigned_abs() <= divs.len() as u64);
    Ok(a)
}

fn coeff_b_from(r: &Divisor, primes: &[u64], u: u64, v: u64) -> LogPrimeVector {
    let mut out = LogPrimeVector::zero();
    for ell in r.sub_divisors(primes) {
        if ell.d > v {
            continue;
        }
        let m = ell.cofactor(&r.exps, primes);
        if m.d > u {
            continue;
        }
        if let Some(p) = ell.prime_power_base(primes) {
            out.add_term(p, m.moebius());
        }
    }
    out
}

/// `b(r) = Σ_{ℓm=r, ℓ≤v, m≤u} Λ(ℓ) μ(m)`, exactly.
pub fn coeff_b(r: u64, u: u64, v: u64) -> Result<LogPrimeVector> {
    if r < 1 {
        return Err(Error::InvalidParams("coeff_b needs r >= 1".into()));
    }
    let (primes, exps) = split_factors(r);
    let rd = Divisor { d: r, exps };
    let b = coeff_b_from(&rd, &primes, u, v);
    assert!(
        b.value().abs() <= (r as f64).ln() + 1e-9,
        "|b({r})| exceeds log r"
    );
    Ok(b)
}

/// The right-hand side of the identity minus `Λ(n)`, in exact arithmetic.
/// Zero for every `n > v`.
pub fn vaughan_identity_check(n: u64, u: u64, v: u64) -> Result<LogPrimeVector> {
    if n <= v {
        return Err(Error::InvalidParams(format!(
            "identity needs n > v, got n={n} v={v}"
        )));
    }
    let (primes, exps) = split_factors(n);
    let divs = enumerate_divisors(&primes, &exps);

    let mut type_ii = LogPrimeVector::zero();
    let mut type_i = LogPrimeVector::zero();
    let mut convolution = LogPrimeVector::zero();
    for ell in &divs {
        let k = ell.cofactor(&exps, &primes);
        // Σ_{k>v, ℓ>u} Λ(k) a(ℓ)
        if ell.d > u && k.d > v {
            if let Some(p) = k.prime_power_base(&primes) {
                let a: i64 = ell
                    .sub_divisors(&primes)
                    .iter()
                    .filter(|d| d.d > u)
                    .map(Divisor::moebius)
                    .sum();
                type_ii.add_term(p, a);
            }
        }
        // Σ_{ℓ≤u} μ(ℓ) log k, with log k = Σ_{d|k} Λ(d)
        if ell.d <= u {
            let mu = ell.moebius();
            if mu != 0 {
                for (i, &e) in k.exps.iter().enumerate() {
                    type_i.add_term(primes[i], mu * e as i64);
                }
            }
        }
        // Σ_{kr=n} b(r) with r = ℓ here
        convolution += &coeff_b_from(ell, &primes, u, v);
    }

    let mut lambda = LogPrimeVector::zero();
    if primes.len() == 1 {
        lambda.add_term(primes[0], 1);
    }
    Ok(type_ii + type_i - convolution - lambda)
}

/// Parameters of the decomposition over `N < n ≤ N₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VaughanParams {
    pub u: u64,
    pub v: u64,
    pub n: u64,
    pub n2: u64,
    pub h_max: u32,
}

impl VaughanParams {
    pub fn new(u: u64, v: u64, n: u64, n2: u64, h_max: u32) -> Result<Self> {
        if n < 2 || n2 <= n || n2 > 2 * n {
            return Err(Error::InvalidParams(format!(
                "need 2 <= N < N2 <= 2N, got N={n} N2={n2}"
            )));
        }
        if v > n {
            return Err(Error::InvalidParams(format!(
                "need v <= N, got v={v} N={n}"
            )));
        }
        if h_max == 0 {
            return Err(Error::InvalidParams("H must be >= 1".into()));
        }
        Ok(VaughanParams { u, v, n, n2, h_max })
    }

    /// `u = v = ⌊N^{5/11}⌋`, `H = ⌈log⁴ N⌉`.
    pub fn standard(n: u64, n2: u64) -> Result<Self> {
        let uv = default_cut(n);
        Self::new(uv, uv, n, n2, default_h(n))
    }
}

/// `⌊N^{5/11}⌋`, corrected for floating rounding.
pub fn default_cut(n: u64) -> u64 {
    let mut c = (n as f64).powf(5.0 / 11.0).floor() as u64;
    while (c as f64 + 1.0).powi(11) <= (n as f64).powi(5) {
        c += 1;
    }
    while c > 0 && (c as f64).powi(11) > (n as f64).powi(5) {
        c -= 1;
    }
    c
}

/// `⌈log⁴ N⌉`.
pub fn default_h(n: u64) -> u32 {
    (n as f64).ln().powi(4).ceil() as u32
}

/// Phases `e(h·Li(m))` for `N < m ≤ N₂`, from a double-double `Li` table.
pub struct PhaseTable {
    n: u64,
    li: Vec<DoubleDouble>,
}

impl PhaseTable {
    pub fn new(n: u64, n2: u64) -> Result<Self> {
        let li = (n + 1..=n2)
            .into_par_iter()
            .map(|m| li_int_dd(m).map(|x| x.dd()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseTable { n, li })
    }

    /// Only the given integers get a `Li` value; others are left at zero.
    fn sparse(n: u64, n2: u64, keep: impl Fn(u64) -> bool + Sync) -> Result<Self> {
        let li = (n + 1..=n2)
            .into_par_iter()
            .map(|m| {
                if keep(m) {
                    li_int_dd(m).map(|x| x.dd())
                } else {
                    Ok(DoubleDouble::ZERO)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseTable { n, li })
    }

    pub fn phases(&self, h: i64) -> Vec<Complex64> {
        self.li.iter().map(|&y| phase(h, y)).collect()
    }

    fn li(&self, m: u64) -> DoubleDouble {
        self.li[(m - self.n - 1) as usize]
    }
}

fn budget_check(n2: u64, limit: u64) -> Result<()> {
    if n2 > limit {
        return Err(Error::Budget {
            len: n2,
            budget: limit,
        });
    }
    Ok(())
}

fn slice_for(lo: u64, hi_incl: u64) -> Result<ArithSlice> {
    sieve_slice_with_budget(lo, hi_incl + 1, u64::MAX)
}

/// `Σ_{N<n≤N₂} Λ(n) e(h·Li(n))`.
pub fn prime_exp_sum(h: i64, n: u64, n2: u64) -> Result<Complex64> {
    if n < 1 || n2 <= n {
        return Err(Error::InvalidParams(format!(
            "need 1 <= N < N2, got N={n} N2={n2}"
        )));
    }
    budget_check(n2, 100_000_000)?;
    let slice = slice_for(n + 1, n2)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, lam) in slice.prime_powers() {
        acc += lam * phase(h, li_int_dd(m)?.dd());
    }
    Ok(acc)
}

/// The pieces of the decomposed prime exponential sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub s1: Complex64,
    pub s2: Complex64,
    pub s3: Complex64,
    pub s4: Complex64,
    pub s5: Complex64,
    /// `S₁ + S₂ - S₃`.
    pub total: Complex64,
}

/// Coefficient tables shared by the numerical pieces.
struct Tables {
    slice: ArithSlice,
    a: Vec<i64>,
    b: Vec<f64>,
}

fn build_tables(p: &VaughanParams) -> Result<Tables> {
    let slice = slice_for(1, p.n2)?;
    // a(ℓ) is only needed for ℓ ≤ N₂ / (v + 1)
    let l_max = (p.n2 / (p.v + 1)) as usize;
    let mut a = vec![0i64; l_max + 1];
    for d in (p.u + 1) as usize..=l_max {
        let mu = slice.moebius(d as u64) as i64;
        if mu != 0 {
            let mut m = d;
            while m <= l_max {
                a[m] += mu;
                m += d;
            }
        }
    }
    let r_max = p.u.saturating_mul(p.v).min(p.n2) as usize;
    let mut b = vec![0.0f64; r_max + 1];
    for ell in 1..=(p.v as usize).min(r_max) {
        let lam = slice.mangoldt(ell as u64);
        if lam == 0.0 {
            continue;
        }
        for m in 1..=(p.u as usize).min(r_max / ell) {
            let mu = slice.moebius(m as u64);
            if mu != 0 {
                b[ell * m] += lam * mu as f64;
            }
        }
    }
    Ok(Tables { slice, a, b })
}

// Σ_{r in rs} c(r) Σ_{k: N < kr ≤ N₂} w(k) E[kr]
fn convolve<C, W>(
    p: &VaughanParams,
    e: &[Complex64],
    rs: std::ops::RangeInclusive<u64>,
    c: C,
    w: W,
) -> Complex64
where
    C: Fn(u64) -> f64 + Sync,
    W: Fn(u64) -> f64 + Sync,
{
    let rows: Vec<Complex64> = rs
        .into_par_iter()
        .map(|r| {
            let cr = c(r);
            if cr == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            let k0 = p.n / r + 1;
            let k1 = p.n2 / r;
            for k in k0..=k1 {
                let wk = w(k);
                if wk != 0.0 {
                    acc += wk * e[(k * r - p.n - 1) as usize];
                }
            }
            acc * cr
        })
        .collect();
    rows.into_iter().sum()
}

fn decompose_with(p: &VaughanParams, t: &Tables, e: &[Complex64]) -> Decomposition {
    let l_max = (p.n2 / (p.v + 1)).max(p.u);
    let s1 = convolve(
        p,
        e,
        p.u + 1..=l_max,
        |ell| t.a.get(ell as usize).copied().unwrap_or(0) as f64,
        |k| if k > p.v { t.slice.mangoldt(k) } else { 0.0 },
    );
    let s2 = convolve(
        p,
        e,
        1..=p.u.min(p.n2),
        |ell| t.slice.moebius(ell) as f64,
        |k| (k as f64).ln(),
    );
    let b = |r: u64| t.b.get(r as usize).copied().unwrap_or(0.0);
    let r_max = (t.b.len() as u64).saturating_sub(1);
    let s4 = convolve(p, e, 1..=p.u.min(r_max), b, |_| 1.0);
    let s5 = convolve(p, e, p.u + 1..=r_max, b, |_| 1.0);
    let s3 = s4 + s5;
    Decomposition {
        s1,
        s2,
        s3,
        s4,
        s5,
        total: s1 + s2 - s3,
    }
}

/// Splits `Σ_{N<n≤N₂} Λ(n) e(h·Li(n))` into `S₁ + S₂ - S₃`.
pub fn decompose_sum(h: i64, params: &VaughanParams) -> Result<Decomposition> {
    budget_check(params.n2, 20_000_000)?;
    let tables = build_tables(params)?;
    let e = PhaseTable::new(params.n, params.n2)?.phases(h);
    Ok(decompose_with(params, &tables, &e))
}

/// A dyadic block `(K, 2K] × (L, 2L]` of the `S₁` sum, with `K ≤ L` after
/// orienting; `swapped` records whether the Λ-variable is the longer side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct S1Block {
    /// Dyadic start of the Λ-weighted variable `k`.
    pub k_start: u64,
    /// Dyadic start of the `a`-weighted variable `ℓ`.
    pub l_start: u64,
    pub swapped: bool,
}

impl S1Block {
    /// `(K, L)` with `K ≤ L`.
    pub fn short_long(&self) -> (u64, u64) {
        if self.swapped {
            (self.l_start, self.k_start)
        } else {
            (self.k_start, self.l_start)
        }
    }
}

fn dyadic_starts(lo_excl: u64, hi_incl: u64) -> Vec<u64> {
    // blocks (D, 2D] meeting (lo_excl, hi_incl], D a power of two times lo_excl
    let mut out = Vec::new();
    let mut d = lo_excl.max(1);
    while d < hi_incl {
        out.push(d);
        d *= 2;
    }
    out
}

/// The dyadic blocks covering `k > v, ℓ > u, N < kℓ ≤ N₂`.
pub fn s1_blocks(p: &VaughanParams) -> Vec<S1Block> {
    let mut out = Vec::new();
    let l_hi = p.n2 / (p.v + 1);
    let k_hi = p.n2 / (p.u + 1);
    for &k in &dyadic_starts(p.v, k_hi) {
        for &l in &dyadic_starts(p.u, l_hi) {
            // products in the block lie in (kl, 4kl]
            if k * l >= p.n2 || 4 * k * l <= p.n {
                continue;
            }
            out.push(S1Block {
                k_start: k,
                l_start: l,
                swapped: k > l,
            });
        }
    }
    out
}

/// `S₁` recomputed block by block through the windowed Type II evaluator.
pub fn s1_via_blocks(h: i64, p: &VaughanParams) -> Result<Complex64> {
    let t = build_tables(p)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for blk in s1_blocks(p) {
        let (k, l) = (blk.k_start, blk.l_start);
        let beta: Vec<Complex64> = (k + 1..=2 * k)
            .map(|m| {
                let lam = if m > p.v && m <= p.n2 {
                    t.slice.mangoldt(m)
                } else {
                    0.0
                };
                Complex64::new(lam, 0.0)
            })
            .collect();
        let alpha: Vec<Complex64> = (l + 1..=2 * l)
            .map(|m| Complex64::new(t.a.get(m as usize).copied().unwrap_or(0) as f64, 0.0))
            .collect();
        let pair = CoefficientPair::unchecked(alpha, l, beta, k, 1.5, 0.5)?;
        acc += bilinear_sum_window(&pair, h, p.n, p.n2)?;
    }
    Ok(acc)
}

/// `S = Σ_{0<h≤H} |Σ_{N<n≤N₂} Λ(n) e(h·Li(n))|` and its comparisons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct STotal {
    pub n: u64,
    pub n2: u64,
    pub h_max: u32,
    pub s: f64,
    /// `S / N^{21/22}`.
    pub power_ratio: f64,
    /// `S log N / N`.
    pub log_ratio: f64,
}

pub fn s_total(params: &VaughanParams) -> Result<STotal> {
    s_total_range(params.n, params.n2, params.h_max)
}

/// [`s_total`] for an explicit range and truncation; `H = 0` gives `S = 0`.
pub fn s_total_range(n: u64, n2: u64, h_max: u32) -> Result<STotal> {
    if n < 2 || n2 <= n || n2 > 2 * n {
        return Err(Error::InvalidParams(format!(
            "need 2 <= N < N2 <= 2N, got N={n} N2={n2}"
        )));
    }
    let work = (n2 - n).saturating_mul(h_max as u64);
    if work > 50_000_000_000 {
        return Err(Error::Budget {
            len: work,
            budget: 50_000_000_000,
        });
    }
    let slice = slice_for(n + 1, n2)?;
    let table = PhaseTable::sparse(n, n2, |m| slice.mangoldt(m) != 0.0)?;
    let terms: Vec<(f64, DoubleDouble)> = slice
        .prime_powers()
        .map(|(m, lam)| (lam, table.li(m)))
        .collect();
    let mags: Vec<f64> = (1..=h_max as i64)
        .into_par_iter()
        .map(|h| {
            terms
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, &(lam, y)| {
                    acc + lam * phase(h, y)
                })
                .norm()
        })
        .collect();
    let s: f64 = mags.into_iter().sum();
    let nf = n as f64;
    Ok(STotal {
        n,
        n2,
        h_max,
        s,
        power_ratio: s / nf.powf(21.0 / 22.0),
        log_ratio: s * nf.ln() / nf,
    })
}
