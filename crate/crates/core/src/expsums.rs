//! Direct evaluation of the Type I, `S₀` and Type II exponential sums in
//! `h·Li(·)`, and reports comparing each against its van der Corput style
//! bound.
//!
//! Phases are reduced in double-double: `Li(m)` is evaluated to ~1e-25
//! relative, multiplied by the exact integer `h`, and only the fractional
//! part is handed to `sin_cos`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::DyadicRange;
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::specfun::{e, e_dd, li_from_2_dd, li_int_dd};

/// Largest argument of `Li` the sum evaluators accept.
pub const ARG_LIMIT: u64 = 10_000_000_000;

/// Largest `|h|` accepted by the Type I evaluator.
pub const H_LIMIT: i64 = 1_000_000;

/// Terms per block in the fixed-order reductions.
const BLOCK: usize = 4096;

/// Parameters of a bound comparison; unused ones stay `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundParams {
    pub h: Option<i64>,
    pub ell: Option<u64>,
    pub n: Option<u64>,
    pub n1: Option<u64>,
    pub q: Option<i64>,
    pub k: Option<u64>,
    pub l: Option<u64>,
    pub big_k: Option<u64>,
    pub big_q: Option<u64>,
}

/// `|sum|` against the right-hand side of a bound, without implied constant.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub params: BoundParams,
}

impl BoundReport {
    pub fn new(lhs: f64, bound: f64, params: BoundParams) -> Self {
        assert!(
            lhs >= 0.0 && bound > 0.0,
            "bad report lhs={lhs} bound={bound}"
        );
        BoundReport {
            lhs,
            bound,
            ratio: lhs / bound,
            params,
        }
    }
}

/// `e(h·y)` for a double-double `y`, exact in the integer `h`.
#[inline]
pub fn phase(h: i64, y: DoubleDouble) -> Complex64 {
    e_dd(y.mul_f64(h as f64))
}

fn li_dd(m: u64) -> Result<DoubleDouble> {
    Ok(li_int_dd(m)?.dd())
}

fn sum_blocks(blocks: Vec<Complex64>) -> Complex64 {
    blocks
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

fn check_arg(m: u64) -> Result<()> {
    if m > ARG_LIMIT {
        return Err(Error::InvalidParams(format!(
            "argument {m} exceeds {ARG_LIMIT}"
        )));
    }
    Ok(())
}

fn check_linear(h: i64, ell: u64, range: &DyadicRange) -> Result<()> {
    if h.abs() > H_LIMIT {
        return Err(Error::InvalidParams(format!(
            "|h| = {} exceeds {H_LIMIT}",
            h.abs()
        )));
    }
    if ell == 0 {
        return Err(Error::InvalidParams("ell must be >= 1".into()));
    }
    check_arg(
        ell.checked_mul(range.end())
            .ok_or(Error::Overflow("linear_sum"))?,
    )
}

fn linear_block(h: i64, ell: u64, lo: u64, hi: u64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in lo..=hi {
        acc += phase(h, li_dd(n * ell)?);
    }
    Ok(acc)
}

fn block_bounds(range: &DyadicRange) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = range.start() + 1;
    while lo <= range.end() {
        let hi = (lo + BLOCK as u64 - 1).min(range.end());
        out.push((lo, hi));
        lo = hi + 1;
    }
    out
}

/// Type I sum `Σ_{N<n≤N₁} e(h·Li(nℓ))`.
pub fn linear_sum(h: i64, ell: u64, range: DyadicRange) -> Result<Complex64> {
    check_linear(h, ell, &range)?;
    if h == 0 {
        return Ok(Complex64::new(range.len() as f64, 0.0));
    }
    let blocks = block_bounds(&range)
        .into_iter()
        .map(|(lo, hi)| linear_block(h, ell, lo, hi))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_blocks(blocks))
}

/// [`linear_sum`] with blocks evaluated on the rayon pool; the reduction
/// order is the same as the serial version.
pub fn linear_sum_par(h: i64, ell: u64, range: DyadicRange) -> Result<Complex64> {
    check_linear(h, ell, &range)?;
    if h == 0 {
        return Ok(Complex64::new(range.len() as f64, 0.0));
    }
    let blocks = block_bounds(&range)
        .into_par_iter()
        .map(|(lo, hi)| linear_block(h, ell, lo, hi))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_blocks(blocks))
}

/// Right-hand side `(N|h|ℓ)^{1/2} log(Nℓ)` of the Type I bound.
pub fn linear_bound(h: i64, ell: u64, n: u64) -> f64 {
    ((n as f64) * (h.unsigned_abs() as f64) * ell as f64).sqrt() * ((n * ell) as f64).ln()
}

pub fn linear_bound_report(h: i64, ell: u64, range: DyadicRange) -> Result<BoundReport> {
    if h == 0 {
        return Err(Error::InvalidParams("the Type I bound needs h != 0".into()));
    }
    let s = linear_sum(h, ell, range)?;
    Ok(BoundReport::new(
        s.norm(),
        linear_bound(h, ell, range.start()),
        BoundParams {
            h: Some(h),
            ell: Some(ell),
            n: Some(range.start()),
            n1: Some(range.end()),
            ..Default::default()
        },
    ))
}

/// The Type I bound checked uniformly in `N₁`: the report's `lhs` is
/// `max_{N<N₁≤2N} |Σ_{N<n≤N₁} e(h·Li(nℓ))|`.
pub fn linear_sup_report(h: i64, ell: u64, n: u64) -> Result<BoundReport> {
    let range = DyadicRange::full(n)?;
    check_linear(h, ell, &range)?;
    if h == 0 {
        return Err(Error::InvalidParams("the Type I bound needs h != 0".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sup = 0.0f64;
    let mut arg_max = n + 1;
    for m in range.iter() {
        acc += phase(h, li_dd(m * ell)?);
        if acc.norm() > sup {
            sup = acc.norm();
            arg_max = m;
        }
    }
    Ok(BoundReport::new(
        sup,
        linear_bound(h, ell, n),
        BoundParams {
            h: Some(h),
            ell: Some(ell),
            n: Some(n),
            n1: Some(arg_max),
            ..Default::default()
        },
    ))
}

/// `S₀(q; k) = Σ_{L<ℓ≤2L} e(h[Li(ℓk) - Li(ℓ(k+q))])` and its report against
/// `(L h |q|)^{1/2}`. `q` may be negative as long as `k + q >= 2`.
pub fn s0_sum(h: i64, q: i64, k: u64, l: u64) -> Result<(Complex64, BoundReport)> {
    if h <= 0 || q == 0 || l < 10 || k < 2 {
        return Err(Error::InvalidParams(format!(
            "S0 needs h > 0, q != 0, k >= 2, L >= 10; got h={h} q={q} k={k} L={l}"
        )));
    }
    let kq = k as i64 + q;
    if kq < 2 {
        return Err(Error::InvalidParams(format!("k + q = {kq} must be >= 2")));
    }
    let kq = kq as u64;
    check_arg(2 * l * k.max(kq))?;
    let mut acc = Complex64::new(0.0, 0.0);
    for ell in l + 1..=2 * l {
        let diff = li_dd(ell * k)? - li_dd(ell * kq)?;
        acc += phase(h, diff);
    }
    let report = BoundReport::new(
        acc.norm(),
        ((l as f64) * h as f64 * q.unsigned_abs() as f64).sqrt(),
        BoundParams {
            h: Some(h),
            q: Some(q),
            k: Some(k),
            l: Some(l),
            ..Default::default()
        },
    );
    Ok((acc, report))
}

/// Both sides of the Weyl-van der Corput differencing inequality for
/// `z` indexed by `k = K+1, …, 2K` (so `K = z.len()`), shift parameter `Q`.
///
/// Returns `(|Σ z_k|², (K+Q)/Q · Σ_{|q|<Q} (1 - |q|/Q) Σ_k z_k conj(z_{k+q}))`.
pub fn wvdc_check(z: &[Complex64], big_q: usize) -> Result<(f64, f64)> {
    let big_k = z.len();
    if big_k == 0 || big_q == 0 || big_q > big_k {
        return Err(Error::InvalidParams(format!(
            "need 1 <= Q <= K, got Q={big_q} K={big_k}"
        )));
    }
    let total: Complex64 = z.iter().sum();
    let lhs = total.norm_sqr();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for q in -(big_q as i64 - 1)..=(big_q as i64 - 1) {
        let w = 1.0 - q.unsigned_abs() as f64 / big_q as f64;
        let mut inner = Complex64::new(0.0, 0.0);
        for k in 0..big_k as i64 {
            let j = k + q;
            if j >= 0 && j < big_k as i64 {
                let t = z[k as usize] * z[j as usize].conj();
                scale += t.norm();
                inner += t;
            }
        }
        acc += inner * w;
    }
    assert!(
        acc.im.abs() <= 1e-9 * scale.max(1.0),
        "imaginary residue {} in differenced sum",
        acc.im
    );
    let rhs = (big_k + big_q) as f64 / big_q as f64 * acc.re;
    Ok((lhs, rhs))
}

/// Coefficient sequences for a Type II sum: `alpha` on `(L, 2L]`, `beta` on
/// `(K, 2K]`, with the log-power exponents of their mean-square bounds.
#[derive(Clone, Debug)]
pub struct CoefficientPair {
    alpha: Vec<Complex64>,
    l: u64,
    beta: Vec<Complex64>,
    k: u64,
    a_exp: f64,
    b_exp: f64,
    c_alpha: f64,
    c_beta: f64,
}

/// Constant used when validating `Σ|α|² ≤ c·L·log^{2A} L`.
pub const NORM_CEILING: f64 = 10.0;

impl CoefficientPair {
    /// `alpha[i]` is `α(L + 1 + i)` and `beta[j]` is `β(K + 1 + j)`.
    pub fn new(
        alpha: Vec<Complex64>,
        l: u64,
        beta: Vec<Complex64>,
        k: u64,
        a_exp: f64,
        b_exp: f64,
    ) -> Result<Self> {
        let pair = Self::unchecked(alpha, l, beta, k, a_exp, b_exp)?;
        if pair.c_alpha > NORM_CEILING || pair.c_beta > NORM_CEILING {
            return Err(Error::InvalidParams(format!(
                "mean-square hypothesis fails: c_alpha = {}, c_beta = {}",
                pair.c_alpha, pair.c_beta
            )));
        }
        Ok(pair)
    }

    /// Like [`CoefficientPair::new`] but records the norm constants without
    /// enforcing the ceiling; short dyadic blocks can exceed it.
    pub fn unchecked(
        alpha: Vec<Complex64>,
        l: u64,
        beta: Vec<Complex64>,
        k: u64,
        a_exp: f64,
        b_exp: f64,
    ) -> Result<Self> {
        if l < 2 || k < 2 || alpha.len() as u64 != l || beta.len() as u64 != k {
            return Err(Error::InvalidParams(format!(
                "alpha must have L = {l} entries (got {}), beta K = {k} (got {}), L, K >= 2",
                alpha.len(),
                beta.len()
            )));
        }
        let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let c_alpha = norm(&alpha) / (l as f64 * (l as f64).ln().powf(2.0 * a_exp));
        let c_beta = norm(&beta) / (k as f64 * (k as f64).ln().powf(2.0 * b_exp));
        Ok(CoefficientPair {
            alpha,
            l,
            beta,
            k,
            a_exp,
            b_exp,
            c_alpha,
            c_beta,
        })
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// Recorded constants `(c_α, c_β)` of the mean-square bounds.
    pub fn norm_constants(&self) -> (f64, f64) {
        (self.c_alpha, self.c_beta)
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.a_exp, self.b_exp)
    }

    /// `K L^{5/6} h^{1/6} log^A L log^B K`.
    pub fn bound(&self, h: i64) -> f64 {
        let (l, k) = (self.l as f64, self.k as f64);
        k * l.powf(5.0 / 6.0)
            * (h as f64).powf(1.0 / 6.0)
            * l.ln().powf(self.a_exp)
            * k.ln().powf(self.b_exp)
    }

    fn check_budget(&self) -> Result<()> {
        let terms = self.l * self.k;
        if terms > 100_000_000 {
            return Err(Error::Budget {
                len: terms,
                budget: 100_000_000,
            });
        }
        check_arg(4 * self.l * self.k)
    }

    fn li_table(&self) -> Result<Vec<DoubleDouble>> {
        let mut t = Vec::with_capacity((self.l * self.k) as usize);
        for ell in self.l + 1..=2 * self.l {
            for kk in self.k + 1..=2 * self.k {
                t.push(li_dd(ell * kk)?);
            }
        }
        Ok(t)
    }

    fn eval(&self, h: i64, table: &[DoubleDouble], window: Option<(u64, u64)>) -> Complex64 {
        let kn = self.k as usize;
        (0..self.l as usize)
            .into_par_iter()
            .map(|i| {
                let a = self.alpha[i];
                if a == Complex64::new(0.0, 0.0) {
                    return Complex64::new(0.0, 0.0);
                }
                let ell = self.l + 1 + i as u64;
                let mut row = Complex64::new(0.0, 0.0);
                for j in 0..kn {
                    let b = self.beta[j];
                    if b == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    if let Some((lo, hi)) = window {
                        let m = ell * (self.k + 1 + j as u64);
                        if m <= lo || m > hi {
                            continue;
                        }
                    }
                    row += b * phase(h, table[i * kn + j]);
                }
                a * row
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    }
}

/// Type II sum `Σ_ℓ Σ_k α(ℓ) β(k) e(h·Li(ℓk))` and its report.
pub fn bilinear_sum(pair: &CoefficientPair, h: i64) -> Result<(Complex64, BoundReport)> {
    Ok(bilinear_sums(pair, &[h])?.remove(0))
}

/// [`bilinear_sum`] for several `h`, sharing one table of `Li(ℓk)`.
pub fn bilinear_sums(pair: &CoefficientPair, hs: &[i64]) -> Result<Vec<(Complex64, BoundReport)>> {
    if hs.iter().any(|&h| h <= 0) {
        return Err(Error::InvalidParams("Type II sums need h > 0".into()));
    }
    pair.check_budget()?;
    let table = pair.li_table()?;
    Ok(hs
        .iter()
        .map(|&h| {
            let s = pair.eval(h, &table, None);
            let report = BoundReport::new(
                s.norm(),
                pair.bound(h),
                BoundParams {
                    h: Some(h),
                    l: Some(pair.l),
                    big_k: Some(pair.k),
                    ..Default::default()
                },
            );
            (s, report)
        })
        .collect())
}

/// Type II sum restricted to `lo < ℓk ≤ hi`.
pub fn bilinear_sum_window(pair: &CoefficientPair, h: i64, lo: u64, hi: u64) -> Result<Complex64> {
    if h <= 0 {
        return Err(Error::InvalidParams("Type II sums need h > 0".into()));
    }
    pair.check_budget()?;
    let table = pair.li_table()?;
    Ok(pair.eval(h, &table, Some((lo, hi))))
}

/// `Σ_{N<n≤N₁} e(f(n))` for an arbitrary phase function.
pub fn vdc_sum<F: Fn(u64) -> f64>(f: F, range: DyadicRange) -> Complex64 {
    range.iter().map(|n| e(f(n))).sum()
}

/// `N Δ^{1/2} + Δ^{-1/2}`, the van der Corput second-derivative bound.
pub fn vdc_bound(n: u64, delta: f64) -> f64 {
    n as f64 * delta.sqrt() + 1.0 / delta.sqrt()
}

/// `Δ = hℓ / (N log²(Nℓ))`, the second-derivative scale of `h·Li(xℓ)` on `[N, 2N]`.
pub fn type_one_delta(h: i64, ell: u64, n: u64) -> f64 {
    let nl = (n * ell) as f64;
    h.unsigned_abs() as f64 * ell as f64 / (n as f64 * nl.ln().powi(2))
}

/// Extremes of `|f''(x)| / Δ` for `f(x) = h·Li(xℓ)` over `samples` points of
/// `[N, 2N]`, with `f''` from central differences of the double-double `Li`.
pub fn second_derivative_window(h: i64, ell: u64, n: u64, samples: usize) -> Result<(f64, f64)> {
    let delta = type_one_delta(h, ell, n);
    let f = |x: DoubleDouble| -> Result<DoubleDouble> {
        Ok(li_from_2_dd(x.mul_f64(ell as f64))?.dd().mul_f64(h as f64))
    };
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..samples.max(2) {
        let x = n as f64 * (1.0 + i as f64 / (samples.max(2) - 1) as f64);
        let step = x * 1e-4;
        let xd = DoubleDouble::from_f64(x);
        let plus = f(xd.add_f64(step))?;
        let mid = f(xd)?;
        let minus = f(xd.add_f64(-step))?;
        let second = (plus - mid.mul_f64(2.0) + minus).to_f64() / (step * step);
        let r = second.abs() / delta;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
