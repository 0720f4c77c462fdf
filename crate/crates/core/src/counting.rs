//! `π̂(x)`: primes `p ≤ x` with `p = ⌊iL(n)⌋` for some integer `n ≥ 0`.
//!
//! Two routes are provided. The indicator route walks primes and tests whether
//! `[Li(p), Li(p+1))` contains an integer; the inverse route walks `n` and
//! floors `iL(n)`. They share no code beyond the `Li` evaluator and the sieve.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{
    isqrt, primes_in_segment, primes_up_to, segments, sieve_slice, DyadicRange, SEGMENT_SIZE,
};
use crate::dd::CompensatedSum;
use crate::error::{Error, Result};
use crate::expsums::phase;
use crate::specfun::{floor_inverse_li, floor_li, g_weight, li_int_dd, FourierTruncation};

pub const PI_HAT_LIMIT: u64 = 1_000_000_000;
pub const VIA_N_LIMIT: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountRecord {
    pub x: u64,
    pub pi_hat: u64,
    /// `x / log² x`.
    pub model: f64,
    pub ratio: f64,
    pub ambiguous_count: u64,
}

impl CountRecord {
    fn new(x: u64, pi_hat: u64, ambiguous_count: u64) -> Self {
        let l = (x as f64).ln();
        let model = x as f64 / (l * l);
        CountRecord {
            x,
            pi_hat,
            model,
            ratio: pi_hat as f64 / model,
            ambiguous_count,
        }
    }
}

/// Whether `[Li(p), Li(p+1))` holds an integer, and whether that was certain.
fn indicator(p: u64) -> Result<(bool, bool)> {
    let a = floor_li(p)?;
    let b = floor_li(p + 1)?;
    let diff = b.value - a.value;
    debug_assert!(
        diff == 0 || diff == 1,
        "interval at {p} holds {diff} integers"
    );
    Ok((diff == 1, a.ambiguous || b.ambiguous))
}

/// Per-segment hits `(p, ambiguous)` in ascending order.
fn hits_up_to(x: u64) -> Result<(Vec<u64>, u64)> {
    let base = primes_up_to(isqrt(x));
    let parts = segments(x, SEGMENT_SIZE)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut hits = Vec::new();
            let mut amb = 0u64;
            for p in primes_in_segment(lo, hi, &base) {
                let (hit, ambiguous) = indicator(p)?;
                if hit {
                    hits.push(p);
                }
                amb += ambiguous as u64;
            }
            Ok((hits, amb))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all = Vec::new();
    let mut amb = 0;
    for (h, a) in parts {
        all.extend(h);
        amb += a;
    }
    Ok((all, amb))
}

fn check_x(x: u64) -> Result<()> {
    if x < 2 {
        return Err(Error::InvalidParams(format!(
            "pi_hat needs x >= 2, got {x}"
        )));
    }
    if x > PI_HAT_LIMIT {
        return Err(Error::Budget {
            len: x,
            budget: PI_HAT_LIMIT,
        });
    }
    Ok(())
}

/// `π̂(x)` by the interval indicator `⌊Li(p+1)⌋ - ⌊Li(p)⌋` over sieved primes.
pub fn pi_hat(x: u64) -> Result<CountRecord> {
    Ok(pi_hat_table(&[x])?.remove(0))
}

/// One record per checkpoint, from a single sieve sweep up to the largest.
pub fn pi_hat_table(checkpoints: &[u64]) -> Result<Vec<CountRecord>> {
    let Some(&max) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "checkpoints must be strictly ascending".into(),
        ));
    }
    check_x(checkpoints[0])?;
    check_x(max)?;
    let base = primes_up_to(isqrt(max));
    // Ambiguity is tracked per prime so each checkpoint sees its own prefix.
    let parts = segments(max, SEGMENT_SIZE)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut hits = Vec::new();
            let mut amb = Vec::new();
            for p in primes_in_segment(lo, hi, &base) {
                let (hit, ambiguous) = indicator(p)?;
                if hit {
                    hits.push(p);
                }
                if ambiguous {
                    amb.push(p);
                }
            }
            Ok((hits, amb))
        })
        .collect::<Result<Vec<_>>>()?;
    let (hits, amb): (Vec<u64>, Vec<u64>) =
        parts
            .into_iter()
            .fold((Vec::new(), Vec::new()), |(mut h, mut a), (ph, pa)| {
                h.extend(ph);
                a.extend(pa);
                (h, a)
            });
    Ok(checkpoints
        .iter()
        .map(|&x| {
            let n = hits.partition_point(|&p| p <= x) as u64;
            let a = amb.partition_point(|&p| p <= x) as u64;
            CountRecord::new(x, n, a)
        })
        .collect())
}

/// The primes counted by `π̂(x)`, ascending.
pub fn pi_hat_primes(x: u64) -> Result<Vec<u64>> {
    check_x(x)?;
    Ok(hits_up_to(x)?.0)
}

/// `π̂(x)` by flooring `iL(n)` for `n = 0, 1, …` and keeping distinct primes.
pub fn pi_hat_via_n(x: u64) -> Result<u64> {
    if x < 2 {
        return Err(Error::InvalidParams(format!(
            "pi_hat_via_n needs x >= 2, got {x}"
        )));
    }
    if x > VIA_N_LIMIT {
        return Err(Error::Budget {
            len: x,
            budget: VIA_N_LIMIT,
        });
    }
    let slice = sieve_slice(2, x + 1)?;
    // ⌊iL(n)⌋ ≤ x exactly when n < Li(x + 1)
    let n_max = floor_li(x + 1)?;
    if n_max.ambiguous {
        return Err(Error::Ambiguous(x + 1));
    }
    let found = (0..=n_max.value as u64)
        .into_par_iter()
        .map(|n| {
            let f = floor_inverse_li(n)?;
            if f.ambiguous {
                return Err(Error::Ambiguous(n));
            }
            let p = f.value as u64;
            Ok((p <= x && slice.is_prime(p)).then_some(p))
        })
        .collect::<Result<Vec<_>>>()?;
    let distinct: BTreeSet<u64> = found.into_iter().flatten().collect();
    Ok(distinct.len() as u64)
}

/// The sum `Σ = Σ Λ(n)[ψ(Li(n)) - ψ(Li(n+1))]` over a dyadic range, its
/// truncated Fourier model and the truncation weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaReport {
    pub range: DyadicRange,
    pub h_max: u32,
    pub sigma: f64,
    /// `Σ Λ(n) Σ_{0<|h|≤H} c_h [e(h Li(n)) - e(h Li(n+1))]`.
    pub sigma1: Complex64,
    /// `Σ Λ(n) [g(Li(n), H) + g(Li(n+1), H)]`.
    pub sigma2: f64,
    /// `|Σ - Re Σ₁| / Σ₂`, the constant realized by this range.
    pub realized_c: f64,
    /// `Σ log² N / N`.
    pub target_ratio: f64,
}

pub fn sigma_terms(range: DyadicRange, h_max: u32) -> Result<SigmaReport> {
    if 2 * range.start() > VIA_N_LIMIT {
        return Err(Error::Budget {
            len: 2 * range.start(),
            budget: VIA_N_LIMIT,
        });
    }
    let trunc = FourierTruncation::new(h_max)?;
    let slice = sieve_slice(range.start() + 1, range.end() + 1)?;
    let terms: Vec<(f64, f64, f64, Complex64)> = slice
        .prime_powers()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(n, lam)| {
            let a = li_int_dd(n)?.dd();
            let b = li_int_dd(n + 1)?.dd();
            // ψ(a) - ψ(b) = {a} - {b}
            let direct = a.fract() - b.fract();
            let pa: Vec<Complex64> = (1..=h_max as i64).map(|h| phase(h, a)).collect();
            let pb: Vec<Complex64> = (1..=h_max as i64).map(|h| phase(h, b)).collect();
            let model = trunc.eval_phases(&pa) - trunc.eval_phases(&pb);
            let weight = g_weight(a.fract(), h_max) + g_weight(b.fract(), h_max);
            Ok((lam, direct, weight, model))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sigma = CompensatedSum::new();
    let mut sigma2 = CompensatedSum::new();
    let mut sigma1 = Complex64::new(0.0, 0.0);
    for (lam, direct, weight, model) in terms {
        sigma.add(lam * direct);
        sigma2.add(lam * weight);
        sigma1 += lam * model;
    }
    let (sigma, sigma2) = (sigma.value(), sigma2.value());
    let gap = (sigma - sigma1.re).abs();
    let nf = range.start() as f64;
    Ok(SigmaReport {
        range,
        h_max,
        sigma,
        sigma1,
        sigma2,
        realized_c: if sigma2 > 0.0 { gap / sigma2 } else { 0.0 },
        target_ratio: sigma * nf.ln().powi(2) / nf,
    })
}
