//! Segmented sieve of Eratosthenes tabulating primality, the von Mangoldt
//! function `Λ`, the Möbius function `μ` and smallest prime factors over an
//! integer window `[lo, hi)`.

use bitvec::prelude::*;
use rayon::prelude::*;

use crate::dd::CompensatedSum;
use crate::error::{Error, Result};

/// Default segment length in integers.
pub const SEGMENT_SIZE: u64 = 1 << 22;

/// Largest integer the sieve accepts.
pub const SIEVE_LIMIT: u64 = 10_000_000_000;

/// An integer interval `(N, N₁]` with `N < N₁ ≤ 2N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicRange {
    n: u64,
    n1: u64,
}

impl DyadicRange {
    pub fn new(n: u64, n1: u64) -> Result<Self> {
        if n < 2 || n1 <= n || n1 > 2 * n {
            return Err(Error::InvalidParams(format!(
                "dyadic range needs 2 <= N < N1 <= 2N, got ({n}, {n1}]"
            )));
        }
        Ok(DyadicRange { n, n1 })
    }

    /// The full dyadic block `(N, 2N]`.
    pub fn full(n: u64) -> Result<Self> {
        Self::new(n, 2 * n)
    }

    /// Exclusive lower end `N`.
    pub fn start(&self) -> u64 {
        self.n
    }

    /// Inclusive upper end `N₁`.
    pub fn end(&self) -> u64 {
        self.n1
    }

    pub fn len(&self) -> u64 {
        self.n1 - self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u64> {
        self.n + 1..=self.n1
    }

    pub fn contains(&self, m: u64) -> bool {
        m > self.n && m <= self.n1
    }
}

/// Primes up to and including `limit`, by a plain sieve.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = bitvec![0; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite.set(j, true);
                j += i;
            }
        }
    }
    out
}

/// `⌊√n⌋` computed exactly.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn check_range(lo: u64, hi: u64, budget: u64) -> Result<()> {
    if lo >= hi {
        return Err(Error::InvertedRange { lo, hi });
    }
    if lo == 0 || hi > SIEVE_LIMIT + 1 {
        return Err(Error::InvalidParams(format!(
            "sieve range [{lo}, {hi}) must lie in [1, {SIEVE_LIMIT}]"
        )));
    }
    if hi - lo > budget {
        return Err(Error::Budget {
            len: hi - lo,
            budget,
        });
    }
    Ok(())
}

/// Tabulated arithmetic functions over `[lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithSlice {
    lo: u64,
    hi: u64,
    is_prime: BitVec,
    /// `p` when `n = p^k`, else 0.
    prime_power_base: Vec<u64>,
    mangoldt: Vec<f64>,
    moebius: Vec<i8>,
    smallest_prime_factor: Vec<u64>,
    base_primes: Vec<u64>,
}

/// Sieve `[lo, hi)` with the default segment budget.
pub fn sieve_slice(lo: u64, hi: u64) -> Result<ArithSlice> {
    sieve_slice_with_budget(lo, hi, SEGMENT_SIZE)
}

pub fn sieve_slice_with_budget(lo: u64, hi: u64, budget: u64) -> Result<ArithSlice> {
    check_range(lo, hi, budget)?;
    let len = (hi - lo) as usize;
    let base_primes = primes_up_to(isqrt(hi - 1));
    let mut rem: Vec<u64> = (lo..hi).collect();
    let mut moebius = vec![1i8; len];
    let mut spf = vec![0u64; len];
    let mut distinct = vec![0u8; len];
    let mut base = vec![0u64; len];

    for &p in &base_primes {
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m < hi {
            let i = (m - lo) as usize;
            if spf[i] == 0 {
                spf[i] = p;
            }
            let mut e = 0;
            while rem[i].is_multiple_of(p) {
                rem[i] /= p;
                e += 1;
            }
            moebius[i] = if e >= 2 { 0 } else { -moebius[i] };
            distinct[i] += 1;
            base[i] = p;
            m += p;
        }
    }

    let mut is_prime = bitvec![0; len];
    let mut mangoldt = vec![0.0; len];
    let mut prime_power_base = vec![0u64; len];
    for i in 0..len {
        let n = lo + i as u64;
        if n == 1 {
            spf[i] = 1;
            continue;
        }
        // at most one prime factor exceeds sqrt(hi)
        if rem[i] > 1 {
            moebius[i] = -moebius[i];
            distinct[i] += 1;
            base[i] = rem[i];
            if spf[i] == 0 {
                spf[i] = rem[i];
            }
        }
        if distinct[i] == 1 {
            prime_power_base[i] = base[i];
            mangoldt[i] = (base[i] as f64).ln();
        }
        if spf[i] == n {
            is_prime.set(i, true);
        }
    }

    Ok(ArithSlice {
        lo,
        hi,
        is_prime,
        prime_power_base,
        mangoldt,
        moebius,
        smallest_prime_factor: spf,
        base_primes,
    })
}

impl ArithSlice {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    /// Exclusive upper end.
    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n < self.hi
    }

    fn idx(&self, n: u64) -> usize {
        assert!(self.contains(n), "{n} outside [{}, {})", self.lo, self.hi);
        (n - self.lo) as usize
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.is_prime[self.idx(n)]
    }

    pub fn mangoldt(&self, n: u64) -> f64 {
        self.mangoldt[self.idx(n)]
    }

    /// `Some(p)` when `n` is a power of the prime `p`.
    pub fn prime_power_base(&self, n: u64) -> Option<u64> {
        match self.prime_power_base[self.idx(n)] {
            0 => None,
            p => Some(p),
        }
    }

    pub fn moebius(&self, n: u64) -> i8 {
        self.moebius[self.idx(n)]
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.smallest_prime_factor[self.idx(n)]
    }

    /// `(p, k)` pairs with `n = Π p^k`, ascending in `p`.
    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        let mut m = n;
        let mut out = Vec::new();
        if m <= 1 {
            return out;
        }
        let start = self.smallest_prime_factor(n);
        for &p in self.base_primes.iter().skip_while(|&&p| p < start) {
            if p * p > m {
                break;
            }
            if m.is_multiple_of(p) {
                let mut k = 0;
                while m.is_multiple_of(p) {
                    m /= p;
                    k += 1;
                }
                out.push((p, k));
            }
        }
        if m > 1 {
            out.push((m, 1));
        }
        out
    }

    /// Number of divisors of `n`.
    pub fn divisor_count(&self, n: u64) -> u64 {
        self.factorize(n)
            .iter()
            .map(|&(_, k)| k as u64 + 1)
            .product()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.is_prime.iter_ones().map(move |i| self.lo + i as u64)
    }

    /// `(n, Λ(n))` over the prime powers in the slice.
    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.prime_power_base
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(move |(i, _)| (self.lo + i as u64, self.mangoldt[i]))
    }
}

/// Primes in `[lo, hi)` by a segment-local sieve with precomputed base primes
/// (which must cover `√(hi - 1)`).
pub fn primes_in_segment(lo: u64, hi: u64, base_primes: &[u64]) -> Vec<u64> {
    if hi <= lo {
        return Vec::new();
    }
    let len = (hi - lo) as usize;
    let mut composite = bitvec![0; len];
    for &p in base_primes {
        if p * p >= hi {
            break;
        }
        let first = (p * p).max(lo.div_ceil(p) * p);
        let mut m = first;
        while m < hi {
            composite.set((m - lo) as usize, true);
            m += p;
        }
    }
    composite
        .iter_zeros()
        .map(|i| lo + i as u64)
        .filter(|&n| n >= 2)
        .collect()
}

/// Segment boundaries `[lo, hi)` covering `[1, limit]`.
pub fn segments(limit: u64, seg: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = 1;
    while lo <= limit {
        let hi = (lo + seg).min(limit + 1);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// `ψ(x) = Σ_{n≤x} Λ(n)`.
///
/// Each prime contributes `log p` once per power `p^k ≤ x`; segment partial
/// sums are compensated and merged in ascending order.
pub fn chebyshev_psi(x: u64) -> Result<f64> {
    if !(2..=1_000_000_000).contains(&x) {
        return Err(Error::InvalidParams(format!(
            "chebyshev_psi needs 2 <= x <= 1e9, got {x}"
        )));
    }
    let base = primes_up_to(isqrt(x));
    let partials: Vec<CompensatedSum> = segments(x, SEGMENT_SIZE)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut s = CompensatedSum::new();
            for p in primes_in_segment(lo, hi, &base) {
                let mut k = 1u32;
                let mut pk = p;
                while let Some(next) = pk.checked_mul(p).filter(|&v| v <= x) {
                    pk = next;
                    k += 1;
                }
                s.add(k as f64 * (p as f64).ln());
            }
            s
        })
        .collect();
    let mut total = CompensatedSum::new();
    for s in partials {
        total.add(s.value());
    }
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_slice_by_hand() {
        let s = sieve_slice(1, 11).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        assert_eq!(s.moebius(6), 1);
        assert_eq!(s.mangoldt(8), 2f64.ln());
        assert_eq!(s.mangoldt(9), 3f64.ln());
        assert_eq!(s.mangoldt(1), 0.0);
        assert_eq!(s.moebius(1), 1);
        assert_eq!(s.smallest_prime_factor(1), 1);
        assert_eq!(s.prime_power_base(8), Some(2));
        assert_eq!(s.prime_power_base(10), None);
    }

    #[test]
    fn thirty_is_squarefree_with_three_primes() {
        let s = sieve_slice(1, 31).unwrap();
        assert_eq!(s.moebius(30), -1);
        assert_eq!(s.mangoldt(30), 0.0);
        assert_eq!(s.moebius(12), 0);
        assert_eq!(s.factorize(30), vec![(2, 1), (3, 1), (5, 1)]);
        assert_eq!(s.divisor_count(30), 8);
        assert_eq!(s.divisor_count(1), 1);
    }

    #[test]
    fn window_near_a_million_matches_trial_division() {
        let s = sieve_slice(1_000_000, 1_001_000).unwrap();
        let expected = (1_000_000..1_001_000)
            .filter(|&n| trial_is_prime(n))
            .count();
        assert_eq!(s.primes().count(), expected);
    }

    #[test]
    fn range_errors() {
        assert_eq!(
            sieve_slice(10, 10),
            Err(Error::InvertedRange { lo: 10, hi: 10 })
        );
        assert!(matches!(
            sieve_slice(1, SEGMENT_SIZE + 2),
            Err(Error::Budget { .. })
        ));
        assert!(sieve_slice(0, 10).is_err());
    }

    #[test]
    fn large_prime_factor_above_sqrt() {
        // 2 * 999983 has its large factor found after sieving
        let n = 2 * 999_983u64;
        let s = sieve_slice(n - 5, n + 5).unwrap();
        assert_eq!(s.moebius(n), 1);
        assert_eq!(s.smallest_prime_factor(n), 2);
        assert_eq!(s.factorize(n), vec![(2, 1), (999_983, 1)]);
        assert!(s.is_prime(n + 3) == trial_is_prime(n + 3));
    }

    #[test]
    fn mangoldt_divisor_sum_is_log() {
        let s = sieve_slice(1, 10_001).unwrap();
        for n in 1..=10_000u64 {
            let mut sum = 0.0;
            let mut d = 1;
            while d * d <= n {
                if n % d == 0 {
                    sum += s.mangoldt(d);
                    if d * d != n {
                        sum += s.mangoldt(n / d);
                    }
                }
                d += 1;
            }
            assert!((sum - (n as f64).ln()).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn moebius_divisor_sum_is_delta() {
        let s = sieve_slice(1, 10_001).unwrap();
        for n in 1..=10_000u64 {
            let sum: i64 = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| s.moebius(d) as i64)
                .sum();
            assert_eq!(sum, (n == 1) as i64, "n={n}");
        }
    }

    #[test]
    fn segmentation_invariance() {
        let whole = sieve_slice(1, 100_001).unwrap();
        for seg in 0..10u64 {
            let lo = 1 + seg * 10_000;
            let part = sieve_slice(lo, lo + 10_000).unwrap();
            for n in lo..lo + 10_000 {
                assert_eq!(part.is_prime(n), whole.is_prime(n));
                assert_eq!(part.moebius(n), whole.moebius(n));
                assert_eq!(part.mangoldt(n), whole.mangoldt(n));
                assert_eq!(
                    part.smallest_prime_factor(n),
                    whole.smallest_prime_factor(n)
                );
            }
        }
    }

    #[test]
    fn prime_segments_agree_with_slice() {
        let base = primes_up_to(isqrt(200_000));
        let mut all = Vec::new();
        for (lo, hi) in segments(200_000, 7_919) {
            all.extend(primes_in_segment(lo, hi, &base));
        }
        let slice = sieve_slice(1, 200_001).unwrap();
        assert_eq!(all, slice.primes().collect::<Vec<_>>());
    }

    #[test]
    fn chebyshev_examples() {
        assert!((chebyshev_psi(2).unwrap() - 2f64.ln()).abs() < 1e-15);
        let ten = 3.0 * 2f64.ln() + 2.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((chebyshev_psi(10).unwrap() - ten).abs() < 1e-13);
        let big = chebyshev_psi(1_000_000).unwrap();
        // direct summation oracle over the sieve slice
        let mut direct = CompensatedSum::new();
        let s = sieve_slice(1, 1_000_001).unwrap();
        for (_, l) in s.prime_powers() {
            direct.add(l);
        }
        assert!((big - direct.value()).abs() < 1e-6);
        assert!((big / 1e6 - 1.0).abs() < 0.01);
    }

    #[test]
    fn dyadic_range_invariants() {
        assert!(DyadicRange::new(8, 16).is_ok());
        assert!(DyadicRange::new(8, 17).is_err());
        assert!(DyadicRange::new(8, 8).is_err());
        assert!(DyadicRange::new(1, 2).is_err());
        let r = DyadicRange::new(8, 12).unwrap();
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![9, 10, 11, 12]);
        assert_eq!(r.len(), 4);
    }
}
