//! The offset logarithmic integral, its inverse, and the sawtooth/weight
//! functions whose Fourier expansions drive the reduction to exponential sums.
//!
//! `Li(x) = li(x) - li(2) = Ei(ln x) - li(2)`. The double path sums the
//! exponential-integral power series with compensation and reports an honest
//! error bound; the double-double path is used for escalation near integer
//! boundaries and wherever a phase `h * Li(x)` needs absolute accuracy.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dd::{CompensatedSum, DoubleDouble, DD_EPS, EULER_GAMMA};
use crate::error::{Error, Result};

/// li(2) = 1.0451637801174927848...
pub const LI_2: DoubleDouble = DoubleDouble::new(1.045163780117493, -1.0616403481185999e-16);

/// Width of the band around integers inside which floor decisions are
/// re-checked in double-double.
pub const GUARD_BAND: f64 = 1e-6;

const EPS: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    DoubleDouble,
}

/// A real value with a guaranteed absolute-error bound.
///
/// Double evaluations leave `lo` at zero; escalated evaluations carry the
/// full double-double value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal {
    hi: f64,
    lo: f64,
    abs_err: f64,
}

impl ExtReal {
    pub fn exact(v: f64) -> Self {
        ExtReal {
            hi: v,
            lo: 0.0,
            abs_err: 0.0,
        }
    }

    pub fn new(value: f64, abs_err: f64) -> Self {
        debug_assert!(abs_err.is_finite() && abs_err >= 0.0);
        ExtReal {
            hi: value,
            lo: 0.0,
            abs_err,
        }
    }

    pub fn from_dd(value: DoubleDouble, abs_err: f64) -> Self {
        debug_assert!(abs_err.is_finite() && abs_err >= 0.0);
        ExtReal {
            hi: value.hi,
            lo: value.lo,
            abs_err,
        }
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }

    pub fn dd(&self) -> DoubleDouble {
        DoubleDouble::new(self.hi, self.lo)
    }

    pub fn abs_err(&self) -> f64 {
        self.abs_err
    }

    /// Whether `x` lies within the error interval.
    pub fn contains(&self, x: f64) -> bool {
        (self.dd() - DoubleDouble::from_f64(x)).to_f64().abs() <= self.abs_err
    }
}

// Ei(t) for t > 0 in double: (value, absolute error bound excluding the
// argument's own rounding).
fn ei_double(t: f64) -> (f64, f64) {
    if t >= 40.0 {
        // Asymptotic series, truncated at its smallest term.
        let mut term = 1.0;
        let mut sum = CompensatedSum::new();
        sum.add(1.0);
        let mut k = 1.0;
        let mut last = 1.0;
        while k < t {
            let next = term * k / t;
            if next >= last || next < EPS * 0.25 {
                break;
            }
            term = next;
            last = next;
            sum.add(term);
            k += 1.0;
        }
        let scale = t.exp() / t;
        let v = scale * sum.value();
        return (v, v * (last + 4.0 * k * EPS));
    }
    let mut power = 1.0; // t^k / k!
    let mut sum = CompensatedSum::new();
    let mut k = 0u32;
    loop {
        k += 1;
        power *= t / k as f64;
        let term = power / k as f64;
        sum.add(term);
        if term <= sum.value() * 1e-18 {
            break;
        }
    }
    let s = sum.value();
    let lnt = t.ln();
    let v = EULER_GAMMA.hi + lnt + s;
    let err = EPS * (2.0 * k as f64 * s + 2.0 * lnt.abs() + 2.0);
    (v, err)
}

fn ei_dd(t: DoubleDouble) -> (DoubleDouble, f64) {
    let mut power = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ZERO;
    let mut k = 0u32;
    loop {
        k += 1;
        power = (power * t).div_f64(k as f64);
        let term = power.div_f64(k as f64);
        sum = sum + term;
        if term.hi <= sum.hi * 1e-34 {
            break;
        }
    }
    let lnt = t.ln();
    let v = EULER_GAMMA + lnt + sum;
    let err = DD_EPS * (4.0 * k as f64 * sum.hi + 4.0 * lnt.hi.abs() + 4.0);
    (v, err)
}

// Li on (1, inf) in double, no domain checks.
fn li_raw(x: f64) -> ExtReal {
    let t = x.ln();
    let (ei, err) = ei_double(t);
    let v = ei - LI_2.hi;
    // ln x carries up to one ulp of relative error, which moves Ei(ln x) by
    // about x * eps.
    let err = err + EPS * (2.0 * x + v.abs() + 2.0);
    ExtReal::new(v, err)
}

fn li_raw_dd(x: DoubleDouble) -> ExtReal {
    let t = x.ln();
    let (ei, err) = ei_dd(t);
    let v = ei - LI_2;
    let err = err + DD_EPS * (4.0 * x.hi + 4.0 * v.hi.abs() + 4.0);
    ExtReal::from_dd(v, err)
}

fn check_li_arg(x: f64) -> Result<Option<ExtReal>> {
    if !x.is_finite() {
        return Err(Error::Overflow("li_from_2"));
    }
    if x == 2.0 {
        return Ok(Some(ExtReal::exact(0.0)));
    }
    if x < 2.0 {
        return Err(Error::Domain {
            func: "li_from_2",
            arg: x,
        });
    }
    Ok(None)
}

/// `Li(x) = ∫₂ˣ dt / log t` in double precision, with its error bound.
pub fn li_from_2(x: f64) -> Result<ExtReal> {
    if let Some(v) = check_li_arg(x)? {
        return Ok(v);
    }
    Ok(li_raw(x))
}

/// `Li(x)` in double-double precision.
pub fn li_from_2_dd(x: DoubleDouble) -> Result<ExtReal> {
    if let Some(v) = check_li_arg(x.hi)? {
        if x.lo == 0.0 {
            return Ok(v);
        }
        if x.lo < 0.0 {
            return Err(Error::Domain {
                func: "li_from_2",
                arg: x.to_f64(),
            });
        }
    }
    Ok(li_raw_dd(x))
}

pub fn li_from_2_with(x: f64, precision: Precision) -> Result<ExtReal> {
    match precision {
        Precision::Double => li_from_2(x),
        Precision::DoubleDouble => li_from_2_dd(DoubleDouble::from_f64(x)),
    }
}

/// Li at an integer argument, double-double.
pub fn li_int_dd(n: u64) -> Result<ExtReal> {
    li_from_2_dd(DoubleDouble::from_u64(n))
}

const NEWTON_CAP: usize = 60;

// Solves Li(p) = y in double precision. Newton from the seed
// max(3, y log max(y, 3)); bisection whenever a step leaves the bracket.
fn newton_inverse(y: f64) -> Result<f64> {
    let mut lo = 2.0f64;
    let mut hi = 4.0 * y * (y + 3.0).ln() + 10.0;
    let mut p = 3f64.max(y * y.max(3.0).ln()).min(hi);
    for _ in 0..NEWTON_CAP {
        let li = li_raw(p);
        let f = li.value() - y;
        if f.abs() <= li.abs_err() {
            return Ok(p);
        }
        if f > 0.0 {
            hi = hi.min(p);
        } else {
            lo = lo.max(p);
        }
        let mut next = p - f * p.ln();
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - p).abs();
        p = next;
        if step <= 4.0 * EPS * p || hi - lo <= 4.0 * EPS * p {
            return Ok(p);
        }
    }
    Err(Error::NonConvergence("inverse_li"))
}

/// `iL(y)`, the inverse of [`li_from_2`], for `y >= 0`.
///
/// The double Newton solution is polished with two double-double Newton
/// steps; the returned error bound is the final residual divided by
/// `Li'(p) = 1 / log p`.
pub fn inverse_li(y: f64) -> Result<ExtReal> {
    if !y.is_finite() {
        return Err(Error::Overflow("inverse_li"));
    }
    if y < 0.0 {
        return Err(Error::Domain {
            func: "inverse_li",
            arg: y,
        });
    }
    if y == 0.0 {
        return Ok(ExtReal::exact(2.0));
    }
    let p0 = newton_inverse(y)?;
    let target = DoubleDouble::from_f64(y);
    let mut p = DoubleDouble::from_f64(p0);
    for _ in 0..2 {
        let r = li_raw_dd(p).dd() - target;
        p = p - r.mul_f64(p.hi.ln());
    }
    let li = li_raw_dd(p);
    let resid = (li.dd() - target).to_f64().abs();
    let err = (resid + li.abs_err()) * p.hi.ln() + DD_EPS * p.hi;
    Ok(ExtReal::from_dd(p, err))
}

/// A floor decision together with whether it could be certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Floor {
    pub value: i64,
    pub ambiguous: bool,
}

fn margin_to_integers(v: DoubleDouble) -> (i64, f64) {
    let f = v.floor();
    let below = (v - f).to_f64();
    let above = (f.add_f64(1.0) - v).to_f64();
    (f.to_f64() as i64, below.min(above))
}

/// `⌊Li(m)⌋` for an integer `m >= 2`, escalated to double-double inside the
/// guard band.
pub fn floor_li(m: u64) -> Result<Floor> {
    if m < 2 {
        return Err(Error::Domain {
            func: "floor_li",
            arg: m as f64,
        });
    }
    if m == 2 {
        return Ok(Floor {
            value: 0,
            ambiguous: false,
        });
    }
    let fast = li_raw(m as f64);
    let v = fast.value();
    let f = v.floor();
    let margin = (v - f).min(f + 1.0 - v);
    if margin > GUARD_BAND.max(fast.abs_err()) {
        return Ok(Floor {
            value: f as i64,
            ambiguous: false,
        });
    }
    let slow = li_int_dd(m)?;
    let (value, margin) = margin_to_integers(slow.dd());
    Ok(Floor {
        value,
        ambiguous: margin <= slow.abs_err(),
    })
}

/// `⌊iL(n)⌋` for an integer `n >= 0`.
///
/// The result `p` is certified by `Li(p) <= n < Li(p + 1)`; `ambiguous` is
/// set when either comparison could not be separated even in double-double.
pub fn floor_inverse_li(n: u64) -> Result<Floor> {
    if n == 0 {
        return Ok(Floor {
            value: 2,
            ambiguous: false,
        });
    }
    let n_i = n as i64;
    // Li(m) <= n iff ⌈Li(m)⌉ <= n; Li(m) is an integer only at m = 2.
    let ceil_li = |m: u64| -> Result<Floor> {
        let f = floor_li(m)?;
        Ok(if m == 2 {
            f
        } else {
            Floor {
                value: f.value + 1,
                ..f
            }
        })
    };
    let p = newton_inverse(n as f64)?;
    let mut m = (p.floor() as u64).max(2);
    loop {
        let at = ceil_li(m)?;
        if at.value > n_i {
            m -= 1;
            continue;
        }
        let next = ceil_li(m + 1)?;
        if next.value <= n_i {
            m += 1;
            continue;
        }
        return Ok(Floor {
            value: m as i64,
            ambiguous: at.ambiguous || next.ambiguous,
        });
    }
}

/// The sawtooth `ψ(θ) = {θ} - 1/2 ∈ [-1/2, 1/2)`; `ψ(integer) = -1/2`.
pub fn psi_frac(theta: f64) -> f64 {
    let mut f = theta - theta.floor();
    if f >= 1.0 {
        // tiny negative theta
        f = 1.0 - EPS / 2.0;
    }
    f - 0.5
}

/// Distance to the nearest integer.
pub fn dist_to_int(theta: f64) -> f64 {
    let f = theta - theta.floor();
    f.min(1.0 - f)
}

/// `e(x) = exp(2πix)`, reducing `x` modulo 1 first.
pub fn e(x: f64) -> Complex64 {
    let f = x - x.floor();
    let (s, c) = (2.0 * PI * f).sin_cos();
    Complex64::new(c, s)
}

/// `e(x)` for a double-double argument.
pub fn e_dd(x: DoubleDouble) -> Complex64 {
    let (s, c) = (2.0 * PI * x.fract()).sin_cos();
    Complex64::new(c, s)
}

/// Truncated Fourier series of the sawtooth, `Σ_{0<|h|≤H} c_h e(hθ)`.
///
/// With `ψ(θ) = -Σ_{h≥1} sin(2πhθ) / (πh)` the coefficients are
/// `c_h = -1 / (2πih) = i / (2πh)`, so `c_{-h} = conj(c_h)`.
#[derive(Clone, Debug)]
pub struct FourierTruncation {
    h_max: u32,
    coeffs: Vec<Complex64>,
}

impl FourierTruncation {
    pub fn new(h_max: u32) -> Result<Self> {
        if h_max == 0 {
            return Err(Error::InvalidParams(
                "truncation level H must be >= 1".into(),
            ));
        }
        let coeffs = (1..=h_max)
            .map(|h| Complex64::new(0.0, 1.0 / (2.0 * PI * h as f64)))
            .collect();
        Ok(FourierTruncation { h_max, coeffs })
    }

    pub fn h_max(&self) -> u32 {
        self.h_max
    }

    /// `c_h` for `0 < |h| <= H`.
    pub fn coeff(&self, h: i64) -> Complex64 {
        assert!(
            h != 0 && h.unsigned_abs() <= self.h_max as u64,
            "h out of range"
        );
        let c = self.coeffs[h.unsigned_abs() as usize - 1];
        if h > 0 {
            c
        } else {
            c.conj()
        }
    }

    /// The full complex partial sum at `θ`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let t = theta - theta.floor();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let z = e(t * (i + 1) as f64);
            acc += c * z + c.conj() * z.conj();
        }
        acc
    }

    /// `Σ_{0<|h|≤H} c_h e(hθ)` given the positive-frequency phases
    /// `phases[h-1] = e(hθ)`.
    pub fn eval_phases(&self, phases: &[Complex64]) -> Complex64 {
        debug_assert_eq!(phases.len(), self.coeffs.len());
        self.coeffs
            .iter()
            .zip(phases)
            .map(|(c, z)| c * z + c.conj() * z.conj())
            .sum()
    }
}

/// Real part of the truncated Fourier series of `ψ` at level `H`.
pub fn psi_truncated(theta: f64, h_max: u32) -> Result<f64> {
    let z = FourierTruncation::new(h_max)?.eval(theta);
    assert!(
        z.im.abs() <= 1e-12,
        "imaginary residue {} in psi_truncated",
        z.im
    );
    Ok(z.re)
}

/// `g(θ, H) = min(1, 1 / (H ‖θ‖))`, equal to 1 at integers.
pub fn g_weight(theta: f64, h_max: u32) -> f64 {
    let d = dist_to_int(theta);
    if d == 0.0 {
        return 1.0;
    }
    (1.0 / (h_max as f64 * d)).min(1.0)
}

/// Fourier coefficient `a_h = ∫₀¹ g(θ, H) e(-hθ) dθ`.
///
/// Integrates adaptively on the pieces between the kinks `‖θ‖ = 1/H` and the
/// midpoint, further cut at half-periods of the oscillation.
pub fn fourier_coeff_g(h: i64, h_max: u32) -> Result<f64> {
    if h_max == 0 {
        return Err(Error::InvalidParams(
            "truncation level H must be >= 1".into(),
        ));
    }
    let kink = (1.0 / h_max as f64).min(0.5);
    let breaks = [0.0, kink, 0.5, 1.0 - kink, 1.0];
    let freq = 2.0 * PI * h as f64;
    let piece = if h == 0 {
        1.0
    } else {
        0.5 / h.unsigned_abs() as f64
    };
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let cuts = ((b - a) / piece).ceil().max(1.0) as usize;
        let step = (b - a) / cuts as f64;
        for i in 0..cuts {
            let x0 = a + i as f64 * step;
            let x1 = if i + 1 == cuts { b } else { x0 + step };
            re.add(crate::quad::integrate(
                |t| g_weight(t, h_max) * (freq * t).cos(),
                x0,
                x1,
                1e-15,
            )?);
            im.add(crate::quad::integrate(
                |t| -g_weight(t, h_max) * (freq * t).sin(),
                x0,
                x1,
                1e-15,
            )?);
        }
    }
    if im.value().abs() > 1e-10 {
        return Err(Error::NonConvergence("fourier_coeff_g (imaginary residue)"));
    }
    Ok(re.value())
}
