//! Browser bindings for three views: the truncated sawtooth, the `π̂(x)` ratio
//! curve, and the partial-sum path of a Type I exponential sum.
//!
//! Each export returns a flat `Float64Array`; the `*_points` functions below
//! hold the logic so it can be tested off the browser.

use wasm_bindgen::prelude::*;

use pseudotwin::arith::DyadicRange;
use pseudotwin::counting::pi_hat_table;
use pseudotwin::expsums::{linear_bound, phase};
use pseudotwin::specfun::{g_weight, li_int_dd, psi_frac, FourierTruncation};

/// Largest `x` the ratio curve will sweep to in the page.
pub const PIHAT_MAX: u64 = 10_000_000;
/// Longest exponential-sum path drawn.
pub const PATH_MAX: u64 = 200_000;

/// `[θ, ψ(θ), ψ_H(θ), g(θ, H)]` for `samples` points of `[0, 1)`.
pub fn psi_points(h_max: u32, samples: u32) -> Result<Vec<f64>, String> {
    if !(1..=4096).contains(&h_max) || !(2..=20_000).contains(&samples) {
        return Err("need 1 <= H <= 4096 and 2 <= samples <= 20000".into());
    }
    let t = FourierTruncation::new(h_max).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * samples as usize);
    for i in 0..samples {
        let theta = (i as f64 + 0.5) / samples as f64;
        out.extend([
            theta,
            psi_frac(theta),
            t.eval(theta).re,
            g_weight(theta, h_max),
        ]);
    }
    Ok(out)
}

/// `[x, π̂(x), ratio]` at `points` log-spaced checkpoints in `[100, x_max]`.
pub fn pihat_points(x_max: u64, points: u32) -> Result<Vec<f64>, String> {
    if !(100..=PIHAT_MAX).contains(&x_max) || !(1..=200).contains(&points) {
        return Err(format!(
            "need 100 <= x <= {PIHAT_MAX} and 1 <= points <= 200"
        ));
    }
    let mut xs: Vec<u64> = (0..points)
        .map(|i| {
            let f = if points == 1 {
                1.0
            } else {
                i as f64 / (points - 1) as f64
            };
            (100.0 * (x_max as f64 / 100.0).powf(f)).round() as u64
        })
        .collect();
    xs.dedup();
    let table = pi_hat_table(&xs).map_err(|e| e.to_string())?;
    Ok(table
        .iter()
        .flat_map(|r| [r.x as f64, r.pi_hat as f64, r.ratio])
        .collect())
}

/// Partial sums of `Σ_{N<n≤2N} e(h·Li(nℓ))` as `[re, im]` pairs, starting
/// at the origin; the last two entries are the bound and `|sum|`.
pub fn path_points(h: i64, ell: u64, n: u64) -> Result<Vec<f64>, String> {
    if h == 0 || ell == 0 || !(2..=PATH_MAX).contains(&n) || ell * 2 * n > 10_000_000_000 {
        return Err(format!("need h != 0, ell >= 1, 2 <= N <= {PATH_MAX}"));
    }
    let range = DyadicRange::full(n).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * n as usize + 4);
    let (mut re, mut im) = (0.0, 0.0);
    out.extend([re, im]);
    for m in range.iter() {
        let z = phase(h, li_int_dd(m * ell).map_err(|e| e.to_string())?.dd());
        re += z.re;
        im += z.im;
        out.extend([re, im]);
    }
    out.extend([linear_bound(h, ell, n), (re * re + im * im).sqrt()]);
    Ok(out)
}

#[wasm_bindgen]
pub fn psi_curve(h_max: u32, samples: u32) -> Result<Vec<f64>, JsValue> {
    psi_points(h_max, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn pihat_curve(x_max: f64, points: u32) -> Result<Vec<f64>, JsValue> {
    pihat_points(x_max as u64, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn expsum_path(h: i32, ell: u32, n: u32) -> Result<Vec<f64>, JsValue> {
    path_points(h as i64, ell as u64, n as u64).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_points_shape() {
        let p = psi_points(16, 100).unwrap();
        assert_eq!(p.len(), 400);
        for c in p.chunks(4) {
            // truncation error is controlled by g
            assert!((c[1] - c[2]).abs() <= c[3]);
        }
        assert!(psi_points(0, 10).is_err());
    }

    #[test]
    fn pihat_points_end_at_x_max() {
        let p = pihat_points(10_000, 5).unwrap();
        assert_eq!(p.len(), 15);
        assert_eq!(p[12], 10_000.0);
        assert_eq!(p[13], 165.0);
        assert!(pihat_points(50, 5).is_err());
    }

    #[test]
    fn path_ends_at_the_sum() {
        let p = path_points(1, 1, 8).unwrap();
        // 9 points of the path, then bound and modulus
        assert_eq!(p.len(), 2 * 9 + 2);
        let (re, im) = (p[16], p[17]);
        assert!((re + 0.618_852_802_115_864_7).abs() < 1e-12);
        assert!((im + 0.165_350_668_869_317_8).abs() < 1e-12);
        assert!((p[19] - re.hypot(im)).abs() < 1e-15);
    }
}
