//! Latitude profile of uniform caps on `S^p`: the radius fraction `s` such
//! that a cap of geodesic radius `pi * s` has uniform probability `tau`.

use super::QuantileError;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(f, a, b, fa, fm, fb, whole, tol, 48)
}

const QUAD_TOL: f64 = 1e-15;

fn half_integral(p: usize, s: f64) -> f64 {
    let e = (p - 1) as i32;
    let f = move |t: f64| (std::f64::consts::PI * t).sin().powi(e);
    adaptive_simpson(&f, 0.0, s, QUAD_TOL)
}

/// Uniform probability of the cap of radius `pi * s` on `S^p`, for `s` in `[0, 1]`.
pub fn cap_content(p: usize, s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    if p <= 1 {
        return s;
    }
    let z = 2.0 * half_integral(p, 0.5);
    if s <= 0.5 {
        half_integral(p, s) / z
    } else {
        1.0 - half_integral(p, 1.0 - s) / z
    }
}

/// Inverse of [`cap_content`]: `s(tau)`.
pub fn latitude_profile(p: usize, tau: f64) -> Result<f64, QuantileError> {
    if !(0.0..=1.0).contains(&tau) || p == 0 {
        return Err(QuantileError::TauOutOfRange(tau));
    }
    if p == 1 || tau == 0.0 || tau == 1.0 || tau == 0.5 {
        return Ok(tau);
    }
    if tau > 0.5 {
        return Ok(1.0 - latitude_profile(p, 1.0 - tau)?);
    }
    let z = 2.0 * half_integral(p, 0.5);
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if half_integral(p, mid) / z < tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
