//! Bracketing root finders used by the resonance solve and the tuning loops.

use crate::error::{Error, Result};

/// Brent's method on a bracket with f(a)·f(b) ≤ 0.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidArgument(format!(
            "bracket [{a}, {b}] does not straddle a root"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NotConverged {
        what: "Brent root search",
        iterations: max_iter,
    })
}

/// Sub-intervals of an `n`-point uniform grid on [lo, hi] over which f
/// changes sign from negative to positive. Points where f cannot be
/// evaluated break the scan.
pub fn rising_crossings<F>(mut f: F, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let cur = f(x).ok().filter(|v| v.is_finite()).map(|v| (x, v));
        if let (Some((x0, f0)), Some((x1, f1))) = (prev, cur) {
            if f0 < 0.0 && f1 >= 0.0 {
                out.push((x0, x1));
            }
        }
        prev = cur;
    }
    out
}
