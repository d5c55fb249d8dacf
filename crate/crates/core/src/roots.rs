//! Bracketed scalar root finding: Illinois-modified regula falsi with a
//! bisection fallback whenever the bracket fails to shrink fast enough.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once the bracket is narrower than `x_tol * (1 + |x|)`.
    pub x_tol: f64,
    /// Stop once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-15,
            f_tol: 0.0,
            max_iter: 500,
        }
    }
}

/// Find `x` in `[lo, hi]` with `f(x) = 0`. `f(lo)` and `f(hi)` must have
/// opposite signs (or one of them must vanish).
pub fn find_root<F>(mut f: F, mut lo: f64, mut hi: f64, opts: &RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite function value at bracket end ({lo}, {hi})"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }

    // Which end was retained on the previous step: -1 lo, +1 hi.
    let mut side = 0i8;
    let mut width = hi - lo;
    for _ in 0..opts.max_iter {
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Numerical(format!("non-finite function value at {x}")));
        }
        if fx.abs() <= opts.f_tol || fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        let new_width = hi - lo;
        if new_width <= opts.x_tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if new_width > 0.5 * width {
            // Slow progress; take a bisection step.
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if !fm.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite function value at {mid}"
                )));
            }
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == f_lo.signum() {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
            side = 0;
        }
        width = hi - lo;
        if width <= opts.x_tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
    }
    Ok(if f_lo.abs() < f_hi.abs() { lo } else { hi })
}
