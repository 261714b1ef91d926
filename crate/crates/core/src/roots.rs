//! Bracketing and bisection for the scalar boundary equations.

use crate::error::{Error, Result};

/// Largest |x| the bracket search will reach in log-moneyness. Beyond this the
/// Gaussian tails are exactly 0 or 1 in double precision.
pub const SEARCH_SPAN: f64 = 60.0;

/// Finds `lo < hi` with `sign(lo) < 0 < sign(hi)`, doubling outward from zero.
///
/// `sign` only needs the sign of the target function to be right; callers may
/// pass a rescaled version that stays finite where the function itself
/// underflows.
pub fn expand_bracket<F>(what: &'static str, sign: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut lo = None;
    let mut hi = None;
    let mut step = 1.0_f64;
    loop {
        let s = step.min(SEARCH_SPAN);
        if lo.is_none() && sign(-s) < 0.0 {
            lo = Some(-s);
        }
        if hi.is_none() && sign(s) > 0.0 {
            hi = Some(s);
        }
        if let (Some(l), Some(h)) = (lo, hi) {
            return Ok((l, h));
        }
        if s >= SEARCH_SPAN {
            return Err(Error::NoBracket {
                what,
                lo: -SEARCH_SPAN,
                hi: SEARCH_SPAN,
            });
        }
        step *= 2.0;
    }
}

/// Bisection on `[lo, hi]` where `sign(lo) < 0 < sign(hi)`.
///
/// Stops once the bracket is narrower than `x_tol` and `|residual(x)| ≤
/// value_tol`, or when the interval can no longer be split in double
/// precision, in which case the endpoint with the smaller residual is
/// returned. Both conditions are needed: far from the root the residual of a
/// Gaussian-tail function can underflow to zero.
pub fn bisect<S, R>(mut lo: f64, mut hi: f64, sign: S, residual: R, x_tol: f64, value_tol: f64) -> f64
where
    S: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= x_tol && residual(mid).abs() <= value_tol {
            return mid;
        }
        if sign(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if residual(lo).abs() <= residual(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Positions `i` where `values[i]` and the previous nonzero value have strictly
/// opposite signs. Exact zeros (underflowed tails) are skipped.
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    let mut changes = Vec::new();
    let mut last: Option<f64> = None;
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if let Some(prev) = last {
            if prev.signum() != v.signum() {
                changes.push(i);
            }
        }
        last = Some(v);
    }
    changes
}
