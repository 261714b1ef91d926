//! Early-exercise premium of the standard American put as an integral over
//! the exercise region.

use crate::error::{Error, Result};
use crate::european::norm_cdf;
use crate::model::MarketParams;

use super::boundary::CalendarBoundary;

const MIN_PANELS: usize = 32;
const MAX_PANELS: usize = 1 << 20;
/// Convergence target relative to the strike.
const REL_TOL: f64 = 1e-9;

/// `e(t, X) = ∫_t^T e^{−r(s−t)} E[(rK − qX_s) 1{X_s ≤ B(s)} | X_t = X] ds`.
///
/// The inner expectation is closed form; the outer integral substitutes
/// `s = t + w²` to remove the `1/√(s − t)` behaviour at the lower end, then
/// runs composite Simpson, doubling the panel count until two successive
/// estimates agree.
pub fn early_exercise_premium(
    params: &MarketParams,
    maturity: f64,
    t: f64,
    stock: f64,
    boundary: &CalendarBoundary,
) -> Result<f64> {
    if !(t < maturity) || t < 0.0 {
        return Err(Error::Domain(format!("need 0 ≤ t < T, got t = {t}, T = {maturity}")));
    }
    if !(stock > 0.0) {
        return Err(Error::Domain(format!("stock price must be positive, got {stock}")));
    }
    let (k, r, q, sig) = (params.strike(), params.rate(), params.dividend(), params.volatility());
    let mu = params.log_drift();
    let integrand = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        let s = w * w;
        let b = boundary.at(t + s);
        let d2 = ((stock / b).ln() + mu * s) / (sig * w);
        let d1 = d2 + sig * w;
        2.0 * w * (r * k * (-r * s).exp() * norm_cdf(-d2) - q * stock * (-q * s).exp() * norm_cdf(-d1))
    };
    let top = (maturity - t).sqrt();
    let mut prev = simpson(&integrand, top, MIN_PANELS);
    let mut n = 2 * MIN_PANELS;
    loop {
        let next = simpson(&integrand, top, n);
        let change = (next - prev).abs();
        if change <= REL_TOL * k {
            return Ok(next);
        }
        if n >= MAX_PANELS {
            return Err(Error::Quadrature { last_change: change });
        }
        prev = next;
        n *= 2;
    }
}

fn simpson(f: &impl Fn(f64) -> f64, top: f64, n: usize) -> f64 {
    let h = top / n as f64;
    let mut sum = f(0.0) + f(top);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    sum * h / 3.0
}
