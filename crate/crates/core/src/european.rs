//! Closed-form European put in log-moneyness, its Theta, and the zero
//! crossing of Theta.
//!
//! Theta follows the convention `θ(x) = −∂ₜP` evaluated with remaining life
//! `δ`; it is the running payoff of the derivative left over once the European
//! put is split off the lagged American value.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::MarketParams;
use crate::roots;

/// Default root tolerance for [`find_x_bar`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF via `erfc`, accurate in both tails.
pub fn norm_cdf(d: f64) -> f64 {
    0.5 * libm::erfc(-d * FRAC_1_SQRT_2)
}

pub fn norm_pdf(d: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * d * d).exp()
}

/// Mills ratio `N(−d)/N′(d)`. Infinite once `N′(d)` underflows on the left.
pub(crate) fn mills_ratio(d: f64) -> f64 {
    if d < 5.0 {
        let dens = norm_pdf(d);
        if dens == 0.0 {
            return f64::INFINITY;
        }
        return norm_cdf(-d) / dens;
    }
    // Laplace continued fraction; from d = 5 on, forty levels reach f64 resolution
    // while the direct quotient loses digits to the tails.
    let mut t = d;
    for k in (1..=40).rev() {
        t = d + k as f64 / t;
    }
    1.0 / t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DPair {
    pub d1: f64,
    pub d2: f64,
}

fn d_pair_unchecked(x: f64, life: f64, p: &MarketParams) -> DPair {
    let vol_sqrt = p.volatility() * life.sqrt();
    let d1 = x / vol_sqrt + ((p.rate() - p.dividend()) / p.volatility() + 0.5 * p.volatility()) * life.sqrt();
    DPair {
        d1,
        d2: d1 - vol_sqrt,
    }
}

/// `d₁ = x/(σ√s) + ((r−q)/σ + σ/2)√s`, `d₂ = d₁ − σ√s` for remaining life `s`.
pub fn d_pair(x: f64, life: f64, params: &MarketParams) -> Result<DPair> {
    if !(life > 0.0) {
        return Err(Error::Domain(format!("remaining life must be positive, got {life}")));
    }
    Ok(d_pair_unchecked(x, life, params))
}

/// European put with remaining life `life` at log-moneyness `x`.
pub fn put_price(x: f64, life: f64, params: &MarketParams) -> f64 {
    let k = params.strike();
    if life <= 0.0 {
        return (k - k * x.exp()).max(0.0);
    }
    let DPair { d1, d2 } = d_pair_unchecked(x, life, params);
    let disc = (-params.rate() * life).exp();
    let value = k * disc * norm_cdf(-d2) - k * (x - params.dividend() * life).exp() * norm_cdf(-d1);
    value.clamp(0.0, k * disc)
}

/// `∂ₓ` of [`put_price`] (log-moneyness delta), `−K e^{x−q·s} N(−d₁)`.
pub fn put_delta_log(x: f64, life: f64, params: &MarketParams) -> f64 {
    let k = params.strike();
    if life <= 0.0 {
        return if x < 0.0 { -k * x.exp() } else { 0.0 };
    }
    let DPair { d1, .. } = d_pair_unchecked(x, life, params);
    -k * (x - params.dividend() * life).exp() * norm_cdf(-d1)
}

pub(crate) fn theta_unchecked(x: f64, lag: f64, p: &MarketParams) -> f64 {
    let k = p.strike();
    let DPair { d1, d2 } = d_pair_unchecked(x, lag, p);
    let disc = (-p.rate() * lag).exp();
    if d2 > 0.0 {
        // Both tails are small here and the direct sum cancels; factor out N′(d₂).
        return norm_pdf(d2) * scaled_from(d1, d2, lag, p);
    }
    p.dividend() * k * (x - p.dividend() * lag).exp() * norm_cdf(-d1)
        + p.volatility() * k / (2.0 * lag.sqrt()) * disc * norm_pdf(-d2)
        - p.rate() * k * disc * norm_cdf(-d2)
}

/// `θ/N′(d₂)` from Mills ratios, using `e^{x−qδ}N′(d₁) = e^{−rδ}N′(d₂)`.
fn scaled_from(d1: f64, d2: f64, lag: f64, p: &MarketParams) -> f64 {
    let m2 = mills_ratio(d2);
    if m2.is_infinite() {
        return f64::NEG_INFINITY;
    }
    p.strike()
        * (-p.rate() * lag).exp()
        * (p.dividend() * mills_ratio(d1) + p.volatility() / (2.0 * lag.sqrt()) - p.rate() * m2)
}

/// Theta of the European put with remaining life `lag`.
pub fn theta(x: f64, lag: f64, params: &MarketParams) -> Result<f64> {
    if !(lag > 0.0) {
        return Err(Error::Domain(format!("lag must be positive, got {lag}")));
    }
    Ok(theta_unchecked(x, lag, params))
}

/// `θ(x)/N′(−d₂)`, strictly increasing in `x`.
///
/// Evaluated through Mills ratios so it stays finite where `θ` and `N′`
/// underflow together; `−∞` on the far left.
pub fn theta_scaled(x: f64, lag: f64, params: &MarketParams) -> f64 {
    let DPair { d1, d2 } = d_pair_unchecked(x, lag, params);
    scaled_from(d1, d2, lag, params)
}

/// Unique zero `X̄` of Theta for a given lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaProfile {
    pub x_bar: f64,
    pub lag: f64,
}

/// Locates `X̄` by bisection on the monotone scaled Theta, stopping once the
/// bracket is narrower than `tol` and `|θ(X̄)| ≤ tol·rK`.
pub fn find_x_bar(lag: f64, params: &MarketParams, tol: f64) -> Result<ThetaProfile> {
    if !(lag > 0.0) {
        return Err(Error::Domain(format!("lag must be positive, got {lag}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let sign = |x: f64| theta_scaled(x, lag, params);
    let (lo, hi) = roots::expand_bracket("theta", sign)?;
    let value_tol = tol * params.rate() * params.strike();
    let x_bar = roots::bisect(lo, hi, sign, |x| theta_unchecked(x, lag, params), tol, value_tol);
    Ok(ThetaProfile { x_bar, lag })
}
