//! Perpetual version of the Theta-paying stopping problem: characteristic
//! roots of the stationary operator, the boundary equation `l(x) = 0` and
//! the explicit value `u∞`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::european::{self, mills_ratio, norm_cdf, norm_pdf, put_price, DPair};
use crate::model::MarketParams;
use crate::roots;

/// Roots of `(σ²/2)λ² + (r − q − σ²/2)λ − r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharRoots {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl CharRoots {
    /// Plug-back residual of a candidate root.
    pub fn residual(params: &MarketParams, lambda: f64) -> f64 {
        params.half_variance() * lambda * lambda + params.log_drift() * lambda - params.rate()
    }
}

pub fn char_roots(params: &MarketParams) -> CharRoots {
    let a = params.half_variance();
    let b = params.log_drift();
    let c = -params.rate();
    // c < 0 < a, so the discriminant is positive and the roots have opposite signs.
    let disc = (b * b - 4.0 * a * c).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let (r1, r2) = (q / a, c / q);
    CharRoots {
        lambda_plus: r1.max(r2),
        lambda_minus: r1.min(r2),
    }
}

/// Solution of the stationary free-boundary problem for one lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerpetualSolution {
    pub x_under: f64,
    pub roots: CharRoots,
    pub lag: f64,
    /// European put (life `δ`) at `X̲`; replaces the constant `C·K·e^{λ⁻X̲}`.
    pub p_at_boundary: f64,
}

pub(crate) fn l_unchecked(x: f64, lag: f64, params: &MarketParams, lambda_minus: f64) -> f64 {
    let DPair { d1, d2 } = european::d_pair(x, lag, params).expect("lag checked by caller");
    if d2 > 0.0 {
        // Same cancellation as for Theta: factor the shared density out.
        return (-params.rate() * lag).exp() * norm_pdf(d2) * l_scaled(x, lag, params, lambda_minus);
    }
    lambda_minus * (-params.rate() * lag).exp() * norm_cdf(-d2)
        + (1.0 - lambda_minus) * (x - params.dividend() * lag).exp() * norm_cdf(-d1)
}

/// `l(x) = λ⁻e^{−rδ}N(−d₂) + (1 − λ⁻)e^{x−qδ}N(−d₁)`.
pub fn l_function(x: f64, lag: f64, params: &MarketParams) -> Result<f64> {
    if !(lag > 0.0) {
        return Err(Error::Domain(format!("lag must be positive, got {lag}")));
    }
    Ok(l_unchecked(x, lag, params, char_roots(params).lambda_minus))
}

/// `l(x)·e^{rδ}/N′(d₂)`, same sign as `l` but finite where both tails underflow.
fn l_scaled(x: f64, lag: f64, params: &MarketParams, lambda_minus: f64) -> f64 {
    let DPair { d1, d2 } = european::d_pair(x, lag, params).expect("lag checked by caller");
    let m2 = mills_ratio(d2);
    if m2.is_infinite() {
        return f64::NEG_INFINITY;
    }
    lambda_minus * m2 + (1.0 - lambda_minus) * mills_ratio(d1)
}

/// Finds `X̲` with `|l(X̲)| ≤ tol`, then checks `X̲ < X̄`.
pub fn find_x_under(lag: f64, params: &MarketParams, tol: f64) -> Result<PerpetualSolution> {
    if !(lag > 0.0) {
        return Err(Error::Domain(format!("lag must be positive, got {lag}")));
    }
    let roots = char_roots(params);
    let lm = roots.lambda_minus;
    let sign = |x: f64| l_scaled(x, lag, params, lm);
    let (lo, hi) = roots::expand_bracket("l", sign)?;
    let x_under = roots::bisect(lo, hi, sign, |x| l_unchecked(x, lag, params, lm), tol, tol);

    let x_bar = european::find_x_bar(lag, params, european::DEFAULT_ROOT_TOL)?.x_bar;
    if x_under >= x_bar {
        return Err(Error::Inconsistent(format!(
            "perpetual boundary {x_under} is not left of the Theta zero {x_bar}"
        )));
    }
    Ok(PerpetualSolution {
        x_under,
        roots,
        lag,
        p_at_boundary: put_price(x_under, lag, params),
    })
}

/// `u∞(x) = p(X̲)e^{λ⁻(x−X̲)} − p(x)` right of `X̲`, zero elsewhere.
pub fn u_infinity(x: f64, sol: &PerpetualSolution, params: &MarketParams) -> f64 {
    if x <= sol.x_under {
        return 0.0;
    }
    let value = sol.p_at_boundary * (sol.roots.lambda_minus * (x - sol.x_under)).exp()
        - put_price(x, sol.lag, params);
    value.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::european::{put_delta_log, theta};

    fn market() -> MarketParams {
        MarketParams::new(100.0, 0.05, 0.02, 0.2).unwrap()
    }

    #[test]
    fn roots_match_direct_quadratic_formula() {
        // 0.02λ² + 0.01λ − 0.05 = 0
        let direct = |s: f64| (-0.01 + s * (0.01f64 * 0.01 + 4.0 * 0.02 * 0.05).sqrt()) / (2.0 * 0.02);
        let r = char_roots(&market());
        assert!((r.lambda_plus - direct(1.0)).abs() < 1e-13);
        assert!((r.lambda_minus - direct(-1.0)).abs() < 1e-13);
        assert!(r.lambda_plus > 0.0 && r.lambda_minus < 0.0);
    }

    #[test]
    fn roots_with_zero_linear_coefficient() {
        // r − q = σ²/2 makes the linear term vanish.
        let p = MarketParams::new(100.0, 0.05, 0.03, 0.2).unwrap();
        let r = char_roots(&p);
        assert!((r.lambda_plus + r.lambda_minus).abs() < 1e-12);
        assert!(CharRoots::residual(&p, r.lambda_plus).abs() < 1e-12 * p.rate());
    }

    #[test]
    fn l_tails() {
        let p = market();
        let lm = char_roots(&p).lambda_minus;
        let left = l_function(-30.0, 0.25, &p).unwrap();
        assert!((left - lm * (-0.05f64 * 0.25).exp()).abs() < 1e-12);
        assert!(l_function(3.0, 1.0, &p).unwrap() > 0.0);
        assert!(l_function(0.0, 0.0, &p).is_err());
    }

    #[test]
    fn boundary_is_left_of_theta_zero_and_pastes_smoothly() {
        let p = market();
        let sol = find_x_under(0.25, &p, 1e-12).unwrap();
        let x_bar = european::find_x_bar(0.25, &p, 1e-12).unwrap().x_bar;
        assert!(sol.x_under < x_bar);
        assert!(l_function(sol.x_under, 0.25, &p).unwrap().abs() <= 1e-12);
        let lhs = sol.p_at_boundary * sol.roots.lambda_minus;
        let rhs = put_delta_log(sol.x_under, 0.25, &p);
        assert!((lhs - rhs).abs() < 1e-10 * p.strike());
        assert!(theta(sol.x_under, 0.25, &p).unwrap() < 0.0);
    }

    #[test]
    fn u_infinity_vanishes_on_the_exercise_side_and_far_right() {
        let p = market();
        let sol = find_x_under(0.25, &p, 1e-12).unwrap();
        assert_eq!(u_infinity(sol.x_under, &sol, &p), 0.0);
        assert_eq!(u_infinity(sol.x_under - 1.0, &sol, &p), 0.0);
        assert!(u_infinity(20.0, &sol, &p) < 1e-10);
        for i in 1..=500 {
            let x = sol.x_under + 1e-3 + i as f64 * 0.01;
            assert!(u_infinity(x, &sol, &p) > 0.0, "x = {x}");
        }
    }
}
