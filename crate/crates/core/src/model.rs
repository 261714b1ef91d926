//! Market and contract parameters, and the log-moneyness / time-to-decision
//! coordinates used by every solver.
//!
//! All validation happens at construction, so the numerics downstream may
//! assume `K > 0`, `σ > 0`, `r > 0`, `0 ≤ q < r` and `0 ≤ δ < T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Black–Scholes world: the stock follows `dX/X = (r − q) dt + σ dW` under the
/// pricing measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams {
    strike: f64,
    rate: f64,
    dividend: f64,
    volatility: f64,
}

impl MarketParams {
    pub fn new(strike: f64, rate: f64, dividend: f64, volatility: f64) -> Result<Self> {
        let finite = [strike, rate, dividend, volatility].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("market parameters must be finite".into()));
        }
        if strike <= 0.0 {
            return Err(Error::InvalidParameter(format!("strike must be positive, got {strike}")));
        }
        if volatility <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "volatility must be positive, got {volatility}"
            )));
        }
        if rate <= 0.0 {
            return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
        }
        if dividend < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dividend yield must be non-negative, got {dividend}"
            )));
        }
        if dividend >= rate {
            return Err(Error::InvalidParameter(format!(
                "dividend yield {dividend} must be strictly below the rate {rate}"
            )));
        }
        Ok(Self {
            strike,
            rate,
            dividend,
            volatility,
        })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn dividend(&self) -> f64 {
        self.dividend
    }

    pub fn volatility(&self) -> f64 {
        self.volatility
    }

    /// Half the variance rate, the diffusion coefficient in log coordinates.
    pub fn half_variance(&self) -> f64 {
        0.5 * self.volatility * self.volatility
    }

    /// Drift of `ln X` under the pricing measure, `r − q − σ²/2`.
    pub fn log_drift(&self) -> f64 {
        self.rate - self.dividend - self.half_variance()
    }
}

impl<'de> Deserialize<'de> for MarketParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            strike: f64,
            rate: f64,
            dividend: f64,
            volatility: f64,
        }
        let raw = Raw::deserialize(d)?;
        MarketParams::new(raw.strike, raw.rate, raw.dividend, raw.volatility)
            .map_err(serde::de::Error::custom)
    }
}

/// Maturity `T` and delivery lag `δ`: a decision taken at `t ≤ T − δ` pays
/// `(K − X_{t+δ})⁺` at `t + δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagContract {
    maturity: f64,
    lag: f64,
}

impl LagContract {
    pub fn new(maturity: f64, lag: f64) -> Result<Self> {
        if !maturity.is_finite() || maturity <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "maturity must be positive and finite, got {maturity}"
            )));
        }
        if !lag.is_finite() || lag < 0.0 || lag >= maturity {
            return Err(Error::InvalidParameter(format!(
                "lag must lie in [0, maturity), got {lag} with maturity {maturity}"
            )));
        }
        Ok(Self { maturity, lag })
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn lag(&self) -> f64 {
        self.lag
    }

    /// Last admissible decision time `T − δ`.
    pub fn decision_horizon(&self) -> f64 {
        self.maturity - self.lag
    }
}

impl<'de> Deserialize<'de> for LagContract {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            maturity: f64,
            lag: f64,
        }
        let raw = Raw::deserialize(d)?;
        LagContract::new(raw.maturity, raw.lag).map_err(serde::de::Error::custom)
    }
}

/// `x = ln(X/K)` and `τ = T − δ − t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCoords {
    pub x: f64,
    pub tau: f64,
}

pub fn to_log(t: f64, stock: f64, params: &MarketParams, contract: &LagContract) -> Result<LogCoords> {
    if !(stock > 0.0) || !stock.is_finite() {
        return Err(Error::Domain(format!("stock price must be positive, got {stock}")));
    }
    let horizon = contract.decision_horizon();
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::Domain(format!("time {t} outside [0, {horizon}]")));
    }
    Ok(LogCoords {
        x: (stock / params.strike()).ln(),
        tau: horizon - t,
    })
}

/// Inverse of [`to_log`]: returns `(t, X)`.
pub fn from_log(coords: LogCoords, params: &MarketParams, contract: &LagContract) -> (f64, f64) {
    (
        contract.decision_horizon() - coords.tau,
        params.strike() * coords.x.exp(),
    )
}
