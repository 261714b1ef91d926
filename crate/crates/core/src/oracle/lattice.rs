use serde::Serialize;

use crate::error::{Error, Result};
use crate::european::put_price;
use crate::model::{LagContract, MarketParams};

pub const MIN_LATTICE_STEPS: usize = 50;

/// Cox–Ross–Rubinstein tree: `u = e^{σ√Δt}`, `d = 1/u`,
/// `p = (e^{(r−q)Δt} − d)/(u − d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice {
    pub steps: usize,
    pub dt: f64,
    pub up: f64,
    pub down: f64,
    pub prob: f64,
    log_up: f64,
}

impl Lattice {
    pub fn new(params: &MarketParams, horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lattice needs a positive horizon and step count, got {horizon}, {steps}"
            )));
        }
        let dt = horizon / steps as f64;
        let log_up = params.volatility() * dt.sqrt();
        let (up, down) = (log_up.exp(), (-log_up).exp());
        let prob = (((params.rate() - params.dividend()) * dt).exp() - down) / (up - down);
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "risk-neutral probability {prob} outside (0, 1); use more steps"
            )));
        }
        Ok(Self {
            steps,
            dt,
            up,
            down,
            prob,
            log_up,
        })
    }

    /// Stock after `j` up-moves out of `level` steps.
    pub fn stock(&self, spot: f64, level: usize, j: usize) -> f64 {
        spot * ((2.0 * j as f64 - level as f64) * self.log_up).exp()
    }

    /// Backward induction of `max(exercise, discounted continuation)` with
    /// the exercise value also used as the terminal layer.
    fn american(&self, rate: f64, spot: f64, exercise: impl Fn(f64) -> f64) -> f64 {
        let n = self.steps;
        let disc = (-rate * self.dt).exp();
        let (p, q) = (disc * self.prob, disc * (1.0 - self.prob));
        let mut v: Vec<f64> = (0..=n).map(|j| exercise(self.stock(spot, n, j))).collect();
        for level in (0..n).rev() {
            for j in 0..=level {
                let cont = p * v[j + 1] + q * v[j];
                v[j] = cont.max(exercise(self.stock(spot, level, j)));
            }
        }
        v[0]
    }
}

fn check_inputs(n_steps: usize, spot: f64) -> Result<()> {
    if n_steps < MIN_LATTICE_STEPS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_LATTICE_STEPS} lattice steps, got {n_steps}"
        )));
    }
    if !(spot > 0.0) || !spot.is_finite() {
        return Err(Error::Domain(format!("spot must be positive, got {spot}")));
    }
    Ok(())
}

/// Lagged American put at `t = 0`: decisions on `[0, T − δ]`, exercise value
/// the European put with life `δ` at the decision node.
pub fn lattice_price_lagged(params: &MarketParams, contract: &LagContract, n_steps: usize, spot: f64) -> Result<f64> {
    check_inputs(n_steps, spot)?;
    let lag = contract.lag();
    if lag == 0.0 {
        return lattice_price_standard(params, contract.maturity(), n_steps, spot);
    }
    let tree = Lattice::new(params, contract.decision_horizon(), n_steps)?;
    let k = params.strike();
    Ok(tree.american(params.rate(), spot, |s| put_price((s / k).ln(), lag, params)))
}

pub fn lattice_price_standard(params: &MarketParams, maturity: f64, n_steps: usize, spot: f64) -> Result<f64> {
    check_inputs(n_steps, spot)?;
    let tree = Lattice::new(params, maturity, n_steps)?;
    let k = params.strike();
    Ok(tree.american(params.rate(), spot, |s| (k - s).max(0.0)))
}
