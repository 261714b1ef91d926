//! Projected SOR for tridiagonal linear complementarity problems
//! `z ≥ ψ, Mz − b ≥ 0, (z − ψ)·(Mz − b) = 0` on interior nodes.

use crate::error::{Error, Result};
use crate::model::MarketParams;

use super::grid::PsorOptions;

/// Three-point stencil of `−L̃ = −(σ²/2)∂ₓₓ − (r − q − σ²/2)∂ₓ + r` at spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub lower: f64,
    pub diag: f64,
    pub upper: f64,
}

impl Stencil {
    pub fn new(params: &MarketParams, h: f64) -> Self {
        let a = params.half_variance() / (h * h);
        let b = params.log_drift() / (2.0 * h);
        Self {
            lower: -a + b,
            diag: 2.0 * a + params.rate(),
            upper: -a - b,
        }
    }

    /// `(−L̃ z)_i` for `1 ≤ i ≤ len − 2`.
    pub fn apply(&self, z: &[f64], i: usize) -> f64 {
        self.lower * z[i - 1] + self.diag * z[i] + self.upper * z[i + 1]
    }

    /// `I·mass + weight·(−L̃)`.
    pub fn shifted(&self, mass: f64, weight: f64) -> Self {
        Self {
            lower: weight * self.lower,
            diag: mass + weight * self.diag,
            upper: weight * self.upper,
        }
    }
}

/// Largest diagonal-scaled complementarity violation
/// `|min(z − ψ, (Mz − b)/M_ii)|` over interior nodes.
pub fn lcp_residual(m: &Stencil, z: &[f64], rhs: &[f64], obstacle: &[f64]) -> f64 {
    let n = z.len();
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        let r = (m.apply(z, i) - rhs[i]) / m.diag;
        worst = worst.max((z[i] - obstacle[i]).min(r).abs());
    }
    worst
}

/// Solves the LCP in place. `z[0]` and `z[len − 1]` hold the Dirichlet data
/// and are not touched; interior entries are the starting guess.
///
/// Returns the number of sweeps used.
pub fn solve(
    m: &Stencil,
    z: &mut [f64],
    rhs: &[f64],
    obstacle: &[f64],
    opts: &PsorOptions,
    step: usize,
) -> Result<usize> {
    let n = z.len();
    for i in 1..n - 1 {
        z[i] = z[i].max(obstacle[i]);
    }
    let mut residual = lcp_residual(m, z, rhs, obstacle);
    let mut sweeps = 0;
    while residual > opts.tol {
        if sweeps == opts.max_iter {
            return Err(Error::PsorNotConverged {
                step,
                iterations: sweeps,
                worst_residual: residual,
            });
        }
        for i in 1..n - 1 {
            let gs = (rhs[i] - m.lower * z[i - 1] - m.upper * z[i + 1]) / m.diag;
            z[i] = (z[i] + opts.omega * (gs - z[i])).max(obstacle[i]);
        }
        sweeps += 1;
        residual = lcp_residual(m, z, rhs, obstacle);
    }
    Ok(sweeps)
}
