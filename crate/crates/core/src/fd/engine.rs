//! Crank–Nicolson obstacle solver in `(τ, x)` with a Rannacher start.
//!
//! Every parabolic solve in this crate is an instance of
//! `∂_τ w − L̃w = f(x)`, `w ≥ ψ(x)`, `w(0, ·) = w₀`, with Dirichlet data at
//! both ends of the mesh.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::european::{put_price, theta_unchecked, DEFAULT_ROOT_TOL};
use crate::model::{LagContract, MarketParams};
use crate::perpetual::{find_x_under, u_infinity};

use super::grid::{reference_span, Grid, PsorOptions};
use super::psor::{self, Stencil};

/// Nodal solution `values[k][i]` at `(τ_k, x_i)`, boundary columns included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub grid: Grid,
    pub values: Vec<Vec<f64>>,
    /// Obstacle at each node; the free boundary is read off `values − obstacle`.
    pub obstacle: Vec<f64>,
    /// Source term at each node (`θ` for the `u` problem, zero otherwise).
    pub source: Vec<f64>,
    /// Worst scaled complementarity residual certified at each step; entry 0 is
    /// the initial level and always 0.
    pub step_residuals: Vec<f64>,
}

impl Surface {
    pub fn excess(&self, k: usize, i: usize) -> f64 {
        self.values[k][i] - self.obstacle[i]
    }

    pub fn last(&self) -> &[f64] {
        &self.values[self.grid.nt]
    }

    /// Linear interpolation between time levels at node `i`.
    pub fn value_at_tau(&self, tau: f64, i: usize) -> f64 {
        let s = (tau / self.grid.dtau()).clamp(0.0, self.grid.nt as f64);
        let k = (s.floor() as usize).min(self.grid.nt - 1);
        let w = s - k as f64;
        (1.0 - w) * self.values[k][i] + w * self.values[k + 1][i]
    }

    /// Cubic Lagrange interpolation in `x` on level `k`.
    pub fn interpolate(&self, k: usize, x: f64) -> Result<f64> {
        let g = &self.grid;
        if !(x >= g.x_min && x <= g.x_max) {
            return Err(Error::Domain(format!("x = {x} outside [{}, {}]", g.x_min, g.x_max)));
        }
        let s = (x - g.x_min) / g.h();
        let last = g.nx + 1;
        let base = (s.floor() as usize).saturating_sub(1).min(last - 3);
        let row = &self.values[k];
        let mut total = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (s - (base + b) as f64) / (a as f64 - b as f64);
                }
            }
            total += w * row[base + a];
        }
        Ok(total)
    }

    /// Recomputes the scaled complementarity residual from the stored levels
    /// for every Crank–Nicolson step. The first step goes through an
    /// unstored half level and is covered by `step_residuals` instead.
    pub fn recheck_complementarity(&self, params: &MarketParams) -> f64 {
        let g = &self.grid;
        let dt = g.dtau();
        let a = Stencil::new(params, g.h());
        let m = a.shifted(1.0, 0.5 * dt);
        let mut worst: f64 = 0.0;
        for k in 2..=g.nt {
            let prev = &self.values[k - 1];
            let rhs = explicit_part(&a, prev, &self.source, dt, 0.5);
            worst = worst.max(psor::lcp_residual(&m, &self.values[k], &rhs, &self.obstacle));
        }
        worst
    }
}

fn explicit_part(a: &Stencil, prev: &[f64], source: &[f64], dt: f64, weight: f64) -> Vec<f64> {
    let n = prev.len();
    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        rhs[i] = prev[i] - (1.0 - weight) * dt * a.apply(prev, i) + dt * source[i];
    }
    rhs
}

pub(crate) struct Problem<B: Fn(f64) -> (f64, f64)> {
    pub grid: Grid,
    pub source: Vec<f64>,
    pub obstacle: Vec<f64>,
    pub initial: Vec<f64>,
    /// Dirichlet values `(left, right)` at a given `τ > 0`.
    pub boundary: B,
}

pub(crate) fn run<B: Fn(f64) -> (f64, f64)>(
    params: &MarketParams,
    problem: Problem<B>,
    opts: &PsorOptions,
) -> Result<Surface> {
    opts.validate()?;
    let g = problem.grid;
    let dt = g.dtau();
    let a = Stencil::new(params, g.h());
    let mut values = Vec::with_capacity(g.nt + 1);
    let mut residuals = Vec::with_capacity(g.nt + 1);
    values.push(problem.initial.clone());
    residuals.push(0.0);

    let step = |prev: &[f64], tau: f64, dt: f64, weight: f64, k: usize| -> Result<(Vec<f64>, f64)> {
        let m = a.shifted(1.0, weight * dt);
        let rhs = explicit_part(&a, prev, &problem.source, dt, weight);
        let mut z = prev.to_vec();
        let (left, right) = (problem.boundary)(tau);
        z[0] = left;
        z[g.nx + 1] = right;
        psor::solve(&m, &mut z, &rhs, &problem.obstacle, opts, k)?;
        let res = psor::lcp_residual(&m, &z, &rhs, &problem.obstacle);
        Ok((z, res))
    };

    // Rannacher start: two implicit Euler half steps damp the obstacle kink.
    let (half, r1) = step(&problem.initial, 0.5 * dt, 0.5 * dt, 1.0, 1)?;
    let (first, r2) = step(&half, dt, 0.5 * dt, 1.0, 1)?;
    values.push(first);
    residuals.push(r1.max(r2));
    for k in 2..=g.nt {
        let (next, r) = step(&values[k - 1], g.tau(k), dt, 0.5, k)?;
        values.push(next);
        residuals.push(r);
    }
    Ok(Surface {
        grid: g,
        values,
        obstacle: problem.obstacle,
        source: problem.source,
        step_residuals: residuals,
    })
}

fn check_horizon(grid: &Grid, horizon: f64) -> Result<()> {
    if (grid.tau_max - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "grid horizon {} does not match the decision horizon {horizon}",
            grid.tau_max
        )));
    }
    Ok(())
}

fn nodes(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..grid.width()).map(|i| f(grid.x(i))).collect()
}

/// Solves for `u = V^δ − P(T − δ, ·)`, the value of collecting `θ` until an
/// optimal stop.
pub fn solve_u(params: &MarketParams, contract: &LagContract, grid: &Grid, opts: &PsorOptions) -> Result<Surface> {
    let lag = contract.lag();
    if !(lag > 0.0) {
        return Err(Error::Domain("the u formulation needs a positive lag".into()));
    }
    check_horizon(grid, contract.decision_horizon())?;
    let (under, bar) = reference_span(params, lag)?;
    grid.check_encloses(under, bar)?;
    let perp = find_x_under(lag, params, DEFAULT_ROOT_TOL)?;
    let right = u_infinity(grid.x_max, &perp, params);
    run(
        params,
        Problem {
            grid: *grid,
            source: nodes(grid, |x| theta_unchecked(x, lag, params)),
            obstacle: vec![0.0; grid.width()],
            initial: vec![0.0; grid.width()],
            boundary: move |_| (0.0, right),
        },
        opts,
    )
}

/// Lagged American put `V^δ` on `τ = T − δ − t` with obstacle `P(T − δ, ·)`.
/// A zero lag is the standard American put.
pub fn solve_v_lagged(params: &MarketParams, contract: &LagContract, grid: &Grid, opts: &PsorOptions) -> Result<Surface> {
    let lag = contract.lag();
    if lag == 0.0 {
        return solve_v_standard(params, contract.maturity(), grid, opts);
    }
    check_horizon(grid, contract.decision_horizon())?;
    let (under, bar) = reference_span(params, lag)?;
    grid.check_encloses(under, bar)?;
    let perp = find_x_under(lag, params, DEFAULT_ROOT_TOL)?;
    let obstacle = nodes(grid, |x| put_price(x, lag, params));
    let left = obstacle[0];
    let right = obstacle[grid.nx + 1] + u_infinity(grid.x_max, &perp, params);
    run(
        params,
        Problem {
            grid: *grid,
            source: vec![0.0; grid.width()],
            initial: obstacle.clone(),
            obstacle,
            boundary: move |_| (left, right),
        },
        opts,
    )
}

/// Standard American put `V⁰` on `τ = T − t`.
pub fn solve_v_standard(params: &MarketParams, maturity: f64, grid: &Grid, opts: &PsorOptions) -> Result<Surface> {
    check_horizon(grid, maturity)?;
    let (under, bar) = reference_span(params, 0.0)?;
    grid.check_encloses(under, bar)?;
    let k = params.strike();
    let obstacle = nodes(grid, |x| (k - k * x.exp()).max(0.0));
    let left = obstacle[0];
    let x_max = grid.x_max;
    let p = *params;
    run(
        params,
        Problem {
            grid: *grid,
            source: vec![0.0; grid.width()],
            initial: obstacle.clone(),
            obstacle,
            boundary: move |tau| (left, put_price(x_max, tau, &p)),
        },
        opts,
    )
}
