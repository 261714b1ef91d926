use serde::Serialize;

use crate::error::{Error, Result};
use crate::european::{theta_unchecked, DEFAULT_ROOT_TOL};
use crate::model::MarketParams;
use crate::perpetual::{find_x_under, u_infinity};

use super::grid::{reference_span, LineGrid, PsorOptions};
use super::psor::{self, Stencil};

/// Discrete solution of `−L̃u ≥ θ`, `u ≥ 0`, with complementarity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarySolution {
    pub grid: LineGrid,
    pub values: Vec<f64>,
    /// First node whose value exceeds `10 × tol`.
    pub x_under_numeric: f64,
    pub sweeps: usize,
}

pub fn solve_u_stationary(
    params: &MarketParams,
    lag: f64,
    grid: &LineGrid,
    opts: &PsorOptions,
) -> Result<StationarySolution> {
    if !(lag > 0.0) {
        return Err(Error::Domain(format!("lag must be positive, got {lag}")));
    }
    opts.validate()?;
    let (under, bar) = reference_span(params, lag)?;
    grid.check_encloses(under, bar)?;
    let perp = find_x_under(lag, params, DEFAULT_ROOT_TOL)?;

    let n = grid.nx + 2;
    let rhs: Vec<f64> = (0..n).map(|i| theta_unchecked(grid.x(i), lag, params)).collect();
    let obstacle = vec![0.0; n];
    let mut z = vec![0.0; n];
    z[n - 1] = u_infinity(grid.x_max, &perp, params);
    let m = Stencil::new(params, grid.h());
    let sweeps = psor::solve(&m, &mut z, &rhs, &obstacle, opts, 0)?;

    let threshold = 10.0 * opts.tol;
    let first = (1..n - 1)
        .find(|&i| z[i] > threshold)
        .ok_or(Error::DegenerateSurface { level: 0 })?;
    Ok(StationarySolution {
        grid: *grid,
        values: z,
        x_under_numeric: grid.x(first),
        sweeps,
    })
}
