use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::european::{find_x_bar, DEFAULT_ROOT_TOL};
use crate::model::MarketParams;
use crate::perpetual::{char_roots, find_x_under};

pub const MIN_NODES: usize = 50;
pub const MIN_STEPS: usize = 50;

/// Uniform `(τ, x)` mesh. Nodes `0` and `nx + 1` carry Dirichlet data; the
/// `nx` nodes in between are unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub tau_max: f64,
    pub nt: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, nx: usize, tau_max: f64, nt: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter(format!("bad x span [{x_min}, {x_max}]")));
        }
        if nx < MIN_NODES || nt < MIN_STEPS {
            return Err(Error::InvalidParameter(format!(
                "grid needs nx ≥ {MIN_NODES} and nt ≥ {MIN_STEPS}, got nx = {nx}, nt = {nt}"
            )));
        }
        if !(tau_max > 0.0) || !tau_max.is_finite() {
            return Err(Error::InvalidParameter(format!("tau_max must be positive, got {tau_max}")));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            tau_max,
            nt,
        })
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx + 1) as f64
    }

    pub fn dtau(&self) -> f64 {
        self.tau_max / self.nt as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn tau(&self, k: usize) -> f64 {
        k as f64 * self.dtau()
    }

    /// Number of stored nodes per time level, boundaries included.
    pub fn width(&self) -> usize {
        self.nx + 2
    }

    pub fn line(&self) -> LineGrid {
        LineGrid {
            x_min: self.x_min,
            x_max: self.x_max,
            nx: self.nx,
        }
    }

    /// Requires the free boundary range `[x_lo, x_hi]` to sit well inside the mesh.
    pub fn check_encloses(&self, x_lo: f64, x_hi: f64) -> Result<()> {
        self.line().check_encloses(x_lo, x_hi)
    }
}

/// Uniform 1-d mesh for the stationary problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
}

impl LineGrid {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        if !(x_min < x_max) || nx < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "bad line grid [{x_min}, {x_max}] with {nx} nodes"
            )));
        }
        Ok(Self { x_min, x_max, nx })
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn check_encloses(&self, x_lo: f64, x_hi: f64) -> Result<()> {
        if !(self.x_min < x_lo - 1.0 && self.x_max > x_hi + 3.0) {
            return Err(Error::InvalidParameter(format!(
                "grid [{}, {}] must extend past [{} − 1, {} + 3]",
                self.x_min, self.x_max, x_lo, x_hi
            )));
        }
        Ok(())
    }
}

/// Projected SOR settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsorOptions {
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PsorOptions {
    fn default() -> Self {
        Self {
            omega: 1.5,
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

impl PsorOptions {
    /// Settings for the elliptic problem: without the `1/Δτ` mass term the
    /// system is poorly conditioned, so use the SOR-optimal relaxation for a
    /// second-difference matrix of this size.
    pub fn stationary(nx: usize) -> Self {
        let rho = (std::f64::consts::PI / (nx + 1) as f64).cos();
        Self {
            omega: 2.0 / (1.0 + (1.0 - rho * rho).sqrt()),
            tol: 1e-12,
            max_iter: 2_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::InvalidParameter(format!("omega must lie in (0, 2), got {}", self.omega)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("PSOR tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// `(X̲, X̄)` in log-moneyness for the given lag.
///
/// For `δ = 0` these degenerate to the standard put's perpetual boundary
/// `ln(λ⁻/(λ⁻ − 1))` and the strike (`x = 0`), which is where the lagged
/// quantities converge.
pub fn reference_span(params: &MarketParams, lag: f64) -> Result<(f64, f64)> {
    if lag == 0.0 {
        let lm = char_roots(params).lambda_minus;
        return Ok(((lm / (lm - 1.0)).ln(), 0.0));
    }
    let under = find_x_under(lag, params, DEFAULT_ROOT_TOL)?.x_under;
    let bar = find_x_bar(lag, params, DEFAULT_ROOT_TOL)?.x_bar;
    Ok((under, bar))
}

/// Default mesh: `[X̲ − 4, X̄ + 8]` in space and `[0, T − δ]` in time.
pub fn default_grid(params: &MarketParams, maturity: f64, lag: f64, nx: usize, nt: usize) -> Result<Grid> {
    let (under, bar) = reference_span(params, lag)?;
    Grid::new(under - 4.0, bar + 8.0, nx, maturity - lag, nt)
}
