//! Multi-solve studies: ordering in the lag, convergence as the lag vanishes,
//! and the long-maturity limit. Each returns a report of named checks with
//! the worst observed value against its limit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::european::{find_x_bar, DEFAULT_ROOT_TOL};
use crate::model::{LagContract, MarketParams};
use crate::perpetual::{find_x_under, u_infinity};

use super::boundary::{extract_boundary, extract_boundary_refined, Boundary};
use super::engine::{solve_u, solve_v_lagged, solve_v_standard, Surface};
use super::grid::{default_grid, reference_span, Grid, PsorOptions};
use super::stationary::{solve_u_stationary, StationarySolution};

/// Mesh resolution shared by every solve in a study. `nt` counts steps over
/// the full maturity, so all lags see the same `Δτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyGrid {
    pub nx: usize,
    pub nt: usize,
}

impl Default for StudyGrid {
    fn default() -> Self {
        Self { nx: 600, nt: 600 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub limit: f64,
    pub location: String,
}

impl Check {
    fn at_most(name: impl Into<String>, worst: f64, limit: f64, location: String) -> Self {
        Self {
            name: name.into(),
            passed: worst <= limit,
            worst,
            limit,
            location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub lag: f64,
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub passed: bool,
    pub h: f64,
    pub dtau: f64,
    pub checks: Vec<Check>,
    /// Same shape as `checks` but not part of `passed`.
    pub observations: Vec<Check>,
    pub rows: Vec<Row>,
}

impl StudyReport {
    fn new(study: &str, h: f64, dtau: f64, checks: Vec<Check>, rows: Vec<Row>) -> Self {
        Self {
            study: study.into(),
            passed: checks.iter().all(|c| c.passed),
            h,
            dtau,
            checks,
            observations: Vec::new(),
            rows,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// One spatial mesh covering every lag's boundary range, and per-lag time
/// meshes with a common step.
struct Layout {
    x_min: f64,
    x_max: f64,
    nx: usize,
    dtau: f64,
}

impl Layout {
    fn new(params: &MarketParams, maturity: f64, lags: &[f64], g: StudyGrid) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &lag in lags.iter().chain(std::iter::once(&0.0)) {
            let (u, b) = reference_span(params, lag)?;
            lo = lo.min(u);
            hi = hi.max(b);
        }
        Ok(Self {
            x_min: lo - 4.0,
            x_max: hi + 8.0,
            nx: g.nx,
            dtau: maturity / g.nt as f64,
        })
    }

    fn grid(&self, horizon: f64) -> Result<Grid> {
        let steps = horizon / self.dtau;
        let nt = if (steps - steps.round()).abs() < 1e-9 {
            steps.round()
        } else {
            steps.ceil()
        };
        Grid::new(self.x_min, self.x_max, self.nx, horizon, nt as usize)
    }
}

fn check_lags(lags: &[f64], maturity: f64) -> Result<()> {
    if lags.is_empty() || lags.iter().any(|&d| !(0.0..maturity).contains(&d)) {
        return Err(Error::InvalidParameter(format!(
            "lags must be non-empty and lie in [0, {maturity})"
        )));
    }
    Ok(())
}

fn solve_lags(
    params: &MarketParams,
    maturity: f64,
    lags: &[f64],
    layout: &Layout,
    opts: &PsorOptions,
) -> Result<(Surface, Vec<Surface>)> {
    let standard = solve_v_standard(params, maturity, &layout.grid(maturity)?, opts)?;
    let lagged = lags
        .par_iter()
        .map(|&lag| {
            let c = LagContract::new(maturity, lag)?;
            solve_v_lagged(params, &c, &layout.grid(c.decision_horizon())?, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((standard, lagged))
}

/// `V^δ` at calendar time `t` on node `i`.
fn at_calendar(s: &Surface, horizon: f64, t: f64, i: usize) -> f64 {
    s.value_at_tau(horizon - t, i)
}

/// Ordering in the lag: `V⁰ ≥ V^δ ≥ V⁰ − δrK` and `V^{δ₂} ≤ V^{δ₁}` for
/// `δ₁ < δ₂`, nodewise on the common mesh, with slack `3(h² + Δτ)K`.
pub fn study_lag_monotonicity(
    params: &MarketParams,
    maturity: f64,
    lags: &[f64],
    grid: StudyGrid,
    opts: &PsorOptions,
) -> Result<StudyReport> {
    check_lags(lags, maturity)?;
    if lags.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("lags must be strictly ascending".into()));
    }
    let layout = Layout::new(params, maturity, lags, grid)?;
    let (standard, lagged) = solve_lags(params, maturity, lags, &layout, opts)?;
    let g0 = standard.grid;
    let h = g0.h();
    let slack = 3.0 * (h * h + layout.dtau) * params.strike();
    let rk = params.rate() * params.strike();

    let mut upper = (f64::NEG_INFINITY, String::new());
    let mut lower = (f64::NEG_INFINITY, String::new());
    let mut rows = Vec::new();
    for (&lag, s) in lags.iter().zip(&lagged) {
        let horizon = maturity - lag;
        for k in 0..=s.grid.nt {
            let t = horizon - s.grid.tau(k);
            for i in 1..=g0.nx {
                let v = s.values[k][i];
                let v0 = at_calendar(&standard, maturity, t, i);
                let loc = || format!("lag={lag}, t={t:.6}, x={:.6}", g0.x(i));
                if v - v0 > upper.0 {
                    upper = (v - v0, loc());
                }
                if v0 - lag * rk - v > lower.0 {
                    lower = (v0 - lag * rk - v, loc());
                }
            }
        }
        rows.push(Row {
            lag,
            quantity: "value_at_strike".into(),
            value: s.interpolate(s.grid.nt, 0.0)?,
        });
    }

    let mut chain = (f64::NEG_INFINITY, String::from("single lag"));
    for j in 1..lags.len() {
        let (d1, d2) = (lags[j - 1], lags[j]);
        let (s1, s2) = (&lagged[j - 1], &lagged[j]);
        for k in 0..=s2.grid.nt {
            let t = maturity - d2 - s2.grid.tau(k);
            for i in 1..=g0.nx {
                let gap = s2.values[k][i] - at_calendar(s1, maturity - d1, t, i);
                if gap > chain.0 {
                    chain = (gap, format!("lags={d1}<{d2}, t={t:.6}, x={:.6}", g0.x(i)));
                }
            }
        }
    }

    let mut checks = vec![
        Check::at_most("upper_bound", upper.0, slack, upper.1),
        Check::at_most("lower_bound", lower.0, slack, lower.1),
        Check::at_most("monotone_in_lag", chain.0, slack, chain.1),
    ];
    if let Some(j) = lags.iter().position(|&d| d == 0.0) {
        let diff = lagged[j]
            .values
            .iter()
            .flatten()
            .zip(standard.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most("zero_lag_is_standard", diff, 0.0, "all nodes".into()));
    }
    Ok(StudyReport::new("lag-monotonicity", h, layout.dtau, checks, rows))
}

/// Probe times, as fractions of the maturity, for the small-lag study.
pub const SMALL_LAG_PROBES: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
/// The probe whose gap sequence must be monotone. Elsewhere the gaps converge
/// but not always monotonically (at `3T/4` the gap for `δ = 0.1` exceeds the
/// one for `δ = 0.2` on every mesh up to 2400×2400), so those sequences are
/// reported as observations.
pub const SMALL_LAG_GATED_PROBE: f64 = 0.5;
/// Final tolerance on the boundary gap at the smallest lag, relative to `K`.
pub const SMALL_LAG_FINAL_TOL: f64 = 0.01;

/// `X^δ(t) → X⁰(t)` as `δ ↓ 0`: the gap at every probe time must end below
/// `1%` of `K`, and at [`SMALL_LAG_GATED_PROBE`] it must shrink along the
/// (descending) lag sequence.
///
/// Boundaries are located to sub-cell accuracy; see
/// [`extract_boundary_refined`].
pub fn study_small_lag(
    params: &MarketParams,
    maturity: f64,
    lags: &[f64],
    grid: StudyGrid,
    opts: &PsorOptions,
) -> Result<StudyReport> {
    check_lags(lags, maturity)?;
    if lags.windows(2).any(|w| w[0] <= w[1]) || lags.contains(&0.0) {
        return Err(Error::InvalidParameter("lags must be positive and strictly descending".into()));
    }
    let layout = Layout::new(params, maturity, lags, grid)?;
    let (standard, lagged) = solve_lags(params, maturity, lags, &layout, opts)?;
    let threshold = 10.0 * opts.tol;
    let k = params.strike();
    let h = standard.grid.h();

    let b0 = extract_boundary_refined(&standard, threshold)?;
    let b0_node = extract_boundary(&standard, threshold)?;
    let mut rows = Vec::new();
    let mut checks = vec![Check::at_most(
        "standard_end_point",
        b0_node.xs[0].abs(),
        2.0 * h,
        format!("tau={:.6}", b0_node.taus[0]),
    )];

    let mut observations = Vec::new();
    let mut gaps: Vec<Vec<f64>> = Vec::new();
    let mut time_decrease = (f64::NEG_INFINITY, String::new());
    for (&lag, s) in lags.iter().zip(&lagged) {
        let horizon = maturity - lag;
        let b = extract_boundary_refined(s, threshold)?;
        let node = extract_boundary(s, threshold)?;
        let x_bar = find_x_bar(lag, params, DEFAULT_ROOT_TOL)?.x_bar;
        checks.push(Check::at_most(
            format!("end_point(lag={lag})"),
            (node.xs[0] - x_bar).abs(),
            2.0 * h,
            format!("tau={:.6}", node.taus[0]),
        ));
        let row: Vec<f64> = SMALL_LAG_PROBES
            .iter()
            .map(|f| {
                let t = f * maturity;
                (k * b.at(horizon - t).exp() - k * b0.at(maturity - t).exp()).abs()
            })
            .collect();
        for (f, g) in SMALL_LAG_PROBES.iter().zip(&row) {
            rows.push(Row {
                lag,
                quantity: format!("boundary_gap(t={}T)", f),
                value: *g,
            });
        }
        gaps.push(row);

        // ∂_τ u ≥ 0; the obstacle is fixed in τ, so this is a statement about V^δ.
        for kk in 0..s.grid.nt {
            for i in 1..=s.grid.nx {
                let drop = s.values[kk][i] - s.values[kk + 1][i];
                if drop > time_decrease.0 {
                    time_decrease = (drop, format!("lag={lag}, level={kk}, x={:.6}", s.grid.x(i)));
                }
            }
        }
    }
    checks.push(Check::at_most("u_non_decreasing_in_tau", time_decrease.0, opts.tol, time_decrease.1));

    for (p, f) in SMALL_LAG_PROBES.iter().enumerate() {
        let mut worst = (f64::NEG_INFINITY, String::from("single lag"));
        for j in 1..lags.len() {
            let rise = gaps[j][p] - gaps[j - 1][p];
            if rise > worst.0 {
                worst = (rise, format!("lags {} -> {}", lags[j - 1], lags[j]));
            }
        }
        let monotone = Check::at_most(format!("gap_non_increasing(t={f}T)"), worst.0, 0.0, worst.1);
        if *f == SMALL_LAG_GATED_PROBE {
            checks.push(monotone);
        } else {
            observations.push(monotone);
        }
        let last = gaps[lags.len() - 1][p];
        checks.push(Check::at_most(
            format!("final_gap(t={f}T)"),
            last,
            SMALL_LAG_FINAL_TOL * k,
            format!("lag={}", lags[lags.len() - 1]),
        ));
    }
    let mut report = StudyReport::new("small-lag", h, layout.dtau, checks, rows);
    report.observations = observations;
    Ok(report)
}

/// Default value tolerance for [`study_large_maturity`]: `max(1e−3·K, C·h²)`,
/// where `C = max|u_h − u∞|/h²` is measured on the stationary problem solved
/// on the same nodes as the parabolic one. Returns `(tolerance, C)`.
pub fn perpetual_value_tolerance(params: &MarketParams, lag: f64, grid: &Grid) -> Result<(f64, f64)> {
    let (_, c) = stationary_on(params, lag, grid)?;
    let h = grid.h();
    Ok(((1e-3 * params.strike()).max(c * h * h), c))
}

fn stationary_on(params: &MarketParams, lag: f64, grid: &Grid) -> Result<(StationarySolution, f64)> {
    let line = grid.line();
    let s = solve_u_stationary(params, lag, &line, &PsorOptions::stationary(line.nx))?;
    let perp = find_x_under(lag, params, DEFAULT_ROOT_TOL)?;
    let err = (0..line.nx + 2)
        .map(|i| (s.values[i] - u_infinity(line.x(i), &perp, params)).abs())
        .fold(0.0, f64::max);
    Ok((s, err / (line.h() * line.h())))
}

/// Long-maturity limit: `x(τ) → X̲` and `u(τ, ·) → u∞`.
///
/// `value_tol` bounds `max|u(tau_max, ·) − u∞|`. The distance to the discrete
/// stationary solution on the same nodes, which separates the remaining
/// transient from the discretization error, is reported as an observation.
pub fn study_large_maturity(
    params: &MarketParams,
    lag: f64,
    tau_max: f64,
    grid: StudyGrid,
    opts: &PsorOptions,
    value_tol: f64,
) -> Result<(StudyReport, Surface, Boundary)> {
    let contract = LagContract::new(tau_max + lag, lag)?;
    let g = default_grid(params, contract.maturity(), lag, grid.nx, grid.nt)?;
    let s = solve_u(params, &contract, &g, opts)?;
    let b = extract_boundary(&s, 10.0 * opts.tol)?;
    let perp = find_x_under(lag, params, DEFAULT_ROOT_TOL)?;
    let h = g.h();

    let x_end = *b.xs.last().expect("non-empty boundary");
    let worst = |target: &dyn Fn(usize) -> f64| {
        (0..g.width())
            .map(|i| ((s.last()[i] - target(i)).abs(), i))
            .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let (gap, at) = worst(&|i| u_infinity(g.x(i), &perp, params));
    let (stationary, c) = stationary_on(params, lag, &g)?;
    let (gap_discrete, at_discrete) = worst(&|i| stationary.values[i]);
    let checks = vec![
        Check::at_most(
            "boundary_near_perpetual",
            (x_end - perp.x_under).abs(),
            3.0 * h,
            format!("tau={tau_max}"),
        ),
        Check::at_most("value_near_perpetual", gap, value_tol, format!("x={:.6}", g.x(at))),
    ];
    let rows = [
        ("x_end", x_end),
        ("x_under", perp.x_under),
        ("stationary_error_constant", c),
    ]
    .into_iter()
    .map(|(q, value)| Row {
        lag,
        quantity: q.into(),
        value,
    })
    .collect();
    let mut report = StudyReport::new("large-maturity", h, g.dtau(), checks, rows);
    report.observations.push(Check::at_most(
        "value_near_discrete_stationary",
        gap_discrete,
        value_tol,
        format!("x={:.6}", g.x(at_discrete)),
    ));
    Ok((report, s, b))
}
