use std::path::Path;

use lagput::european::{find_x_bar, put_price, DEFAULT_ROOT_TOL};
use lagput::fd::{
    default_grid, extract_boundary, perpetual_value_tolerance, reference_span, solve_u, solve_v_lagged,
    solve_v_standard, study_lag_monotonicity, study_large_maturity, study_small_lag, StudyReport,
};
use lagput::perpetual::{char_roots, find_x_under};
use serde::Serialize;
use serde_json::json;

use crate::output::{self, num};
use crate::scenario::{Scenario, StudyName};
use crate::Failure;

const DEFAULT_MONOTONICITY_LAGS: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.4];
const DEFAULT_SMALL_LAGS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
const DEFAULT_TAU_MAX: f64 = 25.0;

#[derive(Serialize)]
struct Summary {
    spot: f64,
    value: f64,
    x_bar: f64,
    x_under: f64,
    lambda_minus: f64,
    /// `max|V^δ − P(life δ) − u|`; absent for the standard put.
    decomposition_max_gap: Option<f64>,
    /// Boundary stock price at the first resolved level, next to the end of
    /// the decision window.
    boundary_end_stock: f64,
    h: f64,
    dtau: f64,
}

pub fn price(sc: &Scenario, out: &Path) -> Result<(), Failure> {
    let (p, c) = (&sc.market, &sc.contract);
    let lag = c.lag();
    let g = default_grid(p, c.maturity(), lag, sc.grid.nx, sc.grid.nt)?;
    let k = p.strike();
    let (v, gap, x_bar, x_under) = if lag > 0.0 {
        let (v, u) = rayon::join(|| solve_v_lagged(p, c, &g, &sc.psor), || solve_u(p, c, &g, &sc.psor));
        let (v, u) = (v?, u?);
        let mut gap: f64 = 0.0;
        for (vk, uk) in v.values.iter().zip(&u.values) {
            for i in 0..g.width() {
                gap = gap.max((vk[i] - put_price(g.x(i), lag, p) - uk[i]).abs());
            }
        }
        let x_bar = find_x_bar(lag, p, DEFAULT_ROOT_TOL)?.x_bar;
        let x_under = find_x_under(lag, p, DEFAULT_ROOT_TOL)?.x_under;
        (v, Some(gap), x_bar, x_under)
    } else {
        let v = solve_v_standard(p, c.maturity(), &g, &sc.psor)?;
        let (x_under, x_bar) = reference_span(p, 0.0)?;
        (v, None, x_bar, x_under)
    };
    let b = extract_boundary(&v, 10.0 * sc.psor.tol)?;
    let spot = sc.spot();
    let summary = Summary {
        spot,
        value: v.interpolate(g.nt, (spot / k).ln())?,
        x_bar,
        x_under,
        lambda_minus: char_roots(p).lambda_minus,
        decomposition_max_gap: gap,
        boundary_end_stock: k * b.xs[0].exp(),
        h: g.h(),
        dtau: g.dtau(),
    };

    output::write_surface_csv(out, &v)?;
    output::write_boundary_csv(out, &b)?;
    output::write_doc(out, "surface.json", "surface", sc, output::grid_value(&v), output::surface_data(&v))?;
    output::write_doc(out, "boundary.json", "boundary", sc, output::grid_value(&v), &b)?;
    output::write_doc(out, "summary.json", "summary", sc, output::grid_value(&v), &summary)?;

    println!("value at t=0, X={}: {}", num(spot), num(summary.value));
    println!("x_bar {}  x_under {}  lambda_minus {}", num(x_bar), num(x_under), num(summary.lambda_minus));
    println!("boundary end point {} (first level tau={})", num(summary.boundary_end_stock), num(b.taus[0]));
    if let Some(gap) = gap {
        println!("decomposition max gap {}", num(gap));
    }
    Ok(())
}

/// Runs a study; `Ok(false)` if any of its checks failed.
pub fn study(sc: &Scenario, name: StudyName, out: &Path) -> Result<bool, Failure> {
    let (p, c) = (&sc.market, &sc.contract);
    let grid_doc = json!({ "nx": sc.grid.nx, "nt": sc.grid.nt });
    let report: StudyReport = match name {
        StudyName::LagMonotonicity => {
            let lags = sc.study.lags.clone().unwrap_or_else(|| DEFAULT_MONOTONICITY_LAGS.to_vec());
            study_lag_monotonicity(p, c.maturity(), &lags, sc.grid, &sc.psor)?
        }
        StudyName::SmallLag => {
            let lags = sc.study.lags.clone().unwrap_or_else(|| DEFAULT_SMALL_LAGS.to_vec());
            study_small_lag(p, c.maturity(), &lags, sc.grid, &sc.psor)?
        }
        StudyName::LargeMaturity => {
            let lag = c.lag();
            if lag == 0.0 {
                return Err(Failure::Input("the large-maturity study needs a positive lag".into()));
            }
            let tau_max = sc.study.tau_max.unwrap_or(DEFAULT_TAU_MAX);
            let value_tol = match sc.study.value_tol {
                Some(t) => t,
                None => {
                    let g = default_grid(p, tau_max + lag, lag, sc.grid.nx, sc.grid.nt)?;
                    perpetual_value_tolerance(p, lag, &g)?.0
                }
            };
            let (report, _, b) = study_large_maturity(p, lag, tau_max, sc.grid, &sc.psor, value_tol)?;
            output::write_boundary_csv(out, &b)?;
            report
        }
    };
    output::write_rows_csv(out, &report.rows)?;
    output::write_doc(out, "report.json", "report", sc, grid_doc, &report)?;

    for ch in &report.checks {
        let verdict = if ch.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: worst {} limit {} ({})", ch.name, num(ch.worst), num(ch.limit), ch.location);
    }
    for ch in &report.observations {
        println!("info {}: worst {} limit {} ({})", ch.name, num(ch.worst), num(ch.limit), ch.location);
    }
    println!("study {}: {}", report.study, if report.passed { "passed" } else { "failed" });
    Ok(report.passed)
}
