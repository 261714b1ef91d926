//! Free boundary read off a solved surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::engine::Surface;

/// `x(τ_k)` in log-moneyness, one sample per resolved time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub taus: Vec<f64>,
    pub xs: Vec<f64>,
}

/// Smallest node `x_i` per level with `value − obstacle > threshold`.
///
/// The first level may be unresolved (the continuation region can be thinner
/// than a cell after one step) and is skipped; any later level without a
/// continuation node is an error.
pub fn extract_boundary(surface: &Surface, threshold: f64) -> Result<Boundary> {
    let mut out = Boundary {
        taus: Vec::new(),
        xs: Vec::new(),
    };
    for (k, i) in first_nodes(surface, threshold)? {
        out.taus.push(surface.grid.tau(k));
        out.xs.push(surface.grid.x(i));
    }
    Ok(out)
}

/// Sub-cell version of [`extract_boundary`].
///
/// The node boundary only moves in whole cells. Instead, record when the
/// boundary first reaches each node (midway between the last level without
/// and the first level with that node in the continuation region) and
/// interpolate `x(τ)` linearly between those arrivals. Before the first and
/// after the last arrival the neighbouring slope is extended, kept inside the
/// cell the node boundary puts it in.
pub fn extract_boundary_refined(surface: &Surface, threshold: f64) -> Result<Boundary> {
    let node = extract_boundary(surface, threshold)?;
    let g = &surface.grid;
    let h = g.h();
    let half_step = 0.5 * g.dtau();
    // Arrivals keyed by time; a multi-cell jump keeps only its leftmost node.
    let mut events: Vec<(f64, f64)> = Vec::new();
    let mut edge = node.xs[0];
    for (&tau, &x) in node.taus.iter().zip(&node.xs).skip(1) {
        if x < edge - 0.5 * h {
            edge = x;
            events.push((tau - half_step, x));
        }
    }
    if events.len() < 2 {
        return Ok(node);
    }
    let ev_t: Vec<f64> = events.iter().map(|e| e.0).collect();
    let ev_x: Vec<f64> = events.iter().map(|e| e.1).collect();
    let n = events.len();
    let slope_first = (ev_x[1] - ev_x[0]) / (ev_t[1] - ev_t[0]);
    let slope_last = (ev_x[n - 1] - ev_x[n - 2]) / (ev_t[n - 1] - ev_t[n - 2]);
    let xs = node
        .taus
        .iter()
        .zip(&node.xs)
        .map(|(&tau, &cell_top)| {
            let x = if tau < ev_t[0] {
                ev_x[0] + slope_first * (tau - ev_t[0])
            } else if tau > ev_t[n - 1] {
                ev_x[n - 1] + slope_last * (tau - ev_t[n - 1])
            } else {
                interp(&ev_t, &ev_x, tau)
            };
            x.clamp(cell_top - h, cell_top)
        })
        .collect();
    Ok(Boundary { taus: node.taus, xs })
}

fn first_nodes(surface: &Surface, threshold: f64) -> Result<Vec<(usize, usize)>> {
    let g = &surface.grid;
    let mut found = Vec::with_capacity(g.nt);
    for k in 1..=g.nt {
        match (1..=g.nx).find(|&i| surface.excess(k, i) > threshold) {
            Some(i) => found.push((k, i)),
            None if k == 1 => continue,
            None => return Err(Error::DegenerateSurface { level: k }),
        }
    }
    Ok(found)
}

impl Boundary {
    /// Linear interpolation in `τ`, held constant outside the sampled range.
    pub fn at(&self, tau: f64) -> f64 {
        interp(&self.taus, &self.xs, tau)
    }

    /// Largest rise `x(τ_{k+1}) − x(τ_k)`; non-positive for a non-increasing boundary.
    pub fn max_rise(&self) -> (f64, usize) {
        self.xs
            .windows(2)
            .enumerate()
            .map(|(k, w)| (w[1] - w[0], k + 1))
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
    }

    /// First time the boundary reaches each node, for a node boundary on a
    /// mesh of spacing `h`. Entries run leftwards in `x`; a jump of several
    /// cells in one level gives several nodes the same time.
    pub fn arrivals(&self, h: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (&tau, &x) in self.taus.iter().zip(&self.xs) {
            let mut edge = match out.last() {
                None => {
                    out.push((tau, x));
                    continue;
                }
                Some(&(_, e)) => e,
            };
            while x < edge - 0.5 * h {
                edge -= h;
                out.push((tau, edge));
            }
        }
        out
    }

    /// Shortest time the boundary takes to cross `cells` consecutive cells;
    /// positive iff it is strictly decreasing at that resolution.
    pub fn min_crossing_time(&self, h: f64, cells: usize) -> (f64, f64) {
        let a = self.arrivals(h);
        (0..a.len().saturating_sub(cells))
            .map(|j| (a[j + cells].0 - a[j].0, a[j].1))
            .fold((f64::INFINITY, f64::NAN), |m, v| if v.0 < m.0 { v } else { m })
    }

    /// `X(t) = K e^{x(horizon − t)}` on ascending `t`, with `end_x` appended
    /// as the value at `t = horizon`.
    pub fn to_calendar(&self, horizon: f64, strike: f64, end_x: f64) -> CalendarBoundary {
        let mut times: Vec<f64> = self.taus.iter().rev().map(|tau| horizon - tau).collect();
        let mut stocks: Vec<f64> = self.xs.iter().rev().map(|x| strike * x.exp()).collect();
        times.push(horizon);
        stocks.push(strike * end_x.exp());
        CalendarBoundary { times, stocks }
    }
}

/// Exercise boundary as a stock price against calendar time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalendarBoundary {
    pub times: Vec<f64>,
    pub stocks: Vec<f64>,
}

impl CalendarBoundary {
    pub fn at(&self, t: f64) -> f64 {
        interp(&self.times, &self.stocks, t)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = (x - x0) / (x1 - x0);
    (1.0 - w) * ys[j - 1] + w * ys[j]
}
