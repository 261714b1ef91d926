//! Exhaustive check that a stopping problem with delivery lag equals a
//! lag-free problem whose obstacle is the conditional value of what will be
//! delivered.
//!
//! Nodes are `(level, j)` with `j` up-moves. A stopping rule is a set of
//! marked nodes; the rule stops at the first marked node on each path, so two
//! markings that agree on every path's first hit are the same rule. The
//! search below walks rules directly: at each level it chooses which of the
//! still-alive nodes stop, which visits every distinct rule exactly once.

use serde::Serialize;

use crate::error::{Error, Result};

use super::lattice::Lattice;

pub const MAX_HORIZON: usize = 12;
pub const MAX_LAG_STEPS: usize = 3;
/// Rule counts grow doubly exponentially in the number of decision levels
/// (8 levels already give 8,289,217 rules), so cap it.
pub const MAX_DECISION_LEVELS: usize = 8;

/// Discrete stopping problem on a recombining tree.
///
/// Stopping at level `k` collects the running reward `f` on levels
/// `k, …, k + d − 1`, then `S` at level `k + d`, or `ξ` if that is the
/// horizon. Continuing collects `f` for one more step. Decisions are taken on
/// levels `0..=N − d`; at `N − d` stopping is forced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingProblem {
    pub horizon: usize,
    pub lag_steps: usize,
    /// `ξ`, one value per terminal node.
    pub terminal: Vec<f64>,
    /// `f[k][j]` for levels `0..N`.
    pub running: Vec<Vec<f64>>,
    /// Continuously compounded, applied per step of the tree's `Δt`.
    pub discount_rate: f64,
    /// `S[k][j]` for levels `0..N`.
    pub payoff: Vec<Vec<f64>>,
}

impl StoppingProblem {
    fn validate(&self, tree: &Lattice) -> Result<()> {
        let (n, d) = (self.horizon, self.lag_steps);
        if n == 0 || d >= n {
            return Err(Error::InvalidParameter(format!("need 0 ≤ d < N, got d = {d}, N = {n}")));
        }
        if n > MAX_HORIZON || d > MAX_LAG_STEPS || n - d > MAX_DECISION_LEVELS {
            return Err(Error::SizeGuard(format!(
                "N = {n}, d = {d} exceeds N ≤ {MAX_HORIZON}, d ≤ {MAX_LAG_STEPS}, N − d ≤ {MAX_DECISION_LEVELS}"
            )));
        }
        if tree.steps != n {
            return Err(Error::InvalidParameter(format!("tree has {} steps, problem {n}", tree.steps)));
        }
        let shaped = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().enumerate().all(|(k, r)| r.len() == k + 1);
        if self.terminal.len() != n + 1 || !shaped(&self.running) || !shaped(&self.payoff) {
            return Err(Error::InvalidParameter("arrays do not match the tree shape".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivalence {
    /// Best value over every stopping rule.
    pub enumerated: f64,
    /// Backward induction with the delivered-value obstacle.
    pub dp: f64,
    /// Number of distinct rules visited.
    pub rules: u64,
}

struct Setup<'a> {
    problem: &'a StoppingProblem,
    prob: f64,
    disc: f64,
    decision_levels: usize,
}

impl Setup<'_> {
    /// Expected discounted value of stopping at `(k, j)`, by walking all `2^d`
    /// continuation paths forward.
    fn delivered_forward(&self, k: usize, j: usize) -> f64 {
        let pb = self.problem;
        let d = pb.lag_steps;
        let mut total = 0.0;
        for path in 0..(1u32 << d) {
            let (mut weight, mut node, mut value, mut df) = (1.0, j, 0.0, 1.0);
            for s in 0..d {
                value += df * pb.running[k + s][node];
                df *= self.disc;
                if path >> s & 1 == 1 {
                    weight *= self.prob;
                    node += 1;
                } else {
                    weight *= 1.0 - self.prob;
                }
            }
            let end = if k + d < pb.horizon { pb.payoff[k + d][node] } else { pb.terminal[node] };
            total += weight * (value + df * end);
        }
        total
    }

    fn search(&self, level: usize, alive: u32, mass: &[f64], acc: f64, delivered: &[Vec<f64>], best: &mut f64, rules: &mut u64) {
        let df = self.disc.powi(level as i32);
        if level == self.decision_levels {
            let mut v = acc;
            for j in 0..=level {
                if alive >> j & 1 == 1 {
                    v += mass[j] * df * delivered[level][j];
                }
            }
            *best = best.max(v);
            *rules += 1;
            return;
        }
        // Iterate over every subset of the alive nodes as the stop set.
        let mut stop = alive;
        loop {
            let cont = alive & !stop;
            let mut v = acc;
            let mut next = vec![0.0; level + 2];
            for j in 0..=level {
                if stop >> j & 1 == 1 {
                    v += mass[j] * df * delivered[level][j];
                } else if cont >> j & 1 == 1 {
                    v += mass[j] * df * self.problem.running[level][j];
                    next[j] += mass[j] * (1.0 - self.prob);
                    next[j + 1] += mass[j] * self.prob;
                }
            }
            let next_alive = cont | (cont << 1);
            self.search(level + 1, next_alive, &next, v, delivered, best, rules);
            if stop == 0 {
                break;
            }
            stop = (stop - 1) & alive;
        }
    }

    /// `Ŷ(k, ·)` by `d` backward expectations from level `k + d`.
    fn delivered_backward(&self, k: usize) -> Vec<f64> {
        let pb = self.problem;
        let top = k + pb.lag_steps;
        let mut w: Vec<f64> = if top < pb.horizon { pb.payoff[top].clone() } else { pb.terminal.clone() };
        for s in (k..top).rev() {
            w = (0..=s)
                .map(|j| pb.running[s][j] + self.disc * (self.prob * w[j + 1] + (1.0 - self.prob) * w[j]))
                .collect();
        }
        w
    }

    fn dp(&self) -> f64 {
        let m = self.decision_levels;
        let mut y = self.delivered_backward(m);
        for k in (0..m).rev() {
            let obstacle = self.delivered_backward(k);
            y = (0..=k)
                .map(|j| {
                    let cont = self.problem.running[k][j] + self.disc * (self.prob * y[j + 1] + (1.0 - self.prob) * y[j]);
                    obstacle[j].max(cont)
                })
                .collect();
        }
        y[0]
    }
}

/// Optimum over all stopping rules versus the reduced backward induction.
pub fn enumerate_delay_equivalence(problem: &StoppingProblem, tree: &Lattice) -> Result<Equivalence> {
    problem.validate(tree)?;
    let setup = Setup {
        problem,
        prob: tree.prob,
        disc: (-problem.discount_rate * tree.dt).exp(),
        decision_levels: problem.horizon - problem.lag_steps,
    };
    let delivered: Vec<Vec<f64>> = (0..=setup.decision_levels)
        .map(|k| (0..=k).map(|j| setup.delivered_forward(k, j)).collect())
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut rules = 0;
    setup.search(0, 1, &[1.0], 0.0, &delivered, &mut best, &mut rules);
    Ok(Equivalence {
        enumerated: best,
        dp: setup.dp(),
        rules,
    })
}
