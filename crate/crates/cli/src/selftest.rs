//! Oracle-equivalence checks at reduced sizes.

use lagput::european::{find_x_bar, norm_cdf, norm_pdf, put_price, theta, DEFAULT_ROOT_TOL};
use lagput::fd::{default_grid, solve_u, solve_v_lagged, PsorOptions};
use lagput::oracle::{enumerate_delay_equivalence, lattice_price_lagged, quad_european_put, Lattice, StoppingProblem};
use lagput::perpetual::{find_x_under, u_infinity};
use lagput::{LagContract, MarketParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::num;

struct Outcome {
    name: &'static str,
    worst: f64,
    limit: f64,
}

/// Test hook: `theta` with its sign flipped.
fn theta_hook(corrupt: bool) -> impl Fn(f64, f64, &MarketParams) -> f64 {
    move |x, lag, p| {
        let t = theta(x, lag, p).expect("positive lag");
        if corrupt {
            -t
        } else {
            t
        }
    }
}

fn enumeration() -> f64 {
    let p = MarketParams::new(100.0, 0.05, 0.02, 0.2).expect("valid");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let d = case % 3;
        let n = rng.gen_range((d + 1).max(2)..=d + 5);
        let tree = Lattice::new(&p, 0.5, n).expect("valid tree");
        let mut draw = |len: usize| (0..len).map(|_| rng.gen_range(0.0..10.0)).collect::<Vec<f64>>();
        let problem = StoppingProblem {
            horizon: n,
            lag_steps: d,
            terminal: draw(n + 1),
            running: (0..n).map(|l| draw(l + 1)).collect(),
            discount_rate: 0.05,
            payoff: (0..n).map(|l| draw(l + 1)).collect(),
        };
        match enumerate_delay_equivalence(&problem, &tree) {
            Ok(e) => worst = worst.max((e.enumerated - e.dp).abs()),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

pub fn run(corrupt_theta: bool) -> bool {
    let p = MarketParams::new(100.0, 0.05, 0.02, 0.2).expect("valid");
    let c = LagContract::new(1.0, 0.25).expect("valid");
    let k = p.strike();
    let th = theta_hook(corrupt_theta);
    let mut results = Vec::new();

    results.push(Outcome {
        name: "enumeration_equals_reduced_induction",
        worst: enumeration(),
        limit: 1e-12,
    });

    let mut quad: f64 = 0.0;
    for x in [-0.5, -0.2, 0.0, 0.2, 0.5] {
        for life in [0.05, 0.25, 1.0, 3.0] {
            let q = quad_european_put(&p, life, k * f64::exp(x)).unwrap_or(f64::INFINITY);
            quad = quad.max((q - put_price(x, life, &p)).abs());
        }
    }
    results.push(Outcome {
        name: "quadrature_equals_closed_form",
        worst: quad,
        limit: 1e-8,
    });

    let mut tails: f64 = f64::NEG_INFINITY;
    for i in 1..=1000 {
        let d = 10.0 * i as f64 / 1000.0;
        let (n, dens) = (norm_cdf(-d), norm_pdf(-d));
        tails = tails.max(dens / (d + 1.0 / d) - n).max(n - dens / d);
    }
    results.push(Outcome {
        name: "gaussian_tail_bounds",
        worst: tails,
        limit: 0.0,
    });

    let h = 1e-4;
    let mut fd: f64 = 0.0;
    for (x, lag) in [(-0.3, 0.25), (0.0, 0.1), (0.2, 0.5), (-0.8, 1.0), (0.05, 0.04)] {
        let diff = (put_price(x, lag + h, &p) - put_price(x, lag - h, &p)) / (2.0 * h);
        fd = fd.max((th(x, lag, &p) - diff).abs());
    }
    results.push(Outcome {
        name: "theta_equals_time_derivative",
        worst: fd,
        limit: 1e-6 * k,
    });

    let xb = find_x_bar(0.25, &p, DEFAULT_ROOT_TOL).map(|t| t.x_bar).unwrap_or(f64::NAN);
    let wrong_sign = (1..=20)
        .map(|j| 0.1 * j as f64)
        .map(|off| th(xb - off, 0.25, &p).max(0.0) + (-th(xb + off, 0.25, &p)).max(0.0))
        .fold(0.0, f64::max);
    results.push(Outcome {
        name: "theta_sign_around_x_bar",
        worst: if xb.is_nan() { f64::INFINITY } else { wrong_sign },
        limit: 0.0,
    });

    let perp = find_x_under(0.25, &p, DEFAULT_ROOT_TOL).expect("default parameters");
    let f = |x: f64| u_infinity(x, &perp, &p);
    let (s2, mu, r) = (p.volatility().powi(2), p.log_drift(), p.rate());
    let hs = 0.01;
    let stationary = (0..50)
        .map(|j| {
            let x = perp.x_under + 0.1 + 3.0 * j as f64 / 49.0;
            let d1 = (-f(x + 2.0 * hs) + 8.0 * f(x + hs) - 8.0 * f(x - hs) + f(x - 2.0 * hs)) / (12.0 * hs);
            let d2 = (-f(x + 2.0 * hs) + 16.0 * f(x + hs) - 30.0 * f(x) + 16.0 * f(x - hs) - f(x - 2.0 * hs))
                / (12.0 * hs * hs);
            (-(0.5 * s2 * d2 + mu * d1 - r * f(x)) - th(x, 0.25, &p)).abs()
        })
        .fold(0.0, f64::max);
    results.push(Outcome {
        name: "perpetual_value_solves_stationary_equation",
        worst: stationary,
        limit: 1e-4,
    });

    let opts = PsorOptions::default();
    let solved = default_grid(&p, 1.0, 0.25, 150, 150).and_then(|g| {
        let u = solve_u(&p, &c, &g, &opts)?;
        let v = solve_v_lagged(&p, &c, &g, &opts)?;
        Ok((g, u, v))
    });
    match solved {
        Ok((g, u, v)) => {
            let stepwise = u.step_residuals.iter().chain(&v.step_residuals).fold(0.0, |a: f64, b| a.max(*b));
            results.push(Outcome {
                name: "psor_complementarity_residual",
                worst: stepwise.max(u.recheck_complementarity(&p)).max(v.recheck_complementarity(&p)),
                limit: opts.tol,
            });
            let mut gap: f64 = 0.0;
            for (vk, uk) in v.values.iter().zip(&u.values) {
                for i in 0..g.width() {
                    gap = gap.max((vk[i] - put_price(g.x(i), 0.25, &p) - uk[i]).abs());
                }
            }
            let hh = g.h();
            results.push(Outcome {
                name: "decomposition_into_put_plus_u",
                worst: gap,
                limit: 3.0 * (hh * hh + g.dtau()) * k,
            });
            let fd_value = v.interpolate(g.nt, 0.0).unwrap_or(f64::NAN);
            let tree = lattice_price_lagged(&p, &c, 500, k).unwrap_or(f64::NAN);
            results.push(Outcome {
                name: "finite_differences_match_lattice",
                worst: (fd_value - tree).abs(),
                limit: 5e-3 * k,
            });
        }
        Err(e) => {
            eprintln!("solver failed: {e}");
            results.push(Outcome {
                name: "psor_complementarity_residual",
                worst: f64::INFINITY,
                limit: opts.tol,
            });
        }
    }

    let mut ok = true;
    for o in &results {
        let pass = o.worst <= o.limit;
        ok &= pass;
        println!("{} {}: worst {} limit {}", if pass { "PASS" } else { "FAIL" }, o.name, num(o.worst), num(o.limit));
    }
    println!("selftest: {}", if ok { "passed" } else { "failed" });
    ok
}
