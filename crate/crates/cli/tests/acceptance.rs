//! Acceptance criteria, one test each. Every test prints exactly one line,
//!
//!     PASS|FAIL <n> <name>: <measurement> <op> <limit>; ...
//!
//! and fails if any of its measurements misses. Run with
//! `cargo test -p lagput-cli --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use lagput::european::{find_x_bar, norm_cdf, norm_pdf, put_price, theta, theta_scaled, DEFAULT_ROOT_TOL};
use lagput::fd::{
    default_grid, early_exercise_premium, extract_boundary, extract_boundary_refined, perpetual_value_tolerance,
    reference_span, solve_u, solve_u_stationary, solve_v_lagged, solve_v_standard, study_lag_monotonicity,
    study_large_maturity, study_small_lag, LineGrid, PsorOptions, StudyGrid,
};
use lagput::oracle::{enumerate_delay_equivalence, lattice_price_lagged, quad_european_put, Lattice, StoppingProblem};
use lagput::perpetual::{find_x_under, l_function, u_infinity};
use lagput::roots::sign_changes;
use lagput::{LagContract, MarketParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAG: f64 = 0.25;
const MATURITY: f64 = 1.0;
const NX: usize = 600;
const NT: usize = 600;

fn market() -> MarketParams {
    MarketParams::new(100.0, 0.05, 0.02, 0.2).unwrap()
}

fn contract() -> LagContract {
    LagContract::new(MATURITY, LAG).unwrap()
}

struct Part {
    ok: bool,
    text: String,
}

fn at_most(what: &str, measured: f64, limit: f64) -> Part {
    Part {
        ok: measured <= limit,
        text: format!("{what} {measured:.4e} <= {limit:.4e}"),
    }
}

fn at_least(what: &str, measured: f64, limit: f64) -> Part {
    Part {
        ok: measured >= limit,
        text: format!("{what} {measured:.4e} >= {limit:.4e}"),
    }
}

fn holds(what: &str, ok: bool, detail: String) -> Part {
    Part {
        ok,
        text: format!("{what} {detail}"),
    }
}

fn verdict(id: u8, name: &str, parts: Vec<Part>) {
    let ok = parts.iter().all(|p| p.ok);
    let body: Vec<&str> = parts.iter().map(|p| p.text.as_str()).collect();
    let line = format!("{} {id:>2} {name}: {}", if ok { "PASS" } else { "FAIL" }, body.join("; "));
    println!("{line}");
    assert!(ok, "{line}");
}

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

#[test]
fn criterion_01_closed_form_consistency() {
    let p = market();
    let k = p.strike();
    let mut quad: f64 = 0.0;
    for x in [-0.6f64, -0.25, 0.0, 0.25, 0.6] {
        for life in [0.02, 0.25, 1.0, 4.0] {
            let q = quad_european_put(&p, life, k * x.exp()).unwrap();
            quad = quad.max((q - put_price(x, life, &p)).abs());
        }
    }

    let pts = [(-0.3, 0.25), (0.0, 0.1), (0.2, 0.5), (-0.8, 1.0), (0.05, 0.04)];
    let err = |h: f64| {
        max_abs(pts.iter().map(|&(x, lag)| {
            let fd = (put_price(x, lag + h, &p) - put_price(x, lag - h, &p)) / (2.0 * h);
            theta(x, lag, &p).unwrap() - fd
        }))
    };
    let (e1, e2, e3) = (err(8e-3), err(4e-3), err(2e-3));
    verdict(
        1,
        "closed_form_consistency",
        vec![
            at_most("put vs quadrature (20 points)", quad, 1e-8),
            at_least("theta fd error ratio h=8e-3/4e-3", e1 / e2, 3.5),
            at_least("ratio h=4e-3/2e-3", e2 / e3, 3.5),
        ],
    );
}

#[test]
fn criterion_02_gaussian_tail_bounds() {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=1000 {
        let d = 10.0 * i as f64 / 1000.0;
        let (tail, dens) = (norm_cdf(-d), norm_pdf(d));
        worst = worst.max(dens / (d + 1.0 / d) - tail).max(tail - dens / d);
    }
    verdict(2, "gaussian_tail_bounds", vec![at_most("worst violation over 1000 points", worst, 0.0)]);
}

#[test]
fn criterion_03_theta_structure() {
    let p = market();
    let (k, r, q) = (p.strike(), p.rate(), p.dividend());
    let th: Vec<f64> = (0..=12_000).map(|i| theta(-60.0 + 0.01 * i as f64, LAG, &p).unwrap()).collect();
    let changes = sign_changes(&th).len();

    let xb = find_x_bar(LAG, &p, DEFAULT_ROOT_TOL).unwrap().x_bar;
    let (left, right) = (theta(xb - 0.1, LAG, &p).unwrap(), theta(xb + 0.1, LAG, &p).unwrap());

    let g: Vec<f64> = (0..1000).map(|i| theta_scaled(xb - 2.0 + 4.0 * i as f64 / 999.0, LAG, &p)).collect();
    let increasing = g.iter().all(|v| v.is_finite()) && g.windows(2).all(|w| w[1] > w[0]);

    let deep = (theta(-30.0, LAG, &p).unwrap() + r * k * (-r * LAG).exp()).abs();

    let x = -0.3f64;
    let target = q * k * x.exp() - r * k;
    let gaps: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|&d| (theta(x, d, &p).unwrap() - target).abs()).collect();
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);

    verdict(
        3,
        "theta_structure",
        vec![
            holds("sign changes on [-60,60]", changes == 1, format!("{changes} == 1")),
            holds("theta(X̄-0.1) < 0 < theta(X̄+0.1)", left < 0.0 && right > 0.0, format!("{left:.3e}, {right:.3e}")),
            holds("g strictly increasing (1000 points)", increasing, String::new()),
            at_most("|theta(-30) + rKe^{-rδ}|", deep, 1e-10 * k),
            holds("small-lag gaps decreasing", shrinking, format!("{gaps:?}")),
        ],
    );
}

#[test]
fn criterion_04_perpetual_solution() {
    let p = market();
    let perp = find_x_under(LAG, &p, DEFAULT_ROOT_TOL).unwrap();
    let xu = perp.x_under;
    let (lo, hi) = reference_span(&p, LAG).unwrap();
    let mut errs = Vec::new();
    for n in [100usize, 200, 400] {
        let g = LineGrid::new(lo - 2.0, hi + 6.0, n - 1).unwrap();
        let s = solve_u_stationary(&p, LAG, &g, &PsorOptions::stationary(g.nx)).unwrap();
        errs.push(max_abs((0..g.nx + 2).map(|i| s.values[i] - u_infinity(g.x(i), &perp, &p))));
    }
    let l_at = l_function(xu, LAG, &p).unwrap().abs();

    let slope = |h: f64| (u_infinity(xu + h, &perp, &p) - u_infinity(xu, &perp, &p)) / h;
    let slopes: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&h| slope(h).abs()).collect();
    let pasting = slopes.windows(2).all(|w| w[1] < 0.2 * w[0]);

    let target = -theta(xu, LAG, &p).unwrap() / (p.volatility() * p.volatility());
    let growth = max_abs([1e-2, 1e-3, 1e-4].iter().map(|&h| u_infinity(xu + h, &perp, &p) / (h * h) / target - 1.0));

    verdict(
        4,
        "perpetual_solution",
        vec![
            at_least("stationary error ratio 100->200", errs[0] / errs[1], 3.0),
            at_least("ratio 200->400", errs[1] / errs[2], 3.0),
            at_most("|l(X̲)|", l_at, 1e-12),
            holds("pasting slope shrinks per decade", pasting, format!("{slopes:?}")),
            at_most("quadratic growth relative gap", growth, 0.05),
        ],
    );
}

#[test]
fn criterion_05_delay_reduction() {
    let p = market();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut zero_lag_cases = 0;
    for case in 0..50 {
        let d = case % 3;
        let n = rng.gen_range((d + 1).max(2)..=(8 + d).min(10));
        let tree = Lattice::new(&p, 0.5, n).unwrap();
        let mut draw = |len: usize| (0..len).map(|_| rng.gen_range(0.0..10.0)).collect::<Vec<f64>>();
        let problem = StoppingProblem {
            horizon: n,
            lag_steps: d,
            terminal: draw(n + 1),
            running: (0..n).map(|l| draw(l + 1)).collect(),
            discount_rate: 0.05,
            payoff: (0..n).map(|l| draw(l + 1)).collect(),
        };
        let e = enumerate_delay_equivalence(&problem, &tree).unwrap();
        worst = worst.max((e.enumerated - e.dp).abs());
        zero_lag_cases += (d == 0) as usize;
    }
    verdict(
        5,
        "delay_reduction",
        vec![
            at_most("enumeration vs reduced induction (50 trees)", worst, 1e-12),
            holds("includes d = 0", zero_lag_cases > 0, format!("{zero_lag_cases} cases")),
        ],
    );
}

/// `(max |V^δ − P − u|, h, Δτ)` on an `n × n` default mesh.
fn decomposition_gap(n: usize) -> (f64, f64, f64) {
    let (p, c, o) = (market(), contract(), PsorOptions::default());
    let g = default_grid(&p, MATURITY, LAG, n, n).unwrap();
    let (v, u) = rayon::join(|| solve_v_lagged(&p, &c, &g, &o).unwrap(), || solve_u(&p, &c, &g, &o).unwrap());
    let mut gap: f64 = 0.0;
    for (vk, uk) in v.values.iter().zip(&u.values) {
        for i in 0..g.width() {
            gap = gap.max((vk[i] - put_price(g.x(i), LAG, &p) - uk[i]).abs());
        }
    }
    (gap, g.h(), g.dtau())
}

#[test]
fn criterion_06_decomposition() {
    let k = market().strike();
    let (coarse, _, _) = decomposition_gap(NX / 2);
    let (gap, h, dt) = decomposition_gap(NX);
    let (fine, _, _) = decomposition_gap(2 * NX);
    verdict(
        6,
        "decomposition",
        vec![
            at_most("max gap at 600x600", gap, 3.0 * (h * h + dt) * k),
            holds("shrinks 300 -> 600 -> 1200", fine < gap && gap < coarse, format!("{coarse:.3e}, {gap:.3e}, {fine:.3e}")),
        ],
    );
}

#[test]
fn criterion_07_sandwich_bound() {
    let r = study_lag_monotonicity(
        &market(),
        MATURITY,
        &[0.0, 0.05, 0.1, 0.2, 0.4],
        StudyGrid { nx: NX, nt: NT },
        &PsorOptions::default(),
    )
    .unwrap();
    let parts = r.checks.iter().map(|c| at_most(&c.name, c.worst, c.limit)).collect();
    verdict(7, "sandwich_bound", parts);
}

#[test]
fn criterion_08_boundary_properties() {
    let (p, c, o) = (market(), contract(), PsorOptions::default());
    let g = default_grid(&p, MATURITY, LAG, NX, NT).unwrap();
    let u = solve_u(&p, &c, &g, &o).unwrap();
    let b = extract_boundary(&u, 10.0 * o.tol).unwrap();
    let h = g.h();
    let xb = find_x_bar(LAG, &p, DEFAULT_ROOT_TOL).unwrap().x_bar;
    let xu = find_x_under(LAG, &p, DEFAULT_ROOT_TOL).unwrap().x_under;
    let outside = max_abs(b.xs.iter().map(|&x| (xu - 2.0 * h - x).max(x - xb - 2.0 * h).max(0.0)));
    verdict(
        8,
        "boundary_properties",
        vec![
            at_most("distance outside [X̲-2h, X̄+2h]", outside, 0.0),
            at_most("largest rise", b.max_rise().0, h),
            at_least("shortest 5-cell crossing time", b.min_crossing_time(h, 5).0, f64::MIN_POSITIVE),
            at_most("|x(first level) - X̄|", (b.xs[0] - xb).abs(), 2.0 * h),
        ],
    );
}

#[test]
fn criterion_09_large_maturity() {
    let p = market();
    let tau_max = 25.0;
    let g = default_grid(&p, tau_max + LAG, LAG, NX, NT).unwrap();
    let (tol, c) = perpetual_value_tolerance(&p, LAG, &g).unwrap();
    let (r, _, _) =
        study_large_maturity(&p, LAG, tau_max, StudyGrid { nx: NX, nt: NT }, &PsorOptions::default(), tol).unwrap();
    let mut parts: Vec<Part> = r.checks.iter().map(|ch| at_most(&ch.name, ch.worst, ch.limit)).collect();
    parts.push(holds("C", true, format!("{c:.3}")));
    verdict(9, "large_maturity", parts);
}

#[test]
fn criterion_10_small_lag() {
    let r = study_small_lag(
        &market(),
        MATURITY,
        &[0.2, 0.1, 0.05, 0.025],
        StudyGrid { nx: NX, nt: NT },
        &PsorOptions::default(),
    )
    .unwrap();
    let parts = ["gap_non_increasing(t=0.5T)", "final_gap(t=0.5T)"]
        .iter()
        .map(|name| {
            let c = r.check(name).unwrap();
            at_most(name, c.worst, c.limit)
        })
        .collect();
    verdict(10, "small_lag", parts);
}

#[test]
fn criterion_11_early_exercise_premium() {
    let (p, o) = (market(), PsorOptions::default());
    let k = p.strike();
    let g = default_grid(&p, MATURITY, 0.0, NX, NT).unwrap();
    let v = solve_v_standard(&p, MATURITY, &g, &o).unwrap();
    let b = extract_boundary_refined(&v, 10.0 * o.tol).unwrap();
    let cal = b.to_calendar(MATURITY, k, 0.0);
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.25, 0.5, 0.75] {
        for spot in [85.0, 92.0, 100.0, 108.0, 120.0] {
            let x = (spot / k).ln();
            let level = ((MATURITY - t) / g.dtau()).round() as usize;
            let e = early_exercise_premium(&p, MATURITY, t, spot, &cal).unwrap();
            worst = worst.max((v.interpolate(level, x).unwrap() - put_price(x, MATURITY - t, &p) - e).abs());
        }
    }
    verdict(11, "early_exercise_premium", vec![at_most("|V - P - e| over 20 points", worst, 1e-3 * k)]);
}

#[test]
fn criterion_12_pde_vs_lattice() {
    let (p, c, o) = (market(), contract(), PsorOptions::default());
    let k = p.strike();
    let g = default_grid(&p, MATURITY, LAG, NX, NT).unwrap();
    let (v, tree) = rayon::join(
        || solve_v_lagged(&p, &c, &g, &o).unwrap(),
        || lattice_price_lagged(&p, &c, 2000, k).unwrap(),
    );
    let fd = v.interpolate(g.nt, 0.0).unwrap();
    verdict(12, "pde_vs_lattice", vec![at_most("|PDE - lattice(2000)| at X = K", (fd - tree).abs(), 1e-3 * k)]);
}

#[test]
fn criterion_13_determinism() {
    let bin = env!("CARGO_BIN_EXE_lagput");
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/default.json");
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let status = Command::new(bin)
            .args(["price", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        out
    };
    let (a, b) = (run("a"), run("b"));
    let differing: Vec<&str> = ["surface.csv", "boundary.csv", "surface.json", "boundary.json", "summary.json"]
        .into_iter()
        .filter(|f| std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap())
        .collect();

    let start = Instant::now();
    let selftest = Command::new(bin).arg("selftest").output().unwrap().status.success();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        13,
        "determinism",
        vec![
            holds("repeated price runs byte-identical", differing.is_empty(), format!("differing {differing:?}")),
            holds("selftest exit 0", selftest, String::new()),
            at_most("selftest seconds", secs, 60.0),
        ],
    );
}
