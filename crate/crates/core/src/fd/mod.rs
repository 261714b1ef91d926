//! Finite-difference solvers for the obstacle problems in `(τ, x)`.

mod boundary;
mod engine;
mod grid;
mod premium;
pub mod psor;
mod stationary;
mod studies;

pub use boundary::{extract_boundary, extract_boundary_refined, Boundary, CalendarBoundary};
pub use engine::{solve_u, solve_v_lagged, solve_v_standard, Surface};
pub use grid::{default_grid, reference_span, Grid, LineGrid, PsorOptions, MIN_NODES, MIN_STEPS};
pub use premium::early_exercise_premium;
pub use stationary::{solve_u_stationary, StationarySolution};
pub use studies::{
    perpetual_value_tolerance, study_lag_monotonicity, study_large_maturity, study_small_lag, Check, Row, StudyGrid, StudyReport,
    SMALL_LAG_FINAL_TOL, SMALL_LAG_GATED_PROBE, SMALL_LAG_PROBES,
};
