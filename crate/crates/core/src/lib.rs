//! Pricing and free-boundary analysis for American puts whose payoff is
//! delivered a fixed lag after the exercise decision.
//!
//! The lagged problem is solved as a standard obstacle problem whose obstacle
//! is the European put with remaining life equal to the lag; equivalently as
//! that European put plus an American-style claim paying the put's Theta as a
//! running reward. Modules:
//!
//! - [`model`]: market/contract parameters and coordinates.
//! - [`european`]: closed-form put, Theta and its zero crossing `X̄`.
//! - [`perpetual`]: the stationary problem, its boundary `X̲` and value `u∞`.
//! - [`fd`]: finite-difference obstacle solvers, boundary extraction and the
//!   numerical studies.
//! - [`oracle`]: binomial lattices, exhaustive stopping-rule enumeration and a
//!   quadrature pricer used to cross-check everything else.

pub mod error;
pub mod european;
pub mod fd;
pub mod model;
pub mod oracle;
pub mod perpetual;
pub mod roots;

pub use error::{Error, Result};
pub use model::{from_log, to_log, LagContract, LogCoords, MarketParams};
