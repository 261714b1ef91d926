//! Slow, independent pricers used to check the fast ones.

mod enumeration;
mod lattice;
mod quadrature;

pub use enumeration::{enumerate_delay_equivalence, Equivalence, StoppingProblem};
pub use lattice::{lattice_price_lagged, lattice_price_standard, Lattice};
pub use quadrature::quad_european_put;
