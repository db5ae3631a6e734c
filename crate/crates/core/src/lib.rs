//! ★-product calculus for time-ordered exponentials.
//!
//! Solutions of `dU/dt = A(t) U` are handled as resolvents in the algebra of
//! bivariate kernels `c(t) δ(t - s) + f(t, s) Θ(t - s)` under the product
//! `(f ★ g)(t, s) = ∫ f(t, τ) g(τ, s) dτ`. Splitting the generator into parts
//! with known evolutions turns matrix resolvent identities into frame changes:
//! the standard frame, the biframe and the triframe.
//!
//! Module map:
//! - [`grid`], [`star`]: the discretized algebra (composite trapezoid).
//! - [`frames`]: split generators, frame changes and truncated Dyson series.
//! - [`identities`]: the same resolvent identities on plain matrices.
//! - [`reference`]: RK4 reference propagator and the overlap error metric.
//! - [`rabi`]: the driven two-level system benchmark.

pub mod block;
pub mod error;
pub mod frames;
pub mod grid;
pub mod identities;
pub mod rabi;
pub mod reference;
pub mod star;

pub use block::{Mat, C64};
pub use error::{Error, Result};
pub use grid::{make_grid, TimeGrid};
pub use star::{
    evolution_from_green, exact_resolvent, from_generator, identity_element, neumann_partial_sum,
    star_apply, star_power, star_product, theta_element, EvolutionTable, Generator, StarColumn,
    StarElement,
};
