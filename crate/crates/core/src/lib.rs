//! Capacity bounds for continuous-variable teleportation channels driven by
//! multiplexed EPR resources.
//!
//! Conventions: quadratures are ordered `(q_1, p_1, q_2, p_2, ...)` and the
//! vacuum has variance `1/2`. Capacities are in q-nats unless noted.

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod gaussian;
pub mod multiplex;
pub mod optimizer;
pub mod verify;

pub use capacity::{Bound, CapacityReport};
pub use error::{Error, Result};
pub use gaussian::{CovMatrix, GaussianState};
pub use multiplex::{EnergyBudget, Family, SqueezingDistribution};
pub use optimizer::OptResult;
