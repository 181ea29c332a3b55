//! Space-time percolation laboratory for the contact process on Z^d.
//!
//! The crate samples the marked Poisson graphical representation on finite
//! windows, reads off truncated occupancy fields of the upper invariant
//! measure, and instruments the crossing event `0 <-> dLambda_n` with
//! decision trees, revealment, influences, pivotal points and a
//! renormalization layer. [`harness`] drives everything from the command
//! line with deterministic per-replica seeding.

pub mod error;
pub mod graphical;
pub mod harness;
pub mod lattice;
pub mod montecarlo;
pub mod osss;
pub mod percolation;
pub mod renorm;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{Direction, Vertex};
pub use montecarlo::MonteCarlo;
pub use stats::{DecayFit, Estimate};
