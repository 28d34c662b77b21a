//! PROPm allocations of indivisible goods under additive valuations.
//!
//! An allocation is PROPm when every agent's own value plus the value of
//! their maximin good (the best, over other agents' bundles, of the worst
//! item in that bundle) reaches a 1/n share of their total. [`solve`]
//! computes one in polynomial time; [`verifier`] checks any allocation from
//! raw valuations, and [`oracle`] provides exhaustive search for small cases.

pub mod divider;
pub mod engine;
mod error;
pub mod model;
pub mod oracle;
pub mod verifier;

pub use engine::{solve, SolveOptions, SolveStats, Solver};
pub use error::{Error, Result};
pub use model::{Allocation, Decomposition, Instance, Partition, SubProblem};
