//! Axiomatic fairness measures for resource allocations.
//!
//! The crate evaluates the power-generated family of fairness measures,
//! checks its defining axioms numerically, tests majorization and
//! Schur-concavity, relates the family to α-fair utilities, computes
//! starvation and box bounds, and solves the fairness/throughput tradeoff
//! over polyhedral feasible regions.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod alpha;
pub mod axioms;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod majorization;
pub mod measures;
pub mod report;
pub mod sampling;
pub mod suites;
pub mod tradeoff;

pub use allocation::Allocation;
pub use error::{Error, Result};
