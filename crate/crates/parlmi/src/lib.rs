//! Reduced-order successive-constraint solver for parameter-dependent
//! linear matrix inequalities.
//!
//! The library splits the work into an expensive offline stage (greedy
//! sampling with full-order eigenvalue solves) and an online stage whose cost
//! is independent of the matrix dimension: feasibility and SDP queries reduce
//! to small linear programs over a trained cut model, with computable lower
//! and upper bounds on the optimal value.

pub mod error;
pub mod example_rd;
pub mod inner;
pub mod lp;
pub mod outer;
pub mod problem;
pub mod sparse;
pub mod spectral;
pub mod trainer;

pub use error::{Error, Result};
