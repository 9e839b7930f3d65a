//! Top-(q,k) norms and generalized k-support norms with ℓp source:
//! evaluation, exposed faces and normal cones, exact polytope combinatorics
//! for the p = ∞ case, and a conditional-gradient solver for
//! k-support-penalized problems with support identification.

pub mod cli;
pub mod error;
pub mod faces;
pub mod linalg;
pub mod norms;
pub mod oracles;
pub mod polytopes;
pub mod solver;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
