//! Solvers for linear tensor equations whose terms are index permutations of
//! a single unknown tensor, e.g. `a₁N_{αμν} + a₂N_{ναμ} + … = B_{αμν}`.
//!
//! The coefficient matrix of such an equation is the left regular
//! representation of the permutation group, so the unique solution (when it
//! exists) is a linear combination of permutations of the source tensor with
//! weights taken from the first row of the inverse matrix.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod coeff;
pub mod error;
pub mod linalg;
pub mod perm;
pub mod scalar;
pub mod solver;
pub mod tensor;

pub use coeff::{CoeffVector, DegeneracyReport, TraceCoeffs};
pub use error::{Error, Result};
pub use perm::{canonical_order, Perm};
pub use scalar::{Rational, Scalar};
pub use solver::{brute_force, solve_rank3, solve_rankn, solve_reduced, solve_with_traces, Solution};
pub use tensor::{permute_tensor, DenseTensor, Metric, Sign, SlotPair, Symmetry};
