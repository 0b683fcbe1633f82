//! Sparse sequential orthogonalization for symmetric positive-definite matrices
//! with dyadic block structure, and recovery of the permutation that hides it.

pub mod dyadic_index;
pub mod dyadic_matrix;
pub mod error;
pub mod factorization;
pub mod generators;
pub mod mtx;
pub mod packing;

pub use error::{Error, Result};
