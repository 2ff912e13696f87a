//! Unitary-similarity testing for complex square matrices.
//!
//! The library decides whether two matrices are unitarily similar by
//! comparing the Frobenius norms of polynomial images of their principal
//! submatrices, encoded finitely as Gram families of matrix powers. On top
//! of that sit canonical triangular forms, general-position classification,
//! two constructive reconstruction algorithms that invert the invariant
//! map, and a decision pipeline that picks the strongest applicable
//! criterion for a given pair.

#![forbid(unsafe_code)]

pub mod corpus;
pub mod criteria;
pub mod decide;
pub mod error;
pub mod matrix;
pub mod invariants;
pub mod poly;
pub mod reconstruct;
mod sampling;
pub mod genpos;
pub mod schur;

pub use error::{Error, Result};
pub use matrix::{lex_leq, Matrix, Tolerances};
pub use poly::Polynomial;
pub use schur::{SchurForm, UnitaryMatrix};
