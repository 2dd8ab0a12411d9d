//! Bivariate polynomials on the bidisk.

pub mod classify;
pub mod cli;
pub mod dvrep;
pub mod error;
pub mod extend;
pub mod grid;
pub mod linalg;
pub mod poly2;
pub mod report;
pub mod soscert;

pub use error::{DvError, Result};
pub use poly2::{BivariatePolynomial, SymmetryKind, SymmetryResult, VectorPolynomial};
