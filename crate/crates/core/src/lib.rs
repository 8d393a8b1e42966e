//! Weighted Escobar quotients on smooth metric measure spaces with boundary.
//!
//! The crate discretizes flat-based spaces `(M, g, e^{-φ}dV, e^{-φ}dσ, m)`,
//! evaluates the weighted Escobar quotient and the W-functional, computes
//! the sharp half-space constant Λ_{m,n} together with its extremal bubbles,
//! and minimizes the quotient in the negative regime. See `examples/` for
//! one runnable program per capability.

pub mod cli;
pub mod error;
pub mod exponents;
pub mod functionals;
pub mod geometry;
pub mod linalg;
pub mod minimizer;
pub mod quad;
pub mod sharp_constants;
pub mod special;

pub use error::{Error, Result};
pub use exponents::Exponents;
