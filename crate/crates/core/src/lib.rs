//! Toeplitz operators on the Bergman space of the unit disc: symbols, geometric
//! conditions, Berezin transforms, finite sections and invertibility decisions.
//!
//! Conventions used throughout: area measure `dA = π⁻¹ r dr dθ` on the unit disc,
//! orthonormal basis `e_n = √(n+1) z^n`, normalized kernel
//! `k_z(w) = (1 − |z|²)/(1 − w z̄)²`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berezin;
pub mod cli;
pub mod douglas;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod point;
pub mod quadrature;
pub mod repro;
pub mod schema;
pub mod symbols;
pub mod toeplitz;

pub use error::{Error, Result};
pub use symbols::{Complex, HarmonicPolynomial, RadialSymbol, SampledSymbol, Symbol};
