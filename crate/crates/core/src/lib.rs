//! Structured matrix-sequences on bounded and unbounded domains: symbols,
//! multilevel block Toeplitz assembly, restrictions to `Omega_t`, spectral
//! distribution checks and approximating classes of sequences.

// negated comparisons reject NaN parameters
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acs;
pub mod discretization;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod matrix;
pub mod multiindex;
pub mod spectral;
pub mod symbol;
pub mod toeplitz;

pub use error::{Error, Result};
pub use geometry::{Exhaustion, GridConstruction, GridRestriction};
pub use matrix::HermitianMatrix;
pub use multiindex::MultiIndex;
pub use symbol::{catalog_get, MatrixSymbol};
pub use toeplitz::{assemble_restricted, assemble_toeplitz, fourier_coefficients, FourierTable};
