//! Spectral analysis of periodic quantum graphs.
//!
//! The crate is organised around a handful of independent pieces:
//!
//! - [`coupling`] and [`graph`]: metric graphs with self-adjoint vertex
//!   couplings `(U - I)ψ + i(U + I)ψ' = 0`.
//! - [`secular`]: a generic Floquet solver that assembles the secular matrix
//!   of a period cell and locates spectrum by rank deficiency.
//! - [`chain`], [`jacobi`], [`amo`]: the magnetic ring chain, its dual
//!   Jacobi operator and the critical almost Mathieu operator.
//! - [`diophantine`] and [`lattice`]: continued fractions, Markov constants
//!   and the gap structure of rectangular δ-lattices.
//! - [`trv`]: the cyclic-shift coupling that breaks time-reversal symmetry,
//!   its star-graph S-matrix and the square/honeycomb lattice spectra.
//!
//! Data-parallel loops go through [`par`], which falls back to sequential
//! iteration when the `parallel` feature is disabled.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amo;
pub mod chain;
pub mod coupling;
pub mod diophantine;
mod error;
pub mod graph;
pub mod graph_file;
pub mod jacobi;
pub mod lattice;
pub mod numeric;
pub mod output;
pub mod par;
pub mod secular;
pub mod spectral_set;
pub mod trv;

pub use error::{Error, Result};
pub use spectral_set::{Band, FlatBand, Interval, SpectralSet};

pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
