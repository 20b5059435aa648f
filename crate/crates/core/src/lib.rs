//! Spin-1/2 and spin-1 polarization dynamics in driven fields, and the
//! differential geometry of the resulting hodographs.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod quadrature;
pub mod qubit;
pub mod qutrit;

pub use error::{Error, Result};
