//! Finite Toda lattice on tridiagonal Lax matrices.
//!
//! - [`lax`]: Lax matrices, characteristic polynomials, spectra, cofactor vectors.
//! - [`tnn`]: total nonnegativity / positivity and interlacing tests.
//! - [`jacobi`]: tau functions, the linearization map and its inverse, sign components.
//! - [`flow`]: tau, factorization and RK4 solvers, trajectories, blowup detection.
//! - [`verify`]: seeded randomized checks that the TNN part maps onto the positive cone.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dense;
pub mod error;
mod ext;
pub mod flow;
pub mod jacobi;
pub mod lax;
pub mod poly;
pub mod sampling;
pub mod tnn;
pub mod verify;

pub use error::{Error, Result};
pub use flow::{Method, Trajectory};
pub use jacobi::{JacobiPoint, SignComponent, TauSequence};
pub use lax::{LaxMatrix, PolynomialVector, Spectrum, Tridiagonal};
pub use nalgebra;
pub use poly::Poly;
pub use tnn::{InterlacingData, TnnReport};
pub use verify::{Direction, VerificationReport, VerifyConfig};
