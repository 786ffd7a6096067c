//! Dyadic Gaussian Brownian paths and extremal-eigenvalue perturbation checks.
//!
//! The crate has two halves that share seeded randomness and report plumbing:
//!
//! * [`gaussian`] and [`brownian`] build the level-`N` piecewise-linear random
//!   walks driven by a centered Gaussian measure on a finite-dimensional normed
//!   space, measure their refinement deviation exactly, and compare it against
//!   the Markov tail certificate `b·2^{N(1−r/2)}·(2/δ)^r·E q(G)^r`.
//! * [`spectral`] and [`perturbation`] compute signed spectra of symmetric
//!   operators by constrained extremal (Rayleigh) deflation, cross-check them
//!   against an independent Jacobi eigensolver, and evaluate the Weyl-type
//!   comparison inequalities, the inclusion statements and the Hausdorff bound
//!   for `A = A1 + A2`.
//!
//! [`harness`] wires everything into the `gaussweyl` command line tool.

// `!(x > 0.0)` is how NaN inputs get rejected alongside out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brownian;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod perturbation;
pub mod report;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
