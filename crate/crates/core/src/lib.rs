//! Posterior probabilities of Bayesian network structure features.
//!
//! Two routes are provided for the ordered (order-marginalized) modular model:
//!
//! * [`oracle`] sums over graphs and permutations exactly on a classical
//!   machine, and
//! * [`estimate`] builds the amplitude-encoding state-preparation circuit
//!   ([`qprep`]), simulates it on a dense statevector ([`qsim`]) and reads the
//!   permutation sum back out of two basis amplitudes.
//!
//! The two are expected to agree to floating point accuracy, which is what the
//! acceptance suite checks.

pub mod error;
pub mod estimate;
pub mod graphs;
pub mod json;
pub mod math;
pub mod oracle;
pub mod qprep;
pub mod qsim;
pub mod scoring;

pub use error::{Error, Result};
