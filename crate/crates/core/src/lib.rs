//! Numerics for the two-charge circular ensemble.
//!
//! Charge-one and charge-two particles live on the unit circle, repel
//! logarithmically, and share a fixed total charge `N` while the split
//! between the species is governed by a fugacity `X`. The crate provides
//!
//! * exact partition functions and the law of the charge-one count
//!   ([`ensemble`]),
//! * the finite-`N` matrix kernels, their rescaled gauge, the bulk scaling
//!   limits and the COE/CSE endpoints ([`kernels`]),
//! * a Pfaffian engine and `(l, m)`-point intensities ([`pfaffian`]),
//! * brute-force ground truth for small systems ([`oracle`]),
//! * a split/merge Metropolis–Hastings sampler ([`sampler`]),
//! * the numbered acceptance checks shared by the test suite and the CLI
//!   ([`verify`]).

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod ensemble;
mod error;
pub mod kernels;
pub mod oracle;
pub mod pfaffian;
pub mod quadrature;
pub mod sampler;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
