//! Exact and Monte Carlo analysis of finite reversible Markov chains.
//!
//! The crate computes the standard hierarchy of chain parameters for the
//! rate-1 continuous-time version of a finite reversible chain: spectral gap
//! and relaxation time, the fundamental matrix and every expected hitting
//! time, total-variation/L2/L-infinity/average-L2/separation mixing times,
//! quasi-stationary tails of killed chains, induced (watched) chains, and
//! cover times by simulation. On top of those quantities it evaluates a
//! collection of inequalities relating them (cover-time lower bounds from the
//! spectral gap, near-point set bounds, hitting-time tail estimates) and
//! reports each as a [`check::Check`] row with its slack.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command
//! line front end and parallel trial scheduling live in the `covergap` crate.
//!
//! ```
//! use covergap_core::chain::{ChainSpec, Family};
//! use covergap_core::spectral::SpectralData;
//! use covergap_core::hitting::HittingData;
//!
//! let spec = ChainSpec::from_family(&Family::Cycle { n: 4 }).unwrap();
//! let sd = SpectralData::decompose(&spec).unwrap();
//! let hd = HittingData::compute(&spec).unwrap();
//! assert!((sd.eigentime_alpha() - 2.5).abs() < 1e-12);
//! assert!((hd.alpha - 2.5).abs() < 1e-12);
//! assert!((hd.h - 4.0).abs() < 1e-12);
//! ```
#![no_std]
#![deny(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod chain;
pub mod check;
pub mod cover;
pub mod error;
pub mod hitting;
pub mod linalg;
pub mod math;
pub mod mixing;
pub mod spectral;
pub mod tails;
pub mod verify;

pub use chain::{ChainSpec, Diagnostics, Family};
pub use check::{Check, Verdict};
pub use error::{Error, Result};
pub use hitting::HittingData;
pub use spectral::SpectralData;

/// Absolute tolerance used when constructing chains (row sums, symmetry).
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Absolute tolerance used when validating chains supplied from outside.
pub const VALIDATION_TOL: f64 = 1e-10;
