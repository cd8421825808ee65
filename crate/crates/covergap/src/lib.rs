//! File formats, parallel Monte Carlo drivers and the `covergap` command
//! line on top of [`covergap_core`].

#![deny(unsafe_code)]

pub mod canonical;
pub mod cli;
pub mod engine;
pub mod spec_file;

/// Malformed user input: files, flags, environment.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);
