//! Command-line front end for the field engine.
//!
//! The library half of the binary: scene manifests, the portable grid file
//! format, image I/O, run records, the individual commands, and the
//! self-test harness. Everything here is exercised both by the `emfield`
//! binary and by the integration test suite.

pub mod commands;
pub mod error;
pub mod format;
pub mod images;
pub mod manifest;
pub mod record;
pub mod selftest;

pub use error::{CliError, Result};
