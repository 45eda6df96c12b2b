//! Gallery and self-test machinery behind the `riesz` binary.
//!
//! Lives in a library so the acceptance suite can drive the same checks the
//! `selftest` subcommand runs.

#![allow(clippy::result_large_err)]

pub mod gallery;
pub mod selftest;
