//! Command-line front end for the `qbm-core` crate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;

pub use config::Config;
pub use error::CliError;
