//! Model files, experiment reports and the `qlangevin` command line on top
//! of [`qlangevin_core`].

// a NaN metric must count as a failed check, hence `!(x <= tol)`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod error;
pub mod modelfile;
pub mod random;
pub mod report;

pub use error::CliError;
