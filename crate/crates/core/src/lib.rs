//! Repeated quantum interactions with a thermal chain and their
//! continuous-time limit.
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats and the
//! command-line front end live in the companion `qlangevin` crate.
//!
//! * [`numkit`]: dense complex kernels (`expm`, Kronecker, partial trace, spectra).
//! * [`model`]: system, bath and the interaction Hamiltonian.
//! * [`gns`]: GNS basis of the bath state and the coefficients of `π(U)`.
//! * [`chain`]: exact simulation on the truncated atom chain.
//! * [`dynamics`]: reduced channels, Lindblad generators, thermalization.
//! * [`noise`]: thermal quantum Itô tables and unitarity conditions.
#![no_std]
// NaN must fail the range checks, hence `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod chain;
pub mod dynamics;
pub mod gns;
pub mod model;
pub mod noise;
pub mod numkit;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use numkit::{CMatrix, CVector, C64};
