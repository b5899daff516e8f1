//! Central-spin model: N identical spins exchanging with one distinguishable
//! central spin.
//!
//! The crate covers exact spectra and protected zero modes ([`spectra`]), the
//! mean-field winding picture and closed-form bound states ([`topology`]),
//! the driven Bell-cat generation protocol with optional σz dephasing
//! ([`dynamics`]), phase-space and entanglement diagnostics
//! ([`observables`]) and the single-bosonic-mode variant ([`bosonic`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bosonic;
pub mod dynamics;
mod error;
pub mod hilbert;
pub mod observables;
pub mod spectra;
pub mod topology;

pub use error::{Error, Result};
