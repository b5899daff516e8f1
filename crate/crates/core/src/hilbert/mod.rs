//! Fock basis |n, m⟩ of N identical spins coupled to a central spin, the
//! collective spin algebra, the model Hamiltonian and the special states used
//! by the generation protocol.

mod linalg;
mod model;
mod space;

pub(crate) use linalg::{canonicalize_phase, real, ONE, ZERO};
pub use linalg::{DensityMatrix, Operator, StateVector};
pub(crate) use model::ln_factorials;
pub use model::{
    build_hamiltonian, coherent_spin_state, collective_ops, cs_operator, embed_cs, embed_spins, initial_state,
    CollectiveOps, ModelParams, Pauli,
};
pub use space::{CsState, HilbertSpace, Subsystem};

/// Shorthand for [`HilbertSpace::new`].
pub fn build_space(n_spins: u32) -> crate::Result<HilbertSpace> {
    HilbertSpace::new(n_spins)
}
