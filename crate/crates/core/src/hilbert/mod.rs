//! Truncated Hilbert spaces: basis descriptors, states, operators and
//! tensor products.

mod basis;
mod operator;
mod ops;
mod state;

pub use basis::{Basis, Subsystem};
pub use operator::{embed, tensor, Operator, Tensor, HERMITIAN_TOLERANCE, SPARSE_DENSITY};
pub use ops::{
    collective_spin_ops, ladder_ops, number_op, pauli_ops, projector, sigma_minus, sigma_plus,
};
pub use state::{
    atomic_coherent_state, coherent_state, coherent_state_auto, default_cutoff, fock_state,
    inner_product, photon_plus, photon_plus_fock, qubit_state, StateVector, TRUNCATION_TOLERANCE,
};

pub(crate) use state::coherent_amplitudes;

pub use num_complex::Complex64 as C64;
