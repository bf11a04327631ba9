//! Fermionic operator algebra and fermion-to-qubit mappings.

mod fermion;
mod mapping;
mod pauli;

pub use fermion::{FermionOperator, Ladder};
pub use mapping::{hamiltonian_to_fermion, jordan_wigner, number_operator, parity_map, sz_operator, Mapping};
pub use pauli::{pauli_multiply, Pauli, PauliString, PauliSum, PauliTerm, PRUNE_THRESHOLD};
