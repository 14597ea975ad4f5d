//! Truncated bosonic Fock space: bases, ladder operators, Hamiltonians,
//! Gibbs states, observables, coherent states and entropies.

pub mod basis;
pub mod coherent;
pub mod ed;
pub mod entropy;
pub mod gibbs;
pub mod hamiltonian;
pub mod operator;

pub use basis::{build_basis, FockBasis, DEFAULT_DIMENSION_CAP};
pub use coherent::{coherent_amplitudes, coherent_state, lower_symbol, upper_symbol_check, PolarGrid};
pub use ed::{EdPoint, EdSystem};
pub use entropy::{bosonic_relative_entropy, entropies, relative_entropy, von_neumann};
pub use gibbs::{
    gibbs_state, grand_potential, grand_potential_functional, observables, trial_state, GibbsState, Observables,
};
pub use hamiltonian::{build_hamiltonian, onsager_gap, onsager_gap_for, perturb_hamiltonian};
pub use operator::{ladder, mode_number, number, OperatorMatrix, StateMatrix};
