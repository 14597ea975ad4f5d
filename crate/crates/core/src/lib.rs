//! Numerics for the mean-field Bose gas on the unit torus: lattice sums, the
//! self-consistent effective chemical potential, grand-potential envelopes,
//! the reduced variational surface and exact diagonalization on truncated
//! Fock spaces.

// `!(x > 0.0)` is how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod focked;
pub mod lattice;
pub mod linalg;
pub mod potentials;
pub mod selfconsistent;
pub mod suite;
pub mod variational;

pub use error::{Error, Result};
pub use focked::{FockBasis, OperatorMatrix, StateMatrix};
pub use lattice::{LatticeSpec, LatticeSum, Mode};
pub use potentials::{BoundEnvelope, MeanField};
pub use selfconsistent::{ChemPotSolution, Interaction, ModelParams, SolverOptions};
pub use variational::{SurfaceParams, VariationalPoint};
