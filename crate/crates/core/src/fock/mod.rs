//! Exact Fock-space reference: ladder operators, Hamiltonians, von Neumann
//! evolution and Grassmann coherent states.

pub mod basis;
mod coherent;
mod evolve;
mod hamiltonian;
mod operator;

pub use coherent::{coherent_bra, coherent_ket, dyadic, outer, GrassmannDyadic, GrassmannFockVector, Side};
pub use evolve::{evolve_exact, Propagator};
pub use hamiltonian::build_hamiltonian;
pub use operator::{build_ladder_operators, expectation, random_density, FockOperator, LadderPair};
