//! Grassmann B phase-space representation for fermions.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: exact arithmetic on a finite Grassmann algebra (products,
//!   parity projections, conjugation, formal derivatives, Berezin integrals,
//!   the Hilbert-Schmidt n-point norm).
//! * [`calculus`]: algebraic expressions over Grassmann variables with metric
//!   (variation based) derivatives and numerical checks against coefficient
//!   space calculus.
//! * [`fock`]: the exact Fock-space reference: Jordan-Wigner ladder operators,
//!   Hamiltonians, von Neumann evolution and Grassmann coherent states.
//! * [`brep`]: the B function of a density operator, the operator
//!   correspondences and the deterministic B master equation.
//! * [`sde`]: the c-number stochastic unraveling with propagator matrices,
//!   trajectory ensembles and Monte Carlo reconstruction.

pub mod algebra;
pub mod brep;
pub mod calculus;
mod error;
pub mod fock;
pub mod model;
pub mod sde;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
