//! The Grassmann B function of a density operator, operator
//! correspondences and the deterministic B master equation.

mod master;
mod ode;
mod repr;

pub use master::{master_rhs, propagate_b, MasterOperator};
pub use ode::{dopri5, OdeOptions, OdeStats};
pub use repr::{apply_correspondence, b_from_rho, integration_order, rho_from_b, BFunction, Correspondence, Reconstruction};
