//! Stochastic propagation of the coherent labels: pair decomposition of the
//! interaction, linear matrix SDEs for the unprimed and primed propagators,
//! and ensemble reconstruction of the density operator.

mod decomp;
mod ensemble;
mod estimate;
pub mod hierarchy;
mod step;
mod wiener;

pub use decomp::{
    decompose_pair_matrix, decompose_potential, drift, drift_matrix, ito_correction, k_contraction,
    noise_matrices, pair_matrix, PairDecomposition,
};
pub use ensemble::{
    estimate_observable, reconstruct_rho, run_streaming, simulate_ensemble, DivergedTrajectory,
    EnsembleConfig, EnsembleStatistics, Snapshot, Trajectory, TrajectoryEnsemble, DIVERGENCE_BOUND,
};
pub use estimate::{second_quantize, trajectory_rho_berezin, ObservableEstimate, RhoEstimate, RhoKernel};
pub use step::{step_ito_euler, step_stratonovich_heun, PropagatorPair, Scheme, SdeSystem, MAX_MODES};
pub use wiener::{NoiseFamily, WienerStream};
