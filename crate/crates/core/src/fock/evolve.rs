use nalgebra::{DMatrix, DVector};

use super::{build_hamiltonian, FockOperator};
use crate::model::ModelSpec;
use crate::{Result, C64};

/// `exp(−iHt)` from one Hermitian eigendecomposition of `H`.
#[derive(Debug, Clone)]
pub struct Propagator {
    modes: usize,
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl Propagator {
    pub fn new(h: &FockOperator) -> Self {
        let eig = h.matrix().clone().symmetric_eigen();
        Self {
            modes: h.modes(),
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(0.0, -self.energies[k] * t).exp();
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(−iHt) ρ exp(iHt)`.
    pub fn evolve(&self, rho: &FockOperator, t: f64) -> FockOperator {
        if t == 0.0 {
            return rho.clone();
        }
        let u = self.unitary(t);
        let out = &u * rho.matrix() * u.adjoint();
        FockOperator::new(self.modes, out).expect("dimensions are preserved")
    }
}

/// `ρ(t)` on the model's time grid.
pub fn evolve_exact(spec: &ModelSpec, rho0: &FockOperator) -> Result<Vec<FockOperator>> {
    let h = build_hamiltonian(spec)?;
    let prop = Propagator::new(&h);
    Ok(spec.times().iter().map(|&t| prop.evolve(rho0, t)).collect())
}
