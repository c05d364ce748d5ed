use nalgebra::DMatrix;

use crate::model::Interaction;
use crate::{Error, Result, C64};

const SYMMETRY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-10;
const DROP_TOL: f64 = 1e-12;

/// `V_pqrs = Σ_γ ω_γ O^γ_pr O^γ_qs`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDecomposition {
    pub modes: usize,
    /// `(ω_γ, O^γ)`; `ω_γ` is real for real interactions.
    pub gammas: Vec<(C64, DMatrix<C64>)>,
    /// Relative Frobenius residual of the reconstruction.
    pub reconstruction_residual: f64,
}

/// `W_{(p,r),(q,s)} = V_pqrs` as an `M² × M²` matrix.
pub fn pair_matrix(v: &Interaction) -> DMatrix<C64> {
    let m = v.modes();
    DMatrix::from_fn(m * m, m * m, |pr, qs| v.get(pr / m, qs / m, pr % m, qs % m))
}

pub fn decompose_potential(v: &Interaction) -> Result<PairDecomposition> {
    decompose_pair_matrix(&pair_matrix(v), v.modes())
}

/// Factor a complex-symmetric pair matrix. The real and imaginary parts are
/// real symmetric and are diagonalized separately; channels from the
/// imaginary part carry `ω = iλ`.
pub fn decompose_pair_matrix(w: &DMatrix<C64>, modes: usize) -> Result<PairDecomposition> {
    let n = modes * modes;
    if w.nrows() != n || w.ncols() != n {
        return Err(Error::Dimension(format!("pair matrix must be {n}x{n}")));
    }
    let norm = w.norm();
    if norm == 0.0 {
        return Ok(PairDecomposition {
            modes,
            gammas: Vec::new(),
            reconstruction_residual: 0.0,
        });
    }
    let asym = (w - w.transpose()).norm() / norm;
    if asym > SYMMETRY_TOL {
        return Err(Error::AsymmetricPotential(asym));
    }
    let mut gammas = Vec::new();
    for (part, factor) in [(w.map(|c| c.re), C64::new(1.0, 0.0)), (w.map(|c| c.im), C64::new(0.0, 1.0))] {
        if part.norm() == 0.0 {
            continue;
        }
        let sym = (&part + part.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda.abs() < DROP_TOL * norm {
                continue;
            }
            let col = eig.eigenvectors.column(k);
            let o = DMatrix::from_fn(modes, modes, |p, r| C64::new(col[p * modes + r], 0.0));
            gammas.push((factor * lambda, o));
        }
    }
    let mut rebuilt = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (omega, o) in &gammas {
        for pr in 0..n {
            for qs in 0..n {
                rebuilt[(pr, qs)] += omega * o[(pr / modes, pr % modes)] * o[(qs / modes, qs % modes)];
            }
        }
    }
    let residual = (&rebuilt - w).norm() / norm;
    if residual > RESIDUAL_TOL {
        return Err(Error::Tolerance(format!("pair decomposition residual {residual:.3e}")));
    }
    Ok(PairDecomposition {
        modes,
        gammas,
        reconstruction_residual: residual,
    })
}

/// `K_pq = Σ_l V_lpql`.
pub fn k_contraction(v: &Interaction) -> DMatrix<C64> {
    let m = v.modes();
    DMatrix::from_fn(m, m, |p, q| (0..m).map(|l| v.get(l, p, q, l)).sum())
}

/// Stratonovich drift generator `−iT + (i/4)K`.
pub fn drift_matrix(t: &DMatrix<C64>, v: &Interaction) -> DMatrix<C64> {
    let i = C64::new(0.0, 1.0);
    t * (-i) + k_contraction(v) * (i * 0.25)
}

/// Drift applied to a propagator: `(−iT + (i/4)K)·mat`.
pub fn drift(mat: &DMatrix<C64>, t: &DMatrix<C64>, v: &Interaction) -> DMatrix<C64> {
    drift_matrix(t, v) * mat
}

/// `B^γ = √(ω_γ/(2i)) O^γ`, principal branch.
pub fn noise_matrices(decomp: &PairDecomposition) -> Vec<DMatrix<C64>> {
    decomp
        .gammas
        .iter()
        .map(|(omega, o)| o * (omega / C64::new(0.0, 2.0)).sqrt())
        .collect()
}

/// `½ Σ_γ (B^γ)²`: the drift added when passing to the Ito form.
pub fn ito_correction(noises: &[DMatrix<C64>], modes: usize) -> DMatrix<C64> {
    let mut acc = DMatrix::from_element(modes, modes, C64::new(0.0, 0.0));
    for b in noises {
        acc += b * b * C64::new(0.5, 0.0);
    }
    acc
}
