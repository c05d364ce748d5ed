//! Explicit propagation of the coefficient hierarchy of Grassmann labels,
//! used to check that the propagator description loses nothing.

use nalgebra::DMatrix;

use super::step::{heun_in_place, euler_in_place, Mat, Scheme, SdeSystem};
use super::wiener::{NoiseFamily, WienerStream};
use crate::algebra::GrassmannNumber;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Recorded increments of one noise family, one row per step.
pub fn brownian_path(seed: u64, trajectory: u64, family: NoiseFamily, channels: usize, steps: usize, dt: f64) -> Vec<Vec<f64>> {
    let mut w = WienerStream::new(seed, trajectory, family, channels);
    (0..steps)
        .map(|_| {
            let mut row = vec![0.0; channels];
            w.fill(dt, &mut row);
            row
        })
        .collect()
}

/// Propagator matrix driven by a recorded path, starting from the identity.
pub fn propagate_matrix(sys: &SdeSystem, scheme: Scheme, path: &[Vec<f64>], dt: f64) -> Result<DMatrix<C64>> {
    let m = sys.modes();
    let mut x = Mat::identity(m);
    let (mut g, mut k1, mut k2, mut tmp) = (Mat::zeros(m), Mat::zeros(m), Mat::zeros(m), Mat::zeros(m));
    for dw in path {
        check_row(sys, dw)?;
        sys.increment(scheme, dt, dw, &mut g);
        match scheme {
            Scheme::StratonovichHeun => heun_in_place(&g, &mut x, &mut k1, &mut k2, &mut tmp),
            Scheme::ItoEuler => euler_in_place(&g, &mut x, &mut k1),
        }
    }
    Ok(x.to_dmatrix())
}

fn check_row(sys: &SdeSystem, dw: &[f64]) -> Result<()> {
    if dw.len() != sys.channels() {
        return Err(Error::Dimension(format!("{} increments for {} channels", dw.len(), sys.channels())));
    }
    Ok(())
}

/// Propagate `g_p(t)` label by label: for every odd monomial `A` the vector
/// `G_p(A)` follows `dG_p(A) = Σ_q (A_pq dt + Σ_γ B^γ_pq dW_γ) G_q(A)`.
pub fn propagate_hierarchy(
    sys: &SdeSystem,
    scheme: Scheme,
    g0: &[GrassmannNumber],
    path: &[Vec<f64>],
    dt: f64,
) -> Result<Vec<GrassmannNumber>> {
    let m = sys.modes();
    if g0.len() != m {
        return Err(Error::Dimension(format!("{} labels for {m} modes", g0.len())));
    }
    let space = g0[0].space().clone();
    if g0.iter().any(|g| g.space() != &space) {
        return Err(Error::SpaceMismatch);
    }
    if g0.iter().any(|g| !g.is_odd() && !g.is_zero()) {
        return Err(Error::Parity("coherent labels must be odd".into()));
    }
    let labels: Vec<u32> = (0..=space.full_mask()).filter(|a| a.count_ones() % 2 == 1).collect();
    let mut columns: Vec<Vec<C64>> = labels
        .iter()
        .map(|&a| g0.iter().map(|g| g.coefficient(a)).collect())
        .collect();
    let mut g = Mat::zeros(m);
    let (mut k1, mut k2, mut tmp) = (vec![ZERO; m], vec![ZERO; m], vec![ZERO; m]);
    for dw in path {
        check_row(sys, dw)?;
        sys.increment(scheme, dt, dw, &mut g);
        for x in columns.iter_mut() {
            for p in 0..m {
                let mut acc = ZERO;
                for q in 0..m {
                    acc += g.get(p, q) * x[q];
                }
                k1[p] = acc;
            }
            match scheme {
                Scheme::StratonovichHeun => {
                    for p in 0..m {
                        tmp[p] = x[p] + k1[p];
                    }
                    for p in 0..m {
                        let mut acc = ZERO;
                        for q in 0..m {
                            acc += g.get(p, q) * tmp[q];
                        }
                        k2[p] = acc;
                    }
                    for p in 0..m {
                        x[p] += (k1[p] + k2[p]) * 0.5;
                    }
                }
                Scheme::ItoEuler => {
                    for p in 0..m {
                        x[p] += k1[p];
                    }
                }
            }
        }
    }
    Ok((0..m)
        .map(|p| GrassmannNumber::from_terms(&space, labels.iter().zip(&columns).map(|(&a, x)| (a, x[p]))))
        .collect())
}

/// `g_p = Σ_q M_pq g0_q`.
pub fn apply_propagator(mat: &DMatrix<C64>, g0: &[GrassmannNumber]) -> Result<Vec<GrassmannNumber>> {
    let m = mat.nrows();
    if g0.len() != m || mat.ncols() != m {
        return Err(Error::Dimension("propagator and label count differ".into()));
    }
    let space = g0[0].space().clone();
    let masks: Vec<u32> = (0..=space.full_mask()).collect();
    Ok((0..m)
        .map(|p| {
            GrassmannNumber::from_terms(
                &space,
                masks.iter().map(|&a| {
                    let mut acc = ZERO;
                    for q in 0..m {
                        acc += mat[(p, q)] * g0[q].coefficient(a);
                    }
                    (a, acc)
                }),
            )
        })
        .collect())
}
