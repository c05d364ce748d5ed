use super::{basis, FockOperator};
use crate::model::ModelSpec;
use crate::{Error, Result, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// `H = a+_p T_pq a_q − ¼ a+_p a+_q V_pqrs a_r a_s`, assembled by acting on
/// basis states bit by bit.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<FockOperator> {
    let m = spec.modes();
    let dim = 1usize << m;
    let t = spec.hopping();
    let v = spec.interaction();
    let mut h = nalgebra::DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for n in 0..dim {
        for q in 0..m {
            let Some((sq, k)) = basis::annihilate(m, n, q) else { continue };
            for p in 0..m {
                let tpq = t[(p, q)];
                if tpq == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((sp, out)) = basis::create(m, k, p) {
                    h[(out, n)] += tpq * (sp * sq);
                }
            }
        }
        if v.is_zero() {
            continue;
        }
        for s in 0..m {
            let Some((ss, k1)) = basis::annihilate(m, n, s) else { continue };
            for r in 0..m {
                let Some((sr, k2)) = basis::annihilate(m, k1, r) else { continue };
                for q in 0..m {
                    let Some((sq, k3)) = basis::create(m, k2, q) else { continue };
                    for p in 0..m {
                        let Some((sp, out)) = basis::create(m, k3, p) else { continue };
                        let w = v.get(p, q, r, s);
                        if w != C64::new(0.0, 0.0) {
                            h[(out, n)] -= w * (0.25 * sp * sq * sr * ss);
                        }
                    }
                }
            }
        }
    }
    let h = FockOperator::new(m, h)?;
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InitialState, Interaction};
    use nalgebra::DMatrix;

    fn eigenvalues_in_sector(h: &FockOperator, n: u32) -> Vec<f64> {
        let idx: Vec<usize> = (0..h.dim()).filter(|&i| basis::particle_number(i) == n).collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |a, b| h.entry(idx[a], idx[b]));
        let mut ev: Vec<f64> = block.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    fn assert_spectrum(got: &[f64], mut want: Vec<f64>) {
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn diagonal_hopping_gives_occupation_energies() {
        let mut t = DMatrix::from_element(3, 3, C64::new(0.0, 0.0));
        for (j, e) in [0.3, -1.1, 2.0].iter().enumerate() {
            t[(j, j)] = C64::new(*e, 0.0);
        }
        let spec = ModelSpec::new(
            t,
            Interaction::zero(3),
            InitialState::Occupation(vec![false; 3]),
            vec![0.0],
        )
        .unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        for n in 0..8 {
            let want: f64 = (0..3).filter(|&j| basis::occupied(3, n, j)).map(|j| [0.3, -1.1, 2.0][j]).sum();
            assert!((h.entry(n, n).re - want).abs() < 1e-15);
        }
        assert!(h.max_abs_diff(&FockOperator::zeros(3)) > 0.0);
    }

    #[test]
    fn hubbard_dimer_spectrum() {
        let (t, u) = (1.0, 2.5);
        let h = build_hamiltonian(&ModelSpec::hubbard_dimer(t, u, vec![0.0])).unwrap();
        let root = (u * u + 16.0 * t * t).sqrt();
        assert_spectrum(&eigenvalues_in_sector(&h, 0), vec![0.0]);
        assert_spectrum(&eigenvalues_in_sector(&h, 1), vec![-t, -t, t, t]);
        assert_spectrum(
            &eigenvalues_in_sector(&h, 2),
            vec![0.0, 0.0, 0.0, u, (u - root) / 2.0, (u + root) / 2.0],
        );
        assert_spectrum(&eigenvalues_in_sector(&h, 3), vec![u - t, u - t, u + t, u + t]);
        assert_spectrum(&eigenvalues_in_sector(&h, 4), vec![2.0 * u]);
    }

    #[test]
    fn repeated_index_interaction_vanishes() {
        let v = Interaction::from_entries(2, [([0, 0, 1, 0], C64::new(1.0, 0.0)), ([0, 1, 1, 1], C64::new(1.0, 0.0))]).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn hamiltonian_conserves_particle_number() {
        let h = build_hamiltonian(&ModelSpec::hubbard_dimer(0.7, 1.3, vec![0.0])).unwrap();
        let n = FockOperator::total_number(4);
        assert!(h.commutator(&n).max_abs() < 1e-14);
    }
}
