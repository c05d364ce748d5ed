use grassb::fock::*;
use grassb::model::ModelSpec;
use grassb::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn canonical_anticommutation_relations() {
    for m in 1..=4 {
        let ops = build_ladder_operators(m);
        let id = FockOperator::identity(m);
        for i in 0..m {
            for j in 0..m {
                let (a, ad) = (&ops[i].annihilation, &ops[j].creation);
                let want = if i == j { id.clone() } else { FockOperator::zeros(m) };
                assert_eq!(a.anticommutator(ad), want);
                assert_eq!(a.anticommutator(&ops[j].annihilation), FockOperator::zeros(m));
            }
        }
    }
}

#[test]
fn hubbard_spectrum_matches_closed_form() {
    // half filling, one particle per spin: energies 0, U, (U ± sqrt(U² + 16 t²))/2
    let (t, u) = (1.0, 2.5);
    let spec = ModelSpec::hubbard_dimer(t, u, vec![0.0]);
    let h = build_hamiltonian(&spec).unwrap();
    // states with one up (modes 0,1) and one down (modes 2,3) particle
    let idx: Vec<usize> = (0..16usize)
        .filter(|&n| ((n >> 2) & 3).count_ones() == 1 && (n & 3).count_ones() == 1)
        .collect();
    let block = nalgebra::DMatrix::from_fn(4, 4, |a, b| h.entry(idx[a], idx[b]));
    let mut got: Vec<f64> = block.symmetric_eigenvalues().iter().cloned().collect();
    got.sort_by(f64::total_cmp);
    let r = (u * u + 16.0 * t * t).sqrt();
    let mut want = vec![0.0, u, (u - r) / 2.0, (u + r) / 2.0];
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
    }
}

#[test]
fn free_dimer_rabi_oscillation() {
    let tau = C64::new(0.3, -0.4);
    let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    let spec = ModelSpec::free_dimer(tau, times.clone());
    let rhos = evolve_exact(&spec, &spec.initial_density()).unwrap();
    for (t, rho) in times.iter().zip(&rhos) {
        let n1 = expectation(rho, &FockOperator::number(2, 0)).unwrap();
        assert!((n1.re - (tau.norm() * t).cos().powi(2)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evolution_preserves_density_properties(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = grassb::validate::random_model(3, &mut rng).unwrap().with_times(vec![0.0, 0.7, 1.9]).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        prop_assert!(h.commutator(&FockOperator::total_number(3)).max_abs() < 1e-12);
        let rho0 = random_density(3, &mut rng);
        let rhos = evolve_exact(&spec, &rho0).unwrap();
        prop_assert!(rhos[0].max_abs_diff(&rho0) < 1e-12);
        for rho in &rhos {
            prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            prop_assert!(rho.hermiticity_defect() < 1e-12);
            let min = rho.matrix().clone().symmetric_eigenvalues().min();
            prop_assert!(min > -1e-10);
        }
    }
}
