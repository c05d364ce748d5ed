use grassb::algebra::random::{random_number, Sector};
use grassb::algebra::GeneratorSpace;
use grassb::brep::*;
use grassb::fock::{build_hamiltonian, evolve_exact, expectation, random_density, FockOperator};
use grassb::model::ModelSpec;
use grassb::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_even_b(modes: usize, rng: &mut ChaCha8Rng) -> BFunction {
    let space = GeneratorSpace::b_space(modes);
    BFunction::new(modes, random_number(&space, Sector::Even, 1.0, rng)).unwrap()
}

#[test]
fn round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (modes, count) in [(2, 100), (3, 20)] {
        let rec = Reconstruction::new(modes).unwrap();
        for _ in 0..count {
            let rho = random_density(modes, &mut rng);
            let b = rec.b_from_rho(&rho).unwrap();
            assert!(b.is_even());
            assert!(rec.rho_from_b(&b).unwrap().max_abs_diff(&rho) <= 1e-12);
            // the converse on a number-conserving B
            let b2 = rec.b_from_rho(&rec.rho_from_b(&b).unwrap()).unwrap();
            assert!(b2.value().distance(b.value()).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn b_from_rho_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rec = Reconstruction::new(2).unwrap();
    let (r1, r2) = (random_density(2, &mut rng), random_density(2, &mut rng));
    let (al, be) = (C64::new(0.3, -1.2), C64::new(2.0, 0.5));
    let mix = &r1.scale(al) + &r2.scale(be);
    let lhs = rec.b_from_rho(&mix).unwrap();
    let rhs = &rec.b_from_rho(&r1).unwrap().value().scale(al) + &rec.b_from_rho(&r2).unwrap().value().scale(be);
    assert!(lhs.value().distance(&rhs).unwrap() < 1e-12);
}

#[test]
fn rho_from_b_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rec = Reconstruction::new(2).unwrap();
    let (b1, b2) = (random_even_b(2, &mut rng), random_even_b(2, &mut rng));
    let sum = rec.rho_from_b(&(&b1 + &b2)).unwrap();
    let parts = &rec.rho_from_b(&b1).unwrap() + &rec.rho_from_b(&b2).unwrap();
    assert!(sum.max_abs_diff(&parts) < 1e-14);
}

#[test]
fn correspondences_match_operator_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rec = Reconstruction::new(2).unwrap();
    for _ in 0..50 {
        let rho = random_density(2, &mut rng);
        let b = rec.b_from_rho(&rho).unwrap();
        for j in 0..2 {
            let a = FockOperator::annihilation(2, j);
            let ad = FockOperator::creation(2, j);
            let cases = [
                (Correspondence::AnnihilateLeft(j), &a * &rho),
                (Correspondence::CreateLeft(j), &ad * &rho),
                (Correspondence::AnnihilateRight(j), &rho * &a),
                (Correspondence::CreateRight(j), &rho * &ad),
            ];
            for (rule, want) in cases {
                let got = rec.rho_from_b(&apply_correspondence(&b, rule).unwrap()).unwrap();
                assert!(got.max_abs_diff(&want) <= 1e-12, "{rule:?}");
            }
        }
    }
}

#[test]
fn vacuum_is_annihilated() {
    let rec = Reconstruction::new(2).unwrap();
    let b = rec.b_from_rho(&FockOperator::projector(2, 0)).unwrap();
    for j in 0..2 {
        let out = apply_correspondence(&b, Correspondence::AnnihilateLeft(j)).unwrap();
        assert!(rec.rho_from_b(&out).unwrap().max_abs() == 0.0);
    }
}

#[test]
fn composed_rules_give_number_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rec = Reconstruction::new(2).unwrap();
    let rho = random_density(2, &mut rng);
    let b = rec.b_from_rho(&rho).unwrap();
    for j in 0..2 {
        // a+_j (a_j ρ): first e_j B, then the derivative
        let inner = apply_correspondence(&b, Correspondence::AnnihilateLeft(j)).unwrap();
        let outer = apply_correspondence(&inner, Correspondence::CreateLeft(j)).unwrap();
        let want = &FockOperator::number(2, j) * &rho;
        assert!(rec.rho_from_b(&outer).unwrap().max_abs_diff(&want) <= 1e-12);
    }
}

fn random_model(modes: usize, rng: &mut ChaCha8Rng) -> ModelSpec {
    use grassb::model::{InitialState, Interaction};
    use rand::Rng;
    let mut t = nalgebra::DMatrix::from_fn(modes, modes, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    t = (&t + t.adjoint()) * C64::new(0.5, 0.0);
    let mut entries = Vec::new();
    for _ in 0..6 {
        let idx = [0, 0, 0, 0].map(|_| rng.random_range(0..modes));
        let w = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        entries.push((idx, w));
        // Hermitian partner V_srqp = V*_pqrs
        entries.push(([idx[3], idx[2], idx[1], idx[0]], w.conj()));
    }
    let v = Interaction::from_entries(modes, entries).unwrap();
    ModelSpec::new(t, v, InitialState::Occupation(vec![false; modes]), vec![0.0]).unwrap()
}

#[test]
fn master_equation_matches_commutator() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for modes in [2, 3] {
        let rec = Reconstruction::new(modes).unwrap();
        for _ in 0..25 {
            let spec = random_model(modes, &mut rng);
            let h = build_hamiltonian(&spec).unwrap();
            let b = random_even_b(modes, &mut rng);
            let rho = rec.rho_from_b(&b).unwrap();
            let want = h.commutator(&rho).scale(C64::new(0.0, -1.0));
            let rhs = master_rhs(&b, &spec).unwrap();
            assert!(rhs.is_even());
            let got = rec.rho_from_b(&rhs).unwrap();
            assert!(got.max_abs_diff(&want) <= 1e-12 * want.max_abs().max(1.0), "M={modes}");
        }
    }
    let still = ModelSpec::free_dimer(C64::new(0.0, 0.0), vec![0.0]);
    let b = random_even_b(2, &mut rng);
    assert!(master_rhs(&b, &still).unwrap().value().is_zero());
}

#[test]
fn propagation_starts_at_initial_b() {
    let spec = ModelSpec::free_dimer(C64::new(1.0, 0.0), vec![0.0, 0.1]);
    let b0 = Reconstruction::new(2).unwrap().b_from_rho(&spec.initial_density()).unwrap();
    let bs = propagate_b(&b0, &spec).unwrap();
    assert_eq!(bs[0], b0);
}

#[test]
fn free_dimer_propagation_follows_rabi_law() {
    let tau = C64::new(0.8, 0.6);
    let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
    let spec = ModelSpec::free_dimer(tau, times.clone());
    let rec = Reconstruction::new(2).unwrap();
    let b0 = rec.b_from_rho(&spec.initial_density()).unwrap();
    let n1 = FockOperator::number(2, 0);
    for (t, b) in times.iter().zip(propagate_b(&b0, &spec).unwrap()) {
        let got = expectation(&rec.rho_from_b(&b).unwrap(), &n1).unwrap();
        assert!((got.re - (t * tau.norm()).cos().powi(2)).abs() <= 1e-8, "t={t}");
    }
}

#[test]
fn hubbard_dimer_propagation_matches_exact_evolution() {
    let t_max = 2.0;
    let times: Vec<f64> = (0..=10).map(|k| t_max * k as f64 / 10.0).collect();
    let spec = ModelSpec::hubbard_dimer(1.0, 2.0, times);
    let rec = Reconstruction::new(4).unwrap();
    let rho0 = spec.initial_density();
    let exact = evolve_exact(&spec, &rho0).unwrap();
    let bs = propagate_b(&rec.b_from_rho(&rho0).unwrap(), &spec).unwrap();
    for (b, want) in bs.iter().zip(&exact) {
        let got = rec.rho_from_b(b).unwrap();
        assert!(got.max_abs_diff(want) <= 1e-8);
        assert!((got.trace() - C64::new(1.0, 0.0)).norm() <= 1e-8);
    }
}
