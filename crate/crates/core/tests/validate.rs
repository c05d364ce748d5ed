use grassb::validate::*;

#[test]
fn validation_suite_passes() {
    let checks = run_validation();
    for c in &checks {
        println!("{:<28} {} {:>6.2}s  {}", c.name, if c.passed { "ok  " } else { "FAIL" }, c.seconds, c.detail);
    }
    assert!(checks.iter().all(|c| c.passed || c.informational));
}

#[test]
fn coherent_identities_hold_up_to_three_modes() {
    for m in 1..=3 {
        let w = coherent_correspondences(m, 4, 40 + m as u64).unwrap();
        assert!(w <= 1e-12, "m={m}: {w:e}");
    }
}

#[test]
fn ring_laws_are_exact_on_integer_coefficients() {
    let r = algebra_laws(3, 100, 12).unwrap();
    assert_eq!(r.failures(), 0, "{r:?}");
}

#[test]
fn triangle_holds_while_products_can_exceed_norm_product() {
    let r = norm_inequalities(2000, 13).unwrap();
    assert_eq!(r.triangle_violations, 0);
    assert_eq!(r.definiteness_violations, 0);
    let (lhs, rhs) = submultiplicativity_counterexample();
    assert!(lhs > rhs);
}
