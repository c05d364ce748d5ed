use grassb::algebra::random::{random_number, Sector};
use grassb::algebra::{Generator, GeneratorSpace, GrassmannNumber};
use grassb::calculus::*;
use grassb::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VARS: [(&str, Restriction); 3] = [
    ("u", Restriction::Unrestricted),
    ("w", Restriction::OddOnly),
    ("x", Restriction::OddOnly),
];

fn setup(seed: u64, depth: usize) -> (Expression, Assignment) {
    let space = GeneratorSpace::unprimed(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expr = random_expression(&mut rng, &VARS, &space, depth);
    let a = Assignment::new(&space)
        .with("u", random_number(&space, Sector::Any, 0.7, &mut rng))
        .unwrap()
        .with("w", random_number(&space, Sector::Odd, 0.7, &mut rng))
        .unwrap()
        .with("x", random_number(&space, Sector::Odd, 0.7, &mut rng))
        .unwrap();
    (expr, a)
}

fn close(a: &GrassmannNumber, b: &GrassmannNumber) -> bool {
    a.distance(b).unwrap() <= 1e-10 * (1.0 + a.norm() + b.norm())
}

#[test]
fn base_case_tables() {
    use MetricDerivativeKind::*;
    let space = GeneratorSpace::unprimed(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let names = ["g1", "g2", "g3"];
    let mut a = Assignment::new(&space);
    for n in names {
        a.set(n, random_number(&space, Sector::Any, 1.0, &mut rng)).unwrap();
    }
    let one = GrassmannNumber::one(&space);
    let zero = GrassmannNumber::zero(&space);
    for (i, gi) in names.iter().enumerate() {
        for (j, gj) in names.iter().enumerate() {
            let delta = if i == j { &one } else { &zero };
            let plus = Expression::var(gj).even();
            let minus = Expression::var(gj).odd();
            let d = |e: &Expression, k| metric_derivative(e, gi, k).unwrap().eval(&a).unwrap();
            assert_eq!(&d(&plus, LeftEven), delta);
            assert_eq!(d(&minus, LeftEven), zero);
            assert_eq!(&d(&minus, LeftOdd), delta);
            assert_eq!(d(&plus, LeftOdd), zero);
        }
    }
}

#[test]
fn odd_product_derivatives() {
    // ∂⁻_{v1}(v1 v2) = v2, ∂⁻_{v2}(v1 v2) = −v1, cross-checked by finite differences
    let space = GeneratorSpace::unprimed(3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v1 = random_number(&space, Sector::Odd, 1.0, &mut rng);
    let v2 = random_number(&space, Sector::Odd, 1.0, &mut rng);
    let a = Assignment::new(&space).with("v1", v1.clone()).unwrap().with("v2", v2.clone()).unwrap();
    let f = Expression::odd_var("v1") * Expression::odd_var("v2");
    let d1 = metric_derivative(&f, "v1", MetricDerivativeKind::LeftOdd).unwrap().eval(&a).unwrap();
    let d2 = metric_derivative(&f, "v2", MetricDerivativeKind::LeftOdd).unwrap().eval(&a).unwrap();
    assert!(close(&d1, &v2));
    assert!(close(&d2, &-&v1));
    let e1 = GrassmannNumber::generator(&space, Generator::e(1)).unwrap();
    let fd = coefficient_partial(&f, "v2", 0b001, &a).unwrap();
    assert!(fd.distance(&(&e1 * &d2)).unwrap() < 1e-8);
}

#[test]
fn square_of_odd_variable_vanishes_and_responds_linearly() {
    let space = GeneratorSpace::unprimed(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_number(&space, Sector::Odd, 1.0, &mut rng);
    let a = Assignment::new(&space).with("v", g).unwrap();
    let f = Expression::odd_var("v") * Expression::odd_var("v");
    assert!(f.eval(&a).unwrap().is_zero());
    for mask in [0b001, 0b010, 0b111] {
        assert!(coefficient_partial(&f, "v", mask, &a).unwrap().norm() < 1e-9);
    }
}

#[test]
fn linear_expression_residual_is_at_noise_floor() {
    let space = GeneratorSpace::unprimed(3);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = random_number(&space, Sector::Any, 1.0, &mut rng);
    let f = Expression::constant(c.clone()) * Expression::var("u") + Expression::var("u").involute();
    let a = Assignment::new(&space).with("u", random_number(&space, Sector::Any, 1.0, &mut rng)).unwrap();
    let delta = random_number(&space, Sector::Any, 1.0, &mut rng).scale(C64::new(1e-3, 0.0));
    let r = check_local_behaviour(&f, "u", &a, &delta).unwrap();
    assert!(r.linear < 1e-10 && r.increment < 1e-12, "{r:?}");
}

#[test]
fn random_expressions_match_finite_differences() {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let (expr, a) = setup(seed, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        for var in ["u", "w"] {
            let sector = if var == "u" { Sector::Any } else { Sector::Odd };
            let mut delta = random_number(a.space(), sector, 1.0, &mut rng);
            delta = delta.scale(C64::new(1e-3 / delta.norm().max(1e-300), 0.0));
            let r = check_local_behaviour(&expr, var, &a, &delta).unwrap();
            worst = worst.max(r.linear);
        }
    }
    assert!(worst <= 1e-6, "worst linear residual {worst:e}");
}

#[test]
fn remainder_is_quadratic_in_the_variation() {
    let mut slopes = Vec::new();
    for seed in 0..200 {
        // a random expression with at least two occurrences of `u`
        let (core, a) = setup(seed, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let other = random_expression(&mut rng, &VARS, a.space(), 2);
        let expr = core * Expression::var("u") * other * Expression::var("u").involute()
            + random_expression(&mut rng, &VARS, a.space(), 2);
        let dir = random_number(a.space(), Sector::Any, 1.0, &mut rng);
        let dir = dir.scale(C64::new(1.0 / dir.norm(), 0.0));
        let scales = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
        let res: Vec<f64> = scales
            .iter()
            .map(|&s| check_local_behaviour(&expr, "u", &a, &dir.scale(C64::new(s, 0.0))).unwrap().increment)
            .collect();
        // only expressions with a genuine second-order term
        if res[0] < 1e-6 {
            continue;
        }
        let xs: Vec<f64> = scales.iter().map(|s| s.log10()).collect();
        let ys: Vec<f64> = res.iter().map(|r| r.log10()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        slopes.push(sxy / sxx);
        if slopes.len() == 20 {
            break;
        }
    }
    assert!(slopes.len() >= 10, "too few nonlinear expressions");
    for s in &slopes {
        assert!((s - 2.0).abs() <= 0.1, "slopes {slopes:?}");
    }
}

#[test]
fn second_derivatives_commute_as_expected() {
    use MetricDerivativeKind::*;
    for seed in 0..50 {
        let (expr, a) = setup(seed, 3);
        let d = |e: &Expression, v, k| metric_derivative(e, v, k).unwrap();
        let ev = |e: Expression| e.eval(&a).unwrap();
        // odd derivatives anticommute
        let wx = ev(d(&d(&expr, "x", LeftOdd), "w", LeftOdd));
        let xw = ev(d(&d(&expr, "w", LeftOdd), "x", LeftOdd));
        assert!(close(&wx, &-&xw), "seed {seed}");
        // even derivatives commute with odd ones
        let ue = ev(d(&d(&expr, "w", LeftOdd), "u", LeftEven));
        let eu = ev(d(&d(&expr, "u", LeftEven), "w", LeftOdd));
        assert!(close(&ue, &eu), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn left_right_relations(seed in 0u64..10_000) {
        use MetricDerivativeKind::*;
        let (expr, a) = setup(seed, 3);
        for var in ["u", "w"] {
            let le = metric_derivative(&expr, var, LeftEven).unwrap().eval(&a).unwrap();
            let re = metric_derivative(&expr, var, RightEven).unwrap().eval(&a).unwrap();
            prop_assert!(close(&le, &re));
            let lo = metric_derivative(&expr, var, LeftOdd).unwrap().eval(&a).unwrap();
            let ro_bar = metric_derivative(&expr.clone().involute(), var, RightOdd).unwrap().eval(&a).unwrap();
            prop_assert!(close(&lo, &-&ro_bar));
        }
    }

    #[test]
    fn right_derivatives_describe_right_variations(seed in 0u64..10_000) {
        use MetricDerivativeKind::*;
        let (expr, a) = setup(seed, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let delta = random_number(a.space(), Sector::Any, 1.0, &mut rng);
        let left = check_local_behaviour(&expr, "u", &a, &delta.scale(C64::new(1e-4, 0.0))).unwrap();
        let re = metric_derivative(&expr, "u", RightEven).unwrap().eval(&a).unwrap();
        let ro = metric_derivative(&expr, "u", RightOdd).unwrap().eval(&a).unwrap();
        let lo = metric_derivative(&expr, "u", LeftOdd).unwrap().eval(&a).unwrap();
        let le = metric_derivative(&expr, "u", LeftEven).unwrap().eval(&a).unwrap();
        let l = &(&delta.even_part() * &le) + &(&delta.odd_part() * &lo);
        let r = &(&re * &delta.even_part()) + &(&ro * &delta.odd_part());
        prop_assert!(close(&l, &r));
        prop_assert!(left.linear < 1e-6);
    }
}

#[test]
fn integration_by_parts_identity_holds() {
    let space = GeneratorSpace::unprimed(2);
    let v = Expression::odd_var("v");
    let r = check_integration_by_parts(&v, &v, "v", &space, 1.0, 100_000, 2024).unwrap();
    assert!(r.residual.max_z() <= 3.0, "{:?}", r.residual);
    let an = r.analytic.expect("odd-variable functions are affine");
    for (est, exact) in [(&r.lhs, &an.lhs), (&r.derivative_term, &an.derivative_term), (&r.measure_term, &an.measure_term)] {
        let diff = grassb::calculus::Estimate { mean: &est.mean - exact, std_error: est.std_error.clone() };
        assert!(diff.max_z() <= 4.0, "{est:?} vs {exact}");
    }
}
