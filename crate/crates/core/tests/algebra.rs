use grassb::algebra::random::Sector;
use grassb::algebra::{Family, Generator, GeneratorSpace, GrassmannNumber, Parity};
use grassb::validate::random_integer_number;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn triple(modes: usize, seed: u64, sector: Sector) -> [GrassmannNumber; 3] {
    let space = GeneratorSpace::from_families(modes, &[Family::Unprimed, Family::UnprimedConj]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [0, 1, 2].map(|_| random_integer_number(&space, sector, &mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_laws(modes in 1usize..=4, seed in any::<u64>()) {
        let [a, b, c] = triple(modes, seed, Sector::Any);
        prop_assert_eq!((&a * &b).try_mul(&c).unwrap(), a.try_mul(&(&b * &c)).unwrap());
        prop_assert_eq!(a.try_mul(&(&b + &c)).unwrap(), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&b * &a).conjugate().unwrap(), a.conjugate().unwrap().try_mul(&b.conjugate().unwrap()).unwrap());
        prop_assert_eq!(a.conjugate().unwrap().conjugate().unwrap(), a);
    }

    #[test]
    fn parity_rules(modes in 1usize..=4, seed in any::<u64>()) {
        let [a, b, c] = triple(modes, seed, Sector::Any);
        let (ae, ao) = (a.even_part(), a.odd_part());
        prop_assert_eq!(&ae + &ao, a.clone());
        prop_assert_eq!(ae.even_part(), ae.clone());
        prop_assert!(ao.even_part().is_zero());
        prop_assert_eq!(&(&b.odd_part() * &c.odd_part()), &-(&c.odd_part() * &b.odd_part()));
        prop_assert_eq!(&ae * &b, &b * &ae);
        // odd elements square to zero
        prop_assert!((&ao * &ao).is_zero());
        let prod = &b.odd_part() * &c.even_part();
        if !prod.is_zero() {
            prop_assert_eq!(prod.parity(), Parity::Odd);
        }
    }

    #[test]
    fn norm_triangle_and_definiteness(modes in 1usize..=4, seed in any::<u64>()) {
        let [a, b, _] = triple(modes, seed, Sector::Any);
        prop_assert!((&a + &b).norm() <= a.norm() + b.norm() + 1e-12);
        prop_assert_eq!(a.distance(&a).unwrap(), 0.0);
        prop_assert_eq!(a.norm() == 0.0, a.is_zero());
    }

    #[test]
    fn derivatives_square_to_zero_and_anticommute(seed in any::<u64>()) {
        let [a, _, _] = triple(3, seed, Sector::Any);
        let space = a.space().clone();
        for i in 0..space.len() {
            let d = a.left_derivative_index(i);
            prop_assert!(d.left_derivative_index(i).is_zero());
            for j in 0..space.len() {
                let ij = d.left_derivative_index(j);
                let ji = a.left_derivative_index(j).left_derivative_index(i);
                prop_assert_eq!(ij, -&ji);
            }
        }
    }

    #[test]
    fn full_integral_is_top_coefficient(seed in any::<u64>()) {
        let [a, _, _] = triple(2, seed, Sector::Any);
        let space = a.space().clone();
        let gens: Vec<Generator> = space.generators().to_vec();
        // integrating the written list strips generators from the right, innermost last
        let mut rev = gens.clone();
        rev.reverse();
        let via_integral = a.berezin_integrate(&rev).unwrap();
        let via_derivatives = rev.iter().fold(a.clone(), |acc, &g| acc.left_derivative(g).unwrap());
        prop_assert_eq!(via_integral.clone(), via_derivatives);
        prop_assert_eq!(via_integral.scalar_part(), a.coefficient(space.full_mask()));
    }
}

#[test]
fn norm_of_unit_pair() {
    let s = GeneratorSpace::unprimed(2);
    let e12 = GrassmannNumber::product_of(&s, &[Generator::e(1), Generator::e(2)]).unwrap();
    let x = &GrassmannNumber::one(&s) + &e12;
    assert_eq!(x.norm_sqr(), 2.0);
    assert_eq!(GrassmannNumber::zero(&s).norm(), 0.0);
}
