//! Random Grassmann numbers for property checks.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{GeneratorSpace, GrassmannNumber};
use crate::C64;

/// Which monomials a random number may populate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Any,
    Even,
    Odd,
}

impl Sector {
    fn admits(self, mask: u32) -> bool {
        match self {
            Sector::Any => true,
            Sector::Even => mask.count_ones() % 2 == 0,
            Sector::Odd => mask.count_ones() % 2 == 1,
        }
    }
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Each admissible monomial is populated with probability `density` and a
/// standard complex normal coefficient.
pub fn random_number<R: Rng + ?Sized>(
    space: &Arc<GeneratorSpace>,
    sector: Sector,
    density: f64,
    rng: &mut R,
) -> GrassmannNumber {
    let terms: Vec<(u32, C64)> = (0..=space.full_mask())
        .filter(|&m| sector.admits(m))
        .filter_map(|m| {
            if rng.random::<f64>() < density {
                Some((m, complex_normal(rng)))
            } else {
                None
            }
        })
        .collect();
    GrassmannNumber::from_terms(space, terms)
}

/// A random number restricted to monomials inside `support`.
pub fn random_supported<R: Rng + ?Sized>(
    space: &Arc<GeneratorSpace>,
    support: u32,
    sector: Sector,
    rng: &mut R,
) -> GrassmannNumber {
    let terms: Vec<(u32, C64)> = (0..=space.full_mask())
        .filter(|&m| m & !support == 0 && sector.admits(m))
        .map(|m| (m, complex_normal(rng)))
        .collect();
    GrassmannNumber::from_terms(space, terms)
}
