use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// The four generator families used by the B representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `e_j`
    Unprimed,
    /// `e*_j`
    UnprimedConj,
    /// `e'_j`
    Primed,
    /// `e'*_j`
    PrimedConj,
}

impl Family {
    /// Partner family under complex conjugation.
    pub fn conjugate(self) -> Family {
        match self {
            Family::Unprimed => Family::UnprimedConj,
            Family::UnprimedConj => Family::Unprimed,
            Family::Primed => Family::PrimedConj,
            Family::PrimedConj => Family::Primed,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Family::Unprimed => "e",
            Family::UnprimedConj => "e*",
            Family::Primed => "e'",
            Family::PrimedConj => "e'*",
        }
    }
}

/// One named generator: a family and a 1-based mode index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub family: Family,
    pub mode: usize,
}

impl Generator {
    pub fn new(family: Family, mode: usize) -> Self {
        Self { family, mode }
    }

    pub fn e(mode: usize) -> Self {
        Self::new(Family::Unprimed, mode)
    }

    pub fn e_conj(mode: usize) -> Self {
        Self::new(Family::UnprimedConj, mode)
    }

    pub fn e_primed(mode: usize) -> Self {
        Self::new(Family::Primed, mode)
    }

    pub fn e_primed_conj(mode: usize) -> Self {
        Self::new(Family::PrimedConj, mode)
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.family.conjugate(), self.mode)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.label(), self.mode)
    }
}

/// Maximum number of generators; monomials are `u32` bitmasks.
pub const MAX_GENERATORS: usize = 32;

/// An ordered set of generators. Bit `i` of a monomial mask refers to
/// `generators[i]`, and the canonical monomial is the product taken in
/// increasing bit order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneratorSpace {
    generators: Vec<Generator>,
    conjugate_index: Vec<Option<usize>>,
}

impl GeneratorSpace {
    pub fn new(generators: Vec<Generator>) -> Result<Arc<Self>> {
        if generators.len() > MAX_GENERATORS {
            return Err(Error::Dimension(format!(
                "{} generators exceed the limit of {MAX_GENERATORS}",
                generators.len()
            )));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.mode == 0 {
                return Err(Error::UnknownGenerator(format!("{g} (modes are 1-based)")));
            }
            if generators[..i].contains(g) {
                return Err(Error::RepeatedGenerator(g.to_string()));
            }
        }
        let conjugate_index = generators
            .iter()
            .map(|g| generators.iter().position(|h| *h == g.conjugate()))
            .collect();
        Ok(Arc::new(Self {
            generators,
            conjugate_index,
        }))
    }

    /// `e_1 … e_n` only.
    pub fn unprimed(n: usize) -> Arc<Self> {
        Self::from_families(n, &[Family::Unprimed])
    }

    /// `e_1 … e_M, e'*_1 … e'*_M`: the variables of a B function.
    pub fn b_space(modes: usize) -> Arc<Self> {
        Self::from_families(modes, &[Family::Unprimed, Family::PrimedConj])
    }

    /// `e, e*, e', e'*` for every mode, in that family order.
    pub fn full(modes: usize) -> Arc<Self> {
        Self::from_families(
            modes,
            &[
                Family::Unprimed,
                Family::UnprimedConj,
                Family::Primed,
                Family::PrimedConj,
            ],
        )
    }

    /// Family-major space: all modes of the first family, then the next.
    pub fn from_families(modes: usize, families: &[Family]) -> Arc<Self> {
        let gens = families
            .iter()
            .flat_map(|&f| (1..=modes).map(move |m| Generator::new(f, m)))
            .collect();
        Self::new(gens).expect("family-major spaces are well formed")
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, index: usize) -> Generator {
        self.generators[index]
    }

    pub fn index_of(&self, g: Generator) -> Result<usize> {
        self.generators
            .iter()
            .position(|h| *h == g)
            .ok_or_else(|| Error::UnknownGenerator(g.to_string()))
    }

    /// Bit index of the conjugate partner of generator `index`.
    pub fn conjugate_of(&self, index: usize) -> Option<usize> {
        self.conjugate_index[index]
    }

    /// Mask with every generator set.
    pub fn full_mask(&self) -> u32 {
        if self.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.len()) - 1
        }
    }

    /// Mask of the generators belonging to `family`.
    pub fn family_mask(&self, family: Family) -> u32 {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.family == family)
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn monomial_mask(&self, gens: &[Generator]) -> Result<u32> {
        let mut mask = 0u32;
        for &g in gens {
            let bit = 1u32 << self.index_of(g)?;
            if mask & bit != 0 {
                return Err(Error::RepeatedGenerator(g.to_string()));
            }
            mask |= bit;
        }
        Ok(mask)
    }

    pub(crate) fn render_monomial(&self, mask: u32) -> String {
        if mask == 0 {
            return "1".to_string();
        }
        bits(mask)
            .map(|i| self.generators[i].to_string())
            .collect::<Vec<_>>()
            .join("")
    }
}

/// Iterate the set bit positions of a mask in increasing order.
pub fn bits(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Sign of the canonical product `e_S · e_T`: `(-1)^k` where `k` counts the
/// pairs `(i in S, j in T)` with `i > j`. Only meaningful for disjoint masks.
#[inline]
pub fn product_sign(s: u32, t: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = t;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 31 { 0 } else { s >> (j + 1) };
        swaps += above.count_ones();
    }
    if swaps & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of the permutation that sorts `seq` (distinct entries).
pub fn permutation_sign(seq: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
