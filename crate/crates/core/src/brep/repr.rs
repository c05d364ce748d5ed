use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{Generator, GeneratorSpace, GrassmannNumber};
use crate::fock::{coherent_bra, coherent_ket, outer, basis, FockOperator};
use crate::{Error, Result, C64};

/// `B(e, e'*)`: a Grassmann number over `e_1 … e_M, e'*_1 … e'*_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BFunction {
    modes: usize,
    value: GrassmannNumber,
}

impl BFunction {
    pub fn new(modes: usize, value: GrassmannNumber) -> Result<Self> {
        if **value.space() != *GeneratorSpace::b_space(modes) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self { modes, value })
    }

    pub fn zero(modes: usize) -> Self {
        Self {
            modes,
            value: GrassmannNumber::zero(&GeneratorSpace::b_space(modes)),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn value(&self) -> &GrassmannNumber {
        &self.value
    }

    pub fn into_value(self) -> GrassmannNumber {
        self.value
    }

    pub fn space(&self) -> &Arc<GeneratorSpace> {
        self.value.space()
    }

    pub fn is_even(&self) -> bool {
        self.value.is_zero() || self.value.is_even()
    }

    /// Bit of `e_j` (`j` 0-based).
    pub fn e_index(&self, j: usize) -> usize {
        j
    }

    /// Bit of `e'*_j` (`j` 0-based).
    pub fn e_primed_conj_index(&self, j: usize) -> usize {
        self.modes + j
    }
}

impl std::ops::Add for &BFunction {
    type Output = BFunction;
    fn add(self, rhs: &BFunction) -> BFunction {
        BFunction {
            modes: self.modes,
            value: &self.value + &rhs.value,
        }
    }
}

/// `de'*_1 … de'*_M de_M … de_1`, outermost first.
pub fn integration_order(modes: usize) -> Vec<Generator> {
    (1..=modes)
        .map(Generator::e_primed_conj)
        .chain((1..=modes).rev().map(Generator::e))
        .collect()
}

/// The linear map from B coefficients to density-matrix entries, built by
/// Berezin-integrating every B monomial against the coherent dyadic
/// `|e><e'*|`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    modes: usize,
    /// Row `n·2^M + m`, column = B monomial mask.
    map: DMatrix<C64>,
    even_masks: Vec<u32>,
    even_rows: Vec<usize>,
    even_lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Reconstruction {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 || 2 * modes > 16 {
            return Err(Error::Dimension(format!("B representation supports 1..=8 modes, got {modes}")));
        }
        let space = GeneratorSpace::b_space(modes);
        let e: Vec<GrassmannNumber> = (1..=modes)
            .map(|p| GrassmannNumber::generator(&space, Generator::e(p)))
            .collect::<Result<_>>()?;
        let h: Vec<GrassmannNumber> = (1..=modes)
            .map(|p| GrassmannNumber::generator(&space, Generator::e_primed_conj(p)))
            .collect::<Result<_>>()?;
        let dyad = outer(&coherent_ket(&e)?, &coherent_bra(&h)?)?;
        let order = integration_order(modes);
        let dim = 1usize << modes;
        let n_mono = 1usize << (2 * modes);
        let mut map = DMatrix::from_element(dim * dim, n_mono, C64::new(0.0, 0.0));
        for mask in 0..n_mono as u32 {
            let b = GrassmannNumber::monomial(&space, mask, C64::new(1.0, 0.0));
            for n in 0..dim {
                for m in 0..dim {
                    let v = b.try_mul(dyad.entry(n, m))?.berezin_integrate(&order)?;
                    let rest = v.norm_sqr() - v.scalar_part().norm_sqr();
                    if rest > 0.0 {
                        return Err(Error::LeftoverGenerators(rest.sqrt()));
                    }
                    map[(n * dim + m, mask as usize)] = v.scalar_part();
                }
            }
        }
        let even_masks: Vec<u32> = (0..n_mono as u32).filter(|m| m.count_ones() % 2 == 0).collect();
        let even_rows: Vec<usize> = (0..dim * dim)
            .filter(|k| (basis::particle_number(k / dim) + basis::particle_number(k % dim)) % 2 == 0)
            .collect();
        let block = DMatrix::from_fn(even_rows.len(), even_masks.len(), |i, j| {
            map[(even_rows[i], even_masks[j] as usize)]
        });
        let even_lu = block.lu();
        if !even_lu.is_invertible() {
            return Err(Error::Singular("even-sector reconstruction map".into()));
        }
        Ok(Self {
            modes,
            map,
            even_masks,
            even_rows,
            even_lu,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn map(&self) -> &DMatrix<C64> {
        &self.map
    }

    /// `ρ = ∫ B |e><e'*|`.
    pub fn rho_from_b(&self, b: &BFunction) -> Result<FockOperator> {
        if b.modes != self.modes {
            return Err(Error::Dimension("B function and reconstruction differ in modes".into()));
        }
        let dim = 1usize << self.modes;
        let mut rho = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for &(mask, c) in b.value.terms() {
            let col = self.map.column(mask as usize);
            for (k, v) in col.iter().enumerate() {
                if *v != C64::new(0.0, 0.0) {
                    rho[(k / dim, k % dim)] += v * c;
                }
            }
        }
        FockOperator::new(self.modes, rho)
    }

    /// The unique even B with `rho_from_b(B) = ρ`.
    pub fn b_from_rho(&self, rho: &FockOperator) -> Result<BFunction> {
        if rho.modes() != self.modes {
            return Err(Error::Dimension("operator and reconstruction differ in modes".into()));
        }
        let off = rho.off_sector_weight();
        if off > 1e-12 * rho.matrix().norm().max(1.0) {
            return Err(Error::NotNumberConserving(off));
        }
        let dim = 1usize << self.modes;
        let rhs = DVector::from_iterator(
            self.even_rows.len(),
            self.even_rows.iter().map(|&k| rho.entry(k / dim, k % dim)),
        );
        let x = self
            .even_lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("even-sector reconstruction map".into()))?;
        let space = GeneratorSpace::b_space(self.modes);
        let value = GrassmannNumber::from_terms(
            &space,
            self.even_masks.iter().copied().zip(x.iter().copied()),
        );
        let b = BFunction {
            modes: self.modes,
            value,
        };
        let back = self.rho_from_b(&b)?;
        let resid = back.max_abs_diff(rho);
        if resid > 1e-12 * rho.max_abs().max(1.0) {
            return Err(Error::Tolerance(format!("B round trip residual {resid:.3e}")));
        }
        Ok(b)
    }
}

pub fn rho_from_b(b: &BFunction) -> Result<FockOperator> {
    Reconstruction::new(b.modes)?.rho_from_b(b)
}

pub fn b_from_rho(rho: &FockOperator) -> Result<BFunction> {
    Reconstruction::new(rho.modes())?.b_from_rho(rho)
}

/// Operator products expressible as operations on B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correspondence {
    /// `a_j ρ ↔ e_j B`
    AnnihilateLeft(usize),
    /// `a+_j ρ ↔ ∂→_{e_j} B`
    CreateLeft(usize),
    /// `ρ a_j ↔ B ∂←_{e'*_j}`
    AnnihilateRight(usize),
    /// `ρ a+_j ↔ B e'*_j`
    CreateRight(usize),
}

/// Apply one correspondence rule; `j` is 0-based.
pub fn apply_correspondence(b: &BFunction, which: Correspondence) -> Result<BFunction> {
    let m = b.modes;
    let check = |j: usize| {
        if j < m {
            Ok(j)
        } else {
            Err(Error::Dimension(format!("mode {} outside 1..={m}", j + 1)))
        }
    };
    let unit = |bit: usize| GrassmannNumber::monomial(b.space(), 1 << bit, C64::new(1.0, 0.0));
    let value = match which {
        Correspondence::AnnihilateLeft(j) => &unit(check(j)?) * &b.value,
        Correspondence::CreateLeft(j) => b.value.left_derivative_index(check(j)?),
        Correspondence::AnnihilateRight(j) => b.value.right_derivative_index(m + check(j)?),
        Correspondence::CreateRight(j) => &b.value * &unit(m + check(j)?),
    };
    Ok(BFunction { modes: m, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_b_is_zero_operator() {
        let rho = rho_from_b(&BFunction::zero(2)).unwrap();
        assert_eq!(rho, FockOperator::zeros(2));
    }

    #[test]
    fn single_mode_vacuum() {
        let rec = Reconstruction::new(1).unwrap();
        let b = rec.b_from_rho(&FockOperator::projector(1, 0)).unwrap();
        // the vacuum needs the full e_1 e'*_1 monomial
        assert_ne!(b.value().coefficient(0b11), C64::new(0.0, 0.0));
        assert_eq!(rec.rho_from_b(&b).unwrap(), FockOperator::projector(1, 0));
    }

    #[test]
    fn reconstruction_is_a_signed_permutation() {
        for modes in 1..=3 {
            let rec = Reconstruction::new(modes).unwrap();
            let dim = 1usize << modes;
            for (mask, col) in rec.map().column_iter().enumerate() {
                let nz: Vec<(usize, C64)> = col.iter().copied().enumerate().filter(|(_, v)| v.norm() > 0.0).collect();
                assert_eq!(nz.len(), 1);
                let (k, v) = nz[0];
                assert!(v == C64::new(1.0, 0.0) || v == C64::new(-1.0, 0.0));
                // monomial (S, T) feeds entry (complement of S, complement of T)
                let s = mask & (dim - 1);
                let t = mask >> modes;
                let rev = |x: usize| (0..modes).fold(0, |acc, j| acc | (((x >> j) & 1) << (modes - 1 - j)));
                assert_eq!(k / dim, rev(!s & (dim - 1)));
                assert_eq!(k % dim, rev(!t & (dim - 1)));
            }
        }
    }

    #[test]
    fn non_number_conserving_input_is_rejected() {
        let rho = FockOperator::outer(2, 0b01, 0b00);
        assert!(matches!(b_from_rho(&rho), Err(Error::NotNumberConserving(_))));
    }
}
