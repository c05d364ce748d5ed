use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use super::basis;
use crate::{Error, Result, C64};

/// A dense operator on the `2^M`-dimensional Fock space in the
/// Jordan-Wigner basis of [`basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    modes: usize,
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(modes: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << modes;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, {modes} modes need {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { modes, matrix })
    }

    pub fn zeros(modes: usize) -> Self {
        let dim = 1 << modes;
        Self {
            modes,
            matrix: DMatrix::from_element(dim, dim, C64::new(0.0, 0.0)),
        }
    }

    pub fn identity(modes: usize) -> Self {
        let dim = 1 << modes;
        Self {
            modes,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// `|index><index|`.
    pub fn projector(modes: usize, index: usize) -> Self {
        Self::outer(modes, index, index)
    }

    /// `|row><col|`.
    pub fn outer(modes: usize, row: usize, col: usize) -> Self {
        let mut op = Self::zeros(modes);
        op.matrix[(row, col)] = C64::new(1.0, 0.0);
        op
    }

    /// Maximally mixed state `1 / 2^M`.
    pub fn maximally_mixed(modes: usize) -> Self {
        let mut op = Self::identity(modes);
        op.matrix /= C64::new((1usize << modes) as f64, 0.0);
        op
    }

    pub fn annihilation(modes: usize, j: usize) -> Self {
        let mut op = Self::zeros(modes);
        for n in 0..1usize << modes {
            if let Some((s, m)) = basis::annihilate(modes, n, j) {
                op.matrix[(m, n)] = C64::new(s, 0.0);
            }
        }
        op
    }

    pub fn creation(modes: usize, j: usize) -> Self {
        Self::annihilation(modes, j).adjoint()
    }

    /// `a_i† a_j`.
    pub fn hopping_term(modes: usize, i: usize, j: usize) -> Self {
        &Self::creation(modes, i) * &Self::annihilation(modes, j)
    }

    /// `n_j = a_j† a_j`.
    pub fn number(modes: usize, j: usize) -> Self {
        Self::hopping_term(modes, j, j)
    }

    pub fn total_number(modes: usize) -> Self {
        let mut op = Self::zeros(modes);
        for n in 0..1usize << modes {
            op.matrix[(n, n)] = C64::new(basis::particle_number(n) as f64, 0.0);
        }
        op
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            modes: self.modes,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            modes: self.modes,
            matrix: &self.matrix * c,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Frobenius norm of the entries connecting different particle numbers.
    pub fn off_sector_weight(&self) -> f64 {
        let mut acc = 0.0;
        for (j, col) in self.matrix.column_iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                if basis::particle_number(i) != basis::particle_number(j) {
                    acc += v.norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// `‖A − A†‖_F / max(1, ‖A‖_F)`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm() / self.matrix.norm().max(1.0)
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.modes, rhs.modes, "operators act on different mode counts");
        FockOperator {
            modes: self.modes,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.modes, rhs.modes, "operators act on different mode counts");
        FockOperator {
            modes: self.modes,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.modes, rhs.modes, "operators act on different mode counts");
        FockOperator {
            modes: self.modes,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// A ladder pair `(a_j, a_j†)`.
#[derive(Debug, Clone)]
pub struct LadderPair {
    pub annihilation: FockOperator,
    pub creation: FockOperator,
}

/// Jordan-Wigner annihilation and creation operators for modes `1..=M`.
pub fn build_ladder_operators(modes: usize) -> Vec<LadderPair> {
    assert!(modes >= 1, "at least one mode is required");
    (0..modes)
        .map(|j| {
            let annihilation = FockOperator::annihilation(modes, j);
            let creation = annihilation.adjoint();
            LadderPair {
                annihilation,
                creation,
            }
        })
        .collect()
}

/// Random number-conserving density matrix: an independent `A A†` block
/// per particle-number sector, normalized to unit trace.
pub fn random_density<R: rand::Rng + ?Sized>(modes: usize, rng: &mut R) -> FockOperator {
    let dim = 1usize << modes;
    let mut mat = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for n in 0..=modes as u32 {
        let idx: Vec<usize> = (0..dim).filter(|&i| basis::particle_number(i) == n).collect();
        let a = DMatrix::from_fn(idx.len(), idx.len(), |_, _| crate::algebra::random::complex_normal(rng));
        let block = &a * a.adjoint();
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                mat[(r, c)] = block[(i, j)];
            }
        }
    }
    let tr = mat.trace();
    mat /= tr;
    FockOperator { modes, matrix: mat }
}

/// `Tr(ρ · obs)`.
pub fn expectation(rho: &FockOperator, obs: &FockOperator) -> Result<C64> {
    if rho.modes != obs.modes {
        return Err(Error::Dimension(format!(
            "state has {} modes, observable {}",
            rho.modes, obs.modes
        )));
    }
    // Tr(AB) = Σ_ij A_ij B_ji
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            acc += rho.matrix[(i, j)] * obs.matrix[(j, i)];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn single_mode_annihilator() {
        let a = &build_ladder_operators(1)[0].annihilation;
        let expected = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert_eq!(a.matrix(), &expected);
    }

    #[test]
    fn canonical_anticommutation_relations() {
        for modes in 1..=4 {
            let ops = build_ladder_operators(modes);
            let id = FockOperator::identity(modes);
            for (i, oi) in ops.iter().enumerate() {
                for (j, oj) in ops.iter().enumerate() {
                    let mixed = oi.annihilation.anticommutator(&oj.creation);
                    let expected = if i == j { id.clone() } else { FockOperator::zeros(modes) };
                    assert_eq!(mixed, expected, "{{a_{i}, a_{j}†}} at M={modes}");
                    assert_eq!(
                        oi.annihilation.anticommutator(&oj.annihilation),
                        FockOperator::zeros(modes)
                    );
                }
            }
        }
    }

    #[test]
    fn ordering_convention_signs() {
        let ops = build_ladder_operators(2);
        let ket11 = FockOperator::outer(2, 0b11, 0b11);
        let to_vac = |op: &FockOperator| op.entry(0b00, 0b11);
        let _ = ket11;
        // |11> = a1† a2† |00>: a1 a2 |11> = −|00>, a2 a1 |11> = +|00>
        let a1a2 = &ops[0].annihilation * &ops[1].annihilation;
        let a2a1 = &ops[1].annihilation * &ops[0].annihilation;
        assert_eq!(to_vac(&a1a2), c(-1.0));
        assert_eq!(to_vac(&a2a1), c(1.0));
    }

    #[test]
    fn expectations() {
        let vac = FockOperator::projector(2, 0);
        assert_eq!(expectation(&vac, &FockOperator::number(2, 0)).unwrap(), c(0.0));
        let mixed = FockOperator::maximally_mixed(1);
        assert_eq!(expectation(&mixed, &FockOperator::number(1, 0)).unwrap(), c(0.5));
        assert!(expectation(&vac, &FockOperator::identity(1)).is_err());
    }
}
