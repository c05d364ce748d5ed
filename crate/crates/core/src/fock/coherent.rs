//! Fock vectors and dyadics with Grassmann-valued amplitudes.
//!
//! Every object is stored with its Grassmann coefficients written to the
//! left of the Fock part: a ket is `Σ c_n |n>`, a bra `Σ d_m <m|` and a
//! dyadic `Σ F_nm |n><m|`. Moving a Grassmann number `x` across a Fock
//! piece of parity `π` (occupation parity of `|n>`, `<m|` or `|n><m|`)
//! replaces it by its involution `π` times.

use std::sync::Arc;

use super::{basis, FockOperator};
use crate::algebra::{GeneratorSpace, GrassmannNumber};
use crate::{Error, Result, C64};

#[inline]
fn odd_index(n: usize) -> bool {
    basis::particle_number(n) % 2 == 1
}

#[inline]
fn twist(x: &GrassmannNumber, odd: bool) -> GrassmannNumber {
    if odd {
        x.involute()
    } else {
        x.clone()
    }
}

fn check_odd(values: &[GrassmannNumber], what: &str) -> Result<Arc<GeneratorSpace>> {
    let first = values
        .first()
        .ok_or_else(|| Error::Dimension(format!("{what}: at least one mode is required")))?;
    let space = Arc::clone(first.space());
    for (p, g) in values.iter().enumerate() {
        if !g.same_space(first) {
            return Err(Error::SpaceMismatch);
        }
        if !g.is_zero() && !g.is_odd() {
            return Err(Error::Parity(format!("{what}: component {} is not odd", p + 1)));
        }
    }
    Ok(space)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Ket,
    Bra,
}

/// A ket or bra with `2^M` Grassmann amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannFockVector {
    modes: usize,
    side: Side,
    amplitudes: Vec<GrassmannNumber>,
}

impl GrassmannFockVector {
    pub fn from_amplitudes(modes: usize, side: Side, amplitudes: Vec<GrassmannNumber>) -> Result<Self> {
        if amplitudes.len() != 1 << modes {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {modes} modes",
                amplitudes.len()
            )));
        }
        if amplitudes.windows(2).any(|w| !w[0].same_space(&w[1])) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self {
            modes,
            side,
            amplitudes,
        })
    }

    pub fn vacuum(modes: usize, side: Side, space: &Arc<GeneratorSpace>) -> Self {
        let mut amplitudes = vec![GrassmannNumber::zero(space); 1 << modes];
        amplitudes[0] = GrassmannNumber::one(space);
        Self {
            modes,
            side,
            amplitudes,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn space(&self) -> &Arc<GeneratorSpace> {
        self.amplitudes[0].space()
    }

    pub fn amplitudes(&self) -> &[GrassmannNumber] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> &GrassmannNumber {
        &self.amplitudes[n]
    }

    fn map(&self, f: impl Fn(usize, &GrassmannNumber) -> GrassmannNumber) -> Self {
        Self {
            modes: self.modes,
            side: self.side,
            amplitudes: self.amplitudes.iter().enumerate().map(|(n, c)| f(n, c)).collect(),
        }
    }

    /// `A|ψ>` for a ket, `<ψ|A` for a bra.
    pub fn apply(&self, op: &FockOperator) -> Result<Self> {
        if op.modes() != self.modes {
            return Err(Error::Dimension("operator and vector mode counts differ".into()));
        }
        let dim = 1 << self.modes;
        let zero = GrassmannNumber::zero(self.space());
        let mut out = vec![zero; dim];
        for k in 0..dim {
            for n in 0..dim {
                match self.side {
                    Side::Ket => {
                        let a = op.entry(k, n);
                        if a != C64::new(0.0, 0.0) {
                            let c = twist(&self.amplitudes[n], odd_index(k) != odd_index(n));
                            out[k] += &c.scale(a);
                        }
                    }
                    Side::Bra => {
                        let a = op.entry(n, k);
                        if a != C64::new(0.0, 0.0) {
                            out[k] += &self.amplitudes[n].scale(a);
                        }
                    }
                }
            }
        }
        Ok(Self {
            modes: self.modes,
            side: self.side,
            amplitudes: out,
        })
    }

    /// `x · ψ`.
    pub fn left_mul(&self, x: &GrassmannNumber) -> Self {
        self.map(|_, c| x * c)
    }

    /// `ψ · x`.
    pub fn right_mul(&self, x: &GrassmannNumber) -> Self {
        self.map(|n, c| c * &twist(x, odd_index(n)))
    }

    /// Formal left derivative acting on the whole vector.
    pub fn left_derivative(&self, index: usize) -> Self {
        self.map(|_, c| c.left_derivative_index(index))
    }

    /// Formal right derivative acting on the whole vector.
    pub fn right_derivative(&self, index: usize) -> Self {
        self.map(|n, c| {
            let d = c.right_derivative_index(index);
            if odd_index(n) {
                -d
            } else {
                d
            }
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|_, c| c.scale(s))
    }

    /// Hermitian conjugate: `(c|n>)† = <n|c*`.
    pub fn dagger(&self) -> Result<Self> {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| Ok(twist(&c.conjugate()?, odd_index(n))))
            .collect::<Result<_>>()?;
        Ok(Self {
            modes: self.modes,
            side: match self.side {
                Side::Ket => Side::Bra,
                Side::Bra => Side::Ket,
            },
            amplitudes,
        })
    }

    /// `<bra|ket>`.
    pub fn overlap(bra: &Self, ket: &Self) -> Result<GrassmannNumber> {
        if bra.side != Side::Bra || ket.side != Side::Ket || bra.modes != ket.modes {
            return Err(Error::Dimension("overlap needs a bra and a ket of equal size".into()));
        }
        let mut acc = GrassmannNumber::zero(bra.space());
        for (n, (d, c)) in bra.amplitudes.iter().zip(&ket.amplitudes).enumerate() {
            acc += &d.try_mul(&twist(c, odd_index(n)))?;
        }
        Ok(acc)
    }

    /// Largest amplitude distance to `other`.
    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in self.amplitudes.iter().zip(&other.amplitudes) {
            worst = worst.max(a.distance(b)?);
        }
        Ok(worst)
    }
}

impl std::ops::Sub for &GrassmannFockVector {
    type Output = GrassmannFockVector;
    fn sub(self, rhs: &GrassmannFockVector) -> GrassmannFockVector {
        assert_eq!(self.side, rhs.side);
        self.map(|n, c| c - &rhs.amplitudes[n])
    }
}

/// `|g> = Π_p (1 − g_p a+_p) |0>` for odd `g_p`.
pub fn coherent_ket(g: &[GrassmannNumber]) -> Result<GrassmannFockVector> {
    let space = check_odd(g, "coherent ket")?;
    let modes = g.len();
    let mut psi = GrassmannFockVector::vacuum(modes, Side::Ket, &space);
    for (p, gp) in g.iter().enumerate() {
        let raised = psi.apply(&FockOperator::creation(modes, p))?;
        psi = &psi - &raised.left_mul(gp);
    }
    Ok(psi)
}

/// `<h| = <0| Π_p (1 − a_p h_p)` for odd `h_p`; with `h = g'*` this is the
/// Hermitian conjugate of `|g'>`.
pub fn coherent_bra(h: &[GrassmannNumber]) -> Result<GrassmannFockVector> {
    let space = check_odd(h, "coherent bra")?;
    let modes = h.len();
    let mut psi = GrassmannFockVector::vacuum(modes, Side::Bra, &space);
    for (p, hp) in h.iter().enumerate() {
        let lowered = psi.apply(&FockOperator::annihilation(modes, p))?;
        psi = &psi - &lowered.right_mul(hp);
    }
    Ok(psi)
}

/// Operator-valued Grassmann matrix `Σ F_nm |n><m|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannDyadic {
    modes: usize,
    entries: Vec<GrassmannNumber>,
}

impl GrassmannDyadic {
    pub fn modes(&self) -> usize {
        self.modes
    }

    fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn entry(&self, n: usize, m: usize) -> &GrassmannNumber {
        &self.entries[n * self.dim() + m]
    }

    fn map(&self, f: impl Fn(usize, usize, &GrassmannNumber) -> GrassmannNumber) -> Self {
        let dim = self.dim();
        Self {
            modes: self.modes,
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(k, x)| f(k / dim, k % dim, x))
                .collect(),
        }
    }

    /// `A · D`.
    pub fn apply_left(&self, op: &FockOperator) -> Self {
        let dim = self.dim();
        let space = self.entries[0].space();
        let mut out = vec![GrassmannNumber::zero(space); dim * dim];
        for k in 0..dim {
            for n in 0..dim {
                let a = op.entry(k, n);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let flip = odd_index(k) != odd_index(n);
                for m in 0..dim {
                    out[k * dim + m] += &twist(self.entry(n, m), flip).scale(a);
                }
            }
        }
        Self {
            modes: self.modes,
            entries: out,
        }
    }

    /// `D · A`.
    pub fn apply_right(&self, op: &FockOperator) -> Self {
        let dim = self.dim();
        let space = self.entries[0].space();
        let mut out = vec![GrassmannNumber::zero(space); dim * dim];
        for n in 0..dim {
            for m in 0..dim {
                for k in 0..dim {
                    let a = op.entry(m, k);
                    if a != C64::new(0.0, 0.0) {
                        out[n * dim + k] += &self.entry(n, m).scale(a);
                    }
                }
            }
        }
        Self {
            modes: self.modes,
            entries: out,
        }
    }

    pub fn left_mul(&self, x: &GrassmannNumber) -> Self {
        self.map(|_, _, f| x * f)
    }

    pub fn right_mul(&self, x: &GrassmannNumber) -> Self {
        self.map(|n, m, f| f * &twist(x, odd_index(n) != odd_index(m)))
    }

    pub fn left_derivative(&self, index: usize) -> Self {
        self.map(|_, _, f| f.left_derivative_index(index))
    }

    pub fn right_derivative(&self, index: usize) -> Self {
        self.map(|n, m, f| {
            let d = f.right_derivative_index(index);
            if odd_index(n) != odd_index(m) {
                -d
            } else {
                d
            }
        })
    }

    /// `Σ_nm (∫ w F_nm) |n><m|`, with `∫` the Berezin integral over `gens`.
    /// Fails if generator content survives the integration.
    pub fn collapse(&self, weight: &GrassmannNumber, gens: &[crate::algebra::Generator]) -> Result<FockOperator> {
        let dim = self.dim();
        let mut mat = nalgebra::DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for n in 0..dim {
            for m in 0..dim {
                let integrand = weight.try_mul(self.entry(n, m))?;
                let v = integrand.berezin_integrate(gens)?;
                let rest = v.norm_sqr() - v.scalar_part().norm_sqr();
                if rest > 0.0 {
                    return Err(Error::LeftoverGenerators(rest.sqrt()));
                }
                mat[(n, m)] = v.scalar_part();
            }
        }
        FockOperator::new(self.modes, mat)
    }

    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            worst = worst.max(a.distance(b)?);
        }
        Ok(worst)
    }
}

/// `|ψ><φ|` for a ket and a bra.
pub fn outer(ket: &GrassmannFockVector, bra: &GrassmannFockVector) -> Result<GrassmannDyadic> {
    if ket.side != Side::Ket || bra.side != Side::Bra || ket.modes != bra.modes {
        return Err(Error::Dimension("outer product needs a ket and a bra of equal size".into()));
    }
    let mut entries = Vec::with_capacity(1 << (2 * ket.modes));
    for (n, c) in ket.amplitudes.iter().enumerate() {
        for d in &bra.amplitudes {
            entries.push(c.try_mul(&twist(d, odd_index(n)))?);
        }
    }
    Ok(GrassmannDyadic {
        modes: ket.modes,
        entries,
    })
}

/// `|g><h|` with `h` the already conjugated bra label (`h = g'*`).
pub fn dyadic(g: &[GrassmannNumber], h: &[GrassmannNumber]) -> Result<GrassmannDyadic> {
    outer(&coherent_ket(g)?, &coherent_bra(h)?)
}
