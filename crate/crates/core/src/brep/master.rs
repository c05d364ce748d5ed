use nalgebra::{DMatrix, DVector};

use super::ode::{dopri5, OdeOptions};
use super::repr::BFunction;
use crate::algebra::{GeneratorSpace, GrassmannNumber};
use crate::model::ModelSpec;
use crate::{Error, Result, C64};

/// Time derivative of B under `dρ/dt = −i[H, ρ]`, in divergence form:
///
/// ```text
/// −i T_pq ∂_p (e_q B) + i T_pq (B e'*_p) ∂←_{q*}
///   + (i/4) V_pqrs ∂_p ∂_q (e_r e_s B) − (i/4) V_pqrs ((B e'*_p e'*_q) ∂←_{r*}) ∂←_{s*}
/// ```
pub fn master_rhs(b: &BFunction, spec: &ModelSpec) -> Result<BFunction> {
    let m = b.modes();
    if spec.modes() != m {
        return Err(Error::Dimension("model and B function differ in modes".into()));
    }
    let space = b.space();
    let unit = |bit: usize| GrassmannNumber::monomial(space, 1 << bit, C64::new(1.0, 0.0));
    let e = |j: usize| unit(j);
    let ep = |j: usize| unit(m + j);
    let x = b.value();
    let t = spec.hopping();
    let v = spec.interaction();
    let i = C64::new(0.0, 1.0);
    let mut acc = GrassmannNumber::zero(space);

    // e_q B and B e'*_p, reused across the sums
    let eq_b: Vec<GrassmannNumber> = (0..m).map(|q| &e(q) * x).collect();
    let b_ep: Vec<GrassmannNumber> = (0..m).map(|p| x * &ep(p)).collect();
    for p in 0..m {
        for q in 0..m {
            let tpq = t[(p, q)];
            if tpq == C64::new(0.0, 0.0) {
                continue;
            }
            acc -= &eq_b[q].left_derivative_index(p).scale(i * tpq);
            acc += &b_ep[p].right_derivative_index(m + q).scale(i * tpq);
        }
    }
    if !v.is_zero() {
        for r in 0..m {
            for s in 0..m {
                let ers_b = &e(r) * &eq_b[s];
                let b_epr = &b_ep[r] * &ep(s);
                for p in 0..m {
                    for q in 0..m {
                        let w = v.get(p, q, r, s);
                        if w != C64::new(0.0, 0.0) {
                            let left = ers_b.left_derivative_index(q).left_derivative_index(p);
                            acc += &left.scale(i * w * 0.25);
                        }
                        let w = v.get(r, s, p, q);
                        if w != C64::new(0.0, 0.0) {
                            let right = b_epr.right_derivative_index(m + p).right_derivative_index(m + q);
                            acc -= &right.scale(i * w * 0.25);
                        }
                    }
                }
            }
        }
    }
    BFunction::new(m, acc)
}

/// `master_rhs` as a dense matrix on the even B coefficients.
#[derive(Debug, Clone)]
pub struct MasterOperator {
    modes: usize,
    masks: Vec<u32>,
    matrix: DMatrix<C64>,
}

impl MasterOperator {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let m = spec.modes();
        let space = GeneratorSpace::b_space(m);
        let masks: Vec<u32> = (0..1u32 << (2 * m)).filter(|x| x.count_ones() % 2 == 0).collect();
        let pos = |mask: u32| masks.binary_search(&mask);
        let mut matrix = DMatrix::from_element(masks.len(), masks.len(), C64::new(0.0, 0.0));
        for (col, &mask) in masks.iter().enumerate() {
            let b = BFunction::new(m, GrassmannNumber::monomial(&space, mask, C64::new(1.0, 0.0)))?;
            for &(out, c) in master_rhs(&b, spec)?.value().terms() {
                let row = pos(out).map_err(|_| Error::Parity("master equation left the even sector".into()))?;
                matrix[(row, col)] = c;
            }
        }
        Ok(Self { modes: m, masks, matrix })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn to_vector(&self, b: &BFunction) -> Result<DVector<C64>> {
        if !b.is_even() {
            return Err(Error::Parity("B must be even".into()));
        }
        Ok(DVector::from_iterator(
            self.masks.len(),
            self.masks.iter().map(|&mk| b.value().coefficient(mk)),
        ))
    }

    pub fn from_vector(&self, y: &DVector<C64>) -> BFunction {
        let space = GeneratorSpace::b_space(self.modes);
        let value = GrassmannNumber::from_terms(&space, self.masks.iter().copied().zip(y.iter().copied()));
        BFunction::new(self.modes, value).expect("B space by construction")
    }
}

/// Integrate the master equation from `B(0) = b0` to every time of the
/// model's grid.
pub fn propagate_b(b0: &BFunction, spec: &ModelSpec) -> Result<Vec<BFunction>> {
    let op = MasterOperator::new(spec)?;
    let y0 = op.to_vector(b0)?;
    let l = op.matrix.clone();
    let (ys, _) = dopri5(|_, y| &l * y, 0.0, &y0, spec.times(), OdeOptions::default())?;
    Ok(ys.iter().map(|y| op.from_vector(y)).collect())
}
