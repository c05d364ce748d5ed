use nalgebra::DMatrix;

use super::step::{Mat, PropagatorPair};
use crate::algebra::{Generator, GrassmannNumber};
use crate::brep::{integration_order, rho_from_b, BFunction};
use crate::fock::{basis, dyadic, FockOperator};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Fock-space lift `Γ(M)` of a one-body propagator: `Γ(M)|n> = Π b_q†|0>`
/// with `b_q† = Σ_p M_pq a_p†`, stored column-major.
pub(crate) fn lift_into(m: &Mat, out: &mut [C64]) {
    let modes = m.n;
    let dim = 1usize << modes;
    out[..dim * dim].fill(ZERO);
    out[0] = C64::new(1.0, 0.0);
    for col in 1..dim {
        // lowest occupied mode sits in the highest set bit
        let q = modes - 1 - (usize::BITS - 1 - col.leading_zeros()) as usize;
        let rest = col ^ basis::mode_bit(modes, q);
        for p in 0..modes {
            let w = m.get(p, q);
            for src in 0..dim {
                let v = out[rest * dim + src];
                if v == ZERO {
                    continue;
                }
                if let Some((s, dst)) = basis::create(modes, src, p) {
                    out[col * dim + dst] += w * v * s;
                }
            }
        }
    }
}

/// `Γ(M)` as a Fock operator.
pub fn second_quantize(m: &DMatrix<C64>) -> Result<FockOperator> {
    let modes = m.nrows();
    if m.ncols() != modes || modes == 0 || modes > super::step::MAX_MODES {
        return Err(Error::Dimension("propagator must be square with 1..=8 modes".into()));
    }
    let dim = 1usize << modes;
    let mut buf = vec![ZERO; dim * dim];
    lift_into(&Mat::from_dmatrix(m), &mut buf);
    FockOperator::new(modes, DMatrix::from_column_slice(dim, dim, &buf))
}

/// Sparse initial density used by the per-trajectory kernel.
#[derive(Debug, Clone)]
pub struct RhoKernel {
    modes: usize,
    nonzero: Vec<(usize, usize, C64)>,
}

impl RhoKernel {
    pub fn new(rho0: &FockOperator) -> Self {
        let dim = rho0.dim();
        let mut nonzero = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                let v = rho0.entry(a, b);
                if v != ZERO {
                    nonzero.push((a, b, v));
                }
            }
        }
        Self {
            modes: rho0.modes(),
            nonzero,
        }
    }

    /// Kernel for the density reconstructed from `B0`.
    pub fn from_b(b0: &BFunction) -> Result<Self> {
        Ok(Self::new(&rho_from_b(b0)?))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `ρ_traj = Γ(Mu) ρ0 Γ(Mp)†`, row-major into `out`.
    pub(crate) fn rho_into(&self, gu: &[C64], gp: &[C64], out: &mut [C64]) {
        let dim = 1usize << self.modes;
        out[..dim * dim].fill(ZERO);
        for &(a, b, v) in &self.nonzero {
            let ucol = &gu[a * dim..(a + 1) * dim];
            let pcol = &gp[b * dim..(b + 1) * dim];
            for (i, &u) in ucol.iter().enumerate() {
                if u == ZERO {
                    continue;
                }
                let uv = u * v;
                let row = &mut out[i * dim..(i + 1) * dim];
                for (r, &p) in row.iter_mut().zip(pcol) {
                    *r += uv * p.conj();
                }
            }
        }
    }

    /// Single-trajectory density at one time point.
    pub fn trajectory_rho(&self, pair: &PropagatorPair) -> Result<FockOperator> {
        let m = self.modes;
        if pair.mu.nrows() != m || pair.mp.nrows() != m {
            return Err(Error::Dimension("propagator size does not match the density".into()));
        }
        let dim = 1usize << m;
        let (mut gu, mut gp, mut out) = (vec![ZERO; dim * dim], vec![ZERO; dim * dim], vec![ZERO; dim * dim]);
        lift_into(&Mat::from_dmatrix(&pair.mu), &mut gu);
        lift_into(&Mat::from_dmatrix(&pair.mp), &mut gp);
        self.rho_into(&gu, &gp, &mut out);
        FockOperator::new(m, DMatrix::from_row_slice(dim, dim, &out))
    }
}

/// The same single-trajectory density by Berezin integration of `B0` against
/// the coherent dyadic `|Mu e><(Mp e')*|`. Slow; used as a cross-check.
pub fn trajectory_rho_berezin(b0: &BFunction, pair: &PropagatorPair) -> Result<FockOperator> {
    let m = b0.modes();
    let space = b0.space();
    let mut g = Vec::with_capacity(m);
    let mut h = Vec::with_capacity(m);
    for p in 0..m {
        let mut gp = GrassmannNumber::zero(space);
        let mut hp = GrassmannNumber::zero(space);
        for q in 0..m {
            gp += &(GrassmannNumber::generator(space, Generator::e(q + 1))? * pair.mu[(p, q)]);
            hp += &(GrassmannNumber::generator(space, Generator::e_primed_conj(q + 1))? * pair.mp[(p, q)].conj());
        }
        g.push(gp);
        h.push(hp);
    }
    dyadic(&g, &h)?.collapse(b0.value(), &integration_order(m))
}

/// Running first and second moments of `(Re x, Im x, Re y, Im y)` where
/// `x = Tr(ρ O)` and `y = Tr(ρ)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct JointMoments {
    pub sum: [f64; 4],
    pub cross: [[f64; 4]; 4],
}

impl JointMoments {
    pub fn push(&mut self, x: C64, y: C64) {
        let v = [x.re, x.im, y.re, y.im];
        for i in 0..4 {
            self.sum[i] += v[i];
            for j in 0..4 {
                self.cross[i][j] += v[i] * v[j];
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for i in 0..4 {
            self.sum[i] += other.sum[i];
            for j in 0..4 {
                self.cross[i][j] += other.cross[i][j];
            }
        }
    }
}

/// Streaming statistics of the per-trajectory densities at one time point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TimeAccumulator {
    pub n: usize,
    pub rho_sum: Vec<C64>,
    pub rho_sq: Vec<(f64, f64)>,
    pub observables: Vec<JointMoments>,
}

impl TimeAccumulator {
    pub fn new(modes: usize, n_obs: usize) -> Self {
        let d2 = 1usize << (2 * modes);
        Self {
            n: 0,
            rho_sum: vec![ZERO; d2],
            rho_sq: vec![(0.0, 0.0); d2],
            observables: vec![JointMoments::default(); n_obs],
        }
    }

    /// Add one trajectory's row-major density.
    pub fn push(&mut self, rho: &[C64], observables: &[FockOperator]) {
        let dim = (self.rho_sum.len() as f64).sqrt() as usize;
        self.n += 1;
        let mut tr = ZERO;
        for i in 0..dim {
            tr += rho[i * dim + i];
        }
        for ((s, q), &r) in self.rho_sum.iter_mut().zip(&mut self.rho_sq).zip(rho) {
            *s += r;
            q.0 += r.re * r.re;
            q.1 += r.im * r.im;
        }
        for (mom, o) in self.observables.iter_mut().zip(observables) {
            let om = o.matrix();
            let mut x = ZERO;
            for i in 0..dim {
                for j in 0..dim {
                    let oji = om[(j, i)];
                    if oji != ZERO {
                        x += rho[i * dim + j] * oji;
                    }
                }
            }
            mom.push(x, tr);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        for (a, b) in self.rho_sum.iter_mut().zip(&other.rho_sum) {
            *a += b;
        }
        for (a, b) in self.rho_sq.iter_mut().zip(&other.rho_sq) {
            a.0 += b.0;
            a.1 += b.1;
        }
        for (a, b) in self.observables.iter_mut().zip(&other.observables) {
            a.merge(b);
        }
    }

    pub fn rho_estimate(&self, modes: usize, time: f64) -> Result<RhoEstimate> {
        let dim = 1usize << modes;
        let n = self.n as f64;
        if self.n < 2 {
            return Err(Error::Dimension("need at least two converged trajectories".into()));
        }
        let mean: Vec<C64> = self.rho_sum.iter().map(|s| s / n).collect();
        let se = |sq: f64, m: f64| ((sq / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt();
        let se_re: Vec<f64> = self.rho_sq.iter().zip(&mean).map(|(q, m)| se(q.0, m.re)).collect();
        let se_im: Vec<f64> = self.rho_sq.iter().zip(&mean).map(|(q, m)| se(q.1, m.im)).collect();
        Ok(RhoEstimate {
            time,
            n_used: self.n,
            mean: FockOperator::new(modes, DMatrix::from_row_slice(dim, dim, &mean))?,
            se_re: DMatrix::from_row_slice(dim, dim, &se_re),
            se_im: DMatrix::from_row_slice(dim, dim, &se_im),
        })
    }

    pub fn observable_estimate(&self, index: usize, time: f64) -> Result<ObservableEstimate> {
        let mom = self
            .observables
            .get(index)
            .ok_or_else(|| Error::Dimension(format!("no observable {index}")))?;
        if self.n < 2 {
            return Err(Error::Dimension("need at least two converged trajectories".into()));
        }
        let n = self.n as f64;
        let mean: Vec<f64> = mom.sum.iter().map(|s| s / n).collect();
        let mut cov = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] = (mom.cross[i][j] / n - mean[i] * mean[j]) * n / (n - 1.0);
            }
        }
        let var = |c: [f64; 4]| {
            let mut v = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    v += c[i] * cov[i][j] * c[j];
                }
            }
            (v.max(0.0) / n).sqrt()
        };
        let raw = C64::new(mean[0], mean[1]);
        let trace = C64::new(mean[2], mean[3]);
        let raw_se = C64::new(var([1.0, 0.0, 0.0, 0.0]), var([0.0, 1.0, 0.0, 0.0]));
        let trace_se = C64::new(var([0.0, 0.0, 1.0, 0.0]), var([0.0, 0.0, 0.0, 1.0]));
        let ratio = raw / trace;
        // linearization z = (x - R y) / <y>
        let (a, b) = (ratio.re, ratio.im);
        let w = C64::new(1.0, 0.0) / trace;
        let u_re = [1.0, 0.0, -a, b];
        let u_im = [0.0, 1.0, -b, -a];
        let mut z_re = [0.0; 4];
        let mut z_im = [0.0; 4];
        for i in 0..4 {
            z_re[i] = w.re * u_re[i] - w.im * u_im[i];
            z_im[i] = w.re * u_im[i] + w.im * u_re[i];
        }
        let ratio_se = C64::new(var(z_re), var(z_im));
        let unreliable = !(trace.norm() > 5.0 * trace_se.norm()) || !ratio.re.is_finite();
        Ok(ObservableEstimate {
            time,
            n_used: self.n,
            raw,
            raw_se,
            trace,
            trace_se,
            ratio,
            ratio_se,
            ratio_unreliable: unreliable,
        })
    }
}

/// Ensemble mean of the reconstructed density with per-entry standard errors
/// of the real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEstimate {
    pub time: f64,
    pub n_used: usize,
    pub mean: FockOperator,
    pub se_re: DMatrix<f64>,
    pub se_im: DMatrix<f64>,
}

/// Expectation value estimate at one time. Standard errors pack the real
/// and imaginary parts into one complex number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableEstimate {
    pub time: f64,
    pub n_used: usize,
    /// `E[Tr(ρ_traj O)]`
    pub raw: C64,
    pub raw_se: C64,
    /// `E[Tr ρ_traj]`
    pub trace: C64,
    pub trace_se: C64,
    /// `E[Tr(ρ_traj O)] / E[Tr ρ_traj]`
    pub ratio: C64,
    pub ratio_se: C64,
    /// The trace estimate is within five standard errors of zero.
    pub ratio_unreliable: bool,
}

impl ObservableEstimate {
    /// Largest deviation of the raw estimate from `exact`, in standard errors.
    pub fn raw_z(&self, exact: C64) -> f64 {
        z(self.raw - exact, self.raw_se)
    }

    pub fn ratio_z(&self, exact: C64) -> f64 {
        z(self.ratio - exact, self.ratio_se)
    }
}

fn z(d: C64, se: C64) -> f64 {
    let part = |d: f64, s: f64| if d == 0.0 { 0.0 } else { d.abs() / s };
    part(d.re, se.re).max(part(d.im, se.im))
}
