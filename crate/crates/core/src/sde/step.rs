use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::decomp::{decompose_potential, drift_matrix, ito_correction, noise_matrices, PairDecomposition};
use crate::model::ModelSpec;
use crate::{Error, Result, C64};

/// Largest mode count handled by the inline kernels.
pub const MAX_MODES: usize = 8;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Heun predictor-corrector on the Stratonovich equation.
    StratonovichHeun,
    /// Euler-Maruyama on the Ito equation.
    ItoEuler,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::StratonovichHeun => "stratonovich-heun",
            Scheme::ItoEuler => "ito-euler",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stratonovich-heun" | "stratonovich" | "heun" => Ok(Scheme::StratonovichHeun),
            "ito-euler" | "ito" => Ok(Scheme::ItoEuler),
            _ => Err(Error::InvalidModel {
                field: "scheme".into(),
                reason: format!("unknown scheme {s:?}"),
            }),
        }
    }
}

/// Row-major square matrix stored inline; only the leading `n × n` block is used.
#[derive(Clone, Copy)]
pub(crate) struct Mat {
    pub n: usize,
    pub a: [C64; MAX_MODES * MAX_MODES],
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dmatrix())
    }
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: [ZERO; MAX_MODES * MAX_MODES],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_dmatrix(d: &DMatrix<C64>) -> Self {
        let n = d.nrows();
        let mut m = Self::zeros(n);
        for p in 0..n {
            for q in 0..n {
                m.a[p * n + q] = d[(p, q)];
            }
        }
        m
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |p, q| self.a[p * self.n + q])
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.a[p * self.n + q]
    }

    pub fn is_finite_below(&self, bound: f64) -> bool {
        self.a[..self.n * self.n]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite() && c.norm_sqr() < bound * bound)
    }
}

/// `out = g · x`, summing over the inner index in increasing order.
#[inline]
pub(crate) fn mul_into(g: &Mat, x: &Mat, out: &mut Mat) {
    let n = g.n;
    for p in 0..n {
        for q in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += g.a[p * n + k] * x.a[k * n + q];
            }
            out.a[p * n + q] = acc;
        }
    }
}

/// Coefficients of one linear SDE `dM = (A dt + Σ_γ B^γ dW_γ) M`.
#[derive(Debug, Clone)]
pub struct SdeSystem {
    modes: usize,
    decomposition: PairDecomposition,
    drift: DMatrix<C64>,
    ito_drift: DMatrix<C64>,
    noises: Vec<DMatrix<C64>>,
    drift_k: Mat,
    ito_drift_k: Mat,
    noises_k: Vec<Mat>,
}

impl SdeSystem {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let modes = spec.modes();
        if modes > MAX_MODES {
            return Err(Error::Dimension(format!("at most {MAX_MODES} modes")));
        }
        let decomposition = decompose_potential(spec.interaction())?;
        let drift = drift_matrix(spec.hopping(), spec.interaction());
        let noises = noise_matrices(&decomposition);
        let ito_drift = &drift + ito_correction(&noises, modes);
        Ok(Self {
            modes,
            drift_k: Mat::from_dmatrix(&drift),
            ito_drift_k: Mat::from_dmatrix(&ito_drift),
            noises_k: noises.iter().map(Mat::from_dmatrix).collect(),
            decomposition,
            drift,
            ito_drift,
            noises,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn channels(&self) -> usize {
        self.noises.len()
    }

    pub fn decomposition(&self) -> &PairDecomposition {
        &self.decomposition
    }

    /// Stratonovich drift generator.
    pub fn drift(&self) -> &DMatrix<C64> {
        &self.drift
    }

    /// Ito drift generator, drift plus `½ Σ_γ (B^γ)²`.
    pub fn ito_drift(&self) -> &DMatrix<C64> {
        &self.ito_drift
    }

    pub fn noises(&self) -> &[DMatrix<C64>] {
        &self.noises
    }

    /// Increment generator `G = A dt + Σ_γ B^γ dW_γ`, with the drift chosen by scheme.
    pub(crate) fn increment(&self, scheme: Scheme, dt: f64, dw: &[f64], out: &mut Mat) {
        let a = match scheme {
            Scheme::StratonovichHeun => &self.drift_k,
            Scheme::ItoEuler => &self.ito_drift_k,
        };
        let nn = self.modes * self.modes;
        out.n = self.modes;
        for i in 0..nn {
            out.a[i] = a.a[i] * dt;
        }
        for (b, &w) in self.noises_k.iter().zip(dw) {
            for i in 0..nn {
                out.a[i] += b.a[i] * w;
            }
        }
    }

    pub fn increment_matrix(&self, scheme: Scheme, dt: f64, dw: &[f64]) -> Result<DMatrix<C64>> {
        if dw.len() != self.channels() {
            return Err(Error::Dimension(format!(
                "{} increments for {} channels",
                dw.len(),
                self.channels()
            )));
        }
        let mut g = Mat::zeros(self.modes);
        self.increment(scheme, dt, dw, &mut g);
        Ok(g.to_dmatrix())
    }
}

/// One Heun step `M ← M + ½(G M + G(M + G M))` in place.
#[inline]
pub(crate) fn heun_in_place(g: &Mat, x: &mut Mat, k1: &mut Mat, k2: &mut Mat, tmp: &mut Mat) {
    let nn = x.n * x.n;
    mul_into(g, x, k1);
    tmp.n = x.n;
    for i in 0..nn {
        tmp.a[i] = x.a[i] + k1.a[i];
    }
    mul_into(g, tmp, k2);
    for i in 0..nn {
        x.a[i] += (k1.a[i] + k2.a[i]) * 0.5;
    }
}

/// One Euler step `M ← M + G M` in place.
#[inline]
pub(crate) fn euler_in_place(g: &Mat, x: &mut Mat, k1: &mut Mat) {
    let nn = x.n * x.n;
    mul_into(g, x, k1);
    for i in 0..nn {
        x.a[i] += k1.a[i];
    }
}

/// Propagators of the unprimed and primed coherent labels at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorPair {
    pub time: f64,
    pub mu: DMatrix<C64>,
    pub mp: DMatrix<C64>,
}

impl PropagatorPair {
    pub fn identity(modes: usize) -> Self {
        Self {
            time: 0.0,
            mu: DMatrix::identity(modes, modes),
            mp: DMatrix::identity(modes, modes),
        }
    }
}

fn check_step_args(sys: &SdeSystem, pair: &PropagatorPair, dx: &[f64], dy: &[f64]) -> Result<()> {
    let m = sys.modes();
    for mat in [&pair.mu, &pair.mp] {
        if mat.nrows() != m || mat.ncols() != m {
            return Err(Error::Dimension(format!("propagators must be {m}x{m}")));
        }
    }
    if dx.len() != sys.channels() || dy.len() != sys.channels() {
        return Err(Error::Dimension(format!("expected {} increments per family", sys.channels())));
    }
    Ok(())
}

/// Stratonovich Heun step for both propagators; `dx` drives `mu`, `dy` drives `mp`.
pub fn step_stratonovich_heun(
    sys: &SdeSystem,
    pair: &PropagatorPair,
    dt: f64,
    dx: &[f64],
    dy: &[f64],
) -> Result<PropagatorPair> {
    check_step_args(sys, pair, dx, dy)?;
    let m = sys.modes();
    let (mut g, mut k1, mut k2, mut tmp) = (Mat::zeros(m), Mat::zeros(m), Mat::zeros(m), Mat::zeros(m));
    let mut out = [Mat::from_dmatrix(&pair.mu), Mat::from_dmatrix(&pair.mp)];
    for (x, dw) in out.iter_mut().zip([dx, dy]) {
        sys.increment(Scheme::StratonovichHeun, dt, dw, &mut g);
        heun_in_place(&g, x, &mut k1, &mut k2, &mut tmp);
    }
    Ok(PropagatorPair {
        time: pair.time + dt,
        mu: out[0].to_dmatrix(),
        mp: out[1].to_dmatrix(),
    })
}

/// Ito Euler-Maruyama step with the drift correction included.
pub fn step_ito_euler(
    sys: &SdeSystem,
    pair: &PropagatorPair,
    dt: f64,
    dx: &[f64],
    dy: &[f64],
) -> Result<PropagatorPair> {
    check_step_args(sys, pair, dx, dy)?;
    let m = sys.modes();
    let (mut g, mut k1) = (Mat::zeros(m), Mat::zeros(m));
    let mut out = [Mat::from_dmatrix(&pair.mu), Mat::from_dmatrix(&pair.mp)];
    for (x, dw) in out.iter_mut().zip([dx, dy]) {
        sys.increment(Scheme::ItoEuler, dt, dw, &mut g);
        euler_in_place(&g, x, &mut k1);
    }
    Ok(PropagatorPair {
        time: pair.time + dt,
        mu: out[0].to_dmatrix(),
        mp: out[1].to_dmatrix(),
    })
}
