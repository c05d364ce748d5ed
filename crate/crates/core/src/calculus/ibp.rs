use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::derivative::{metric_derivative, MetricDerivativeKind};
use super::expr::{Assignment, Expression};
use crate::algebra::random::complex_normal;
use crate::algebra::{GeneratorSpace, GrassmannNumber};
use crate::{Error, Result, C64};

/// Monte Carlo mean of a Grassmann-valued quantity with per-coefficient
/// standard errors (real and imaginary parts separately).
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: GrassmannNumber,
    /// `(se_re, se_im)` packed into a complex number per monomial.
    pub std_error: GrassmannNumber,
}

impl Estimate {
    /// Largest `|mean| / se` over coefficients and real/imaginary parts.
    /// Coefficients with zero spread count as 0 when the mean is exactly 0.
    pub fn max_z(&self) -> f64 {
        let full = self.mean.space().full_mask();
        let mut worst = 0.0f64;
        for m in 0..=full {
            let mu = self.mean.coefficient(m);
            let se = self.std_error.coefficient(m);
            for (x, s) in [(mu.re, se.re), (mu.im, se.im)] {
                let z = if s > 0.0 {
                    x.abs() / s
                } else if x == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

struct Accumulator {
    space: Arc<GeneratorSpace>,
    sum: Vec<C64>,
    sq_re: Vec<f64>,
    sq_im: Vec<f64>,
    n: usize,
}

impl Accumulator {
    fn new(space: &Arc<GeneratorSpace>) -> Self {
        let size = 1usize << space.len();
        Self {
            space: Arc::clone(space),
            sum: vec![C64::new(0.0, 0.0); size],
            sq_re: vec![0.0; size],
            sq_im: vec![0.0; size],
            n: 0,
        }
    }

    fn push(&mut self, x: &GrassmannNumber) {
        for &(m, c) in x.terms() {
            let m = m as usize;
            self.sum[m] += c;
            self.sq_re[m] += c.re * c.re;
            self.sq_im[m] += c.im * c.im;
        }
        self.n += 1;
    }

    fn finish(&self) -> Estimate {
        let n = self.n as f64;
        let mut mean = Vec::with_capacity(self.sum.len());
        let mut se = Vec::with_capacity(self.sum.len());
        for m in 0..self.sum.len() {
            let mu = self.sum[m] / n;
            let var_re = ((self.sq_re[m] / n - mu.re * mu.re) * n / (n - 1.0).max(1.0)).max(0.0);
            let var_im = ((self.sq_im[m] / n - mu.im * mu.im) * n / (n - 1.0).max(1.0)).max(0.0);
            mean.push(mu);
            se.push(C64::new((var_re / n).sqrt(), (var_im / n).sqrt()));
        }
        Estimate {
            mean: GrassmannNumber::from_dense(&self.space, &mean),
            std_error: GrassmannNumber::from_dense(&self.space, &se),
        }
    }
}

/// Closed-form values of the three integrals when `f` and `h` are affine in
/// the coefficients (always true for an odd variable).
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticIbp {
    pub lhs: GrassmannNumber,
    pub derivative_term: GrassmannNumber,
    pub measure_term: GrassmannNumber,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbpReport {
    /// `E[f · Σ_A ∂_{G_A} H_A]`
    pub lhs: Estimate,
    /// `−E[h⁻ ∂⁻ f]`
    pub derivative_term: Estimate,
    /// `−E[f · Σ_A H_A ∂_{G_A} log P]`
    pub measure_term: Estimate,
    /// Per-sample `lhs − derivative_term − measure_term`.
    pub residual: Estimate,
    pub analytic: Option<AnalyticIbp>,
}

fn odd_monomials(space: &GeneratorSpace) -> Vec<u32> {
    (0..=space.full_mask()).filter(|m| m.count_ones() % 2 == 1).collect()
}

/// Monte Carlo check of the coefficient-space integration by parts identity
/// for an odd variable `var` whose odd coefficients are independent complex
/// Gaussians with `E|G_A|² = width²`.
pub fn check_integration_by_parts(
    f: &Expression,
    h: &Expression,
    var: &str,
    space: &Arc<GeneratorSpace>,
    width: f64,
    samples: usize,
    seed: u64,
) -> Result<IbpReport> {
    if samples < 2 || !(width > 0.0) {
        return Err(Error::Dimension("need at least two samples and a positive width".into()));
    }
    let df = metric_derivative(f, var, MetricDerivativeKind::LeftOdd)?;
    let dh = metric_derivative(h, var, MetricDerivativeKind::LeftOdd)?;
    let odd = odd_monomials(space);
    let units: Vec<GrassmannNumber> = odd
        .iter()
        .map(|&m| GrassmannNumber::monomial(space, m, C64::new(1.0, 0.0)))
        .collect();
    let var2 = width * width;

    let point = |coeffs: &[C64]| -> Result<Assignment> {
        let g = GrassmannNumber::from_terms(space, odd.iter().copied().zip(coeffs.iter().copied()));
        Assignment::new(space).with(var, g)
    };
    // ∂H_A/∂G_A = coefficient A of e_A ∂⁻h
    let divergence = |dh_val: &GrassmannNumber| -> C64 {
        odd.iter()
            .zip(&units)
            .map(|(&m, e)| (e * dh_val).coefficient(m))
            .sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = [
        Accumulator::new(space),
        Accumulator::new(space),
        Accumulator::new(space),
        Accumulator::new(space),
    ];
    let scale = width / std::f64::consts::SQRT_2;
    let mut coeffs = vec![C64::new(0.0, 0.0); odd.len()];
    let mut first_point = None;
    for _ in 0..samples {
        for c in coeffs.iter_mut() {
            *c = complex_normal(&mut rng) * scale;
        }
        let a = point(&coeffs)?;
        let fv = f.eval(&a)?;
        let hv = h.eval(&a)?;
        let lhs = fv.scale(divergence(&dh.eval(&a)?));
        let t2 = -(&hv.odd_part() * &df.eval(&a)?);
        let flux: C64 = odd
            .iter()
            .zip(&coeffs)
            .map(|(&m, g)| hv.coefficient(m) * g.conj())
            .sum();
        let t3 = fv.scale(flux / var2);
        let resid = &(&lhs - &t2) - &t3;
        for (slot, x) in acc.iter_mut().zip([&lhs, &t2, &t3, &resid]) {
            slot.push(x);
        }
        if first_point.is_none() {
            first_point = Some((coeffs.clone(), fv));
        }
    }

    // affine closed form
    let zero_point = point(&vec![C64::new(0.0, 0.0); odd.len()])?;
    let f0 = f.eval(&zero_point)?;
    let h0 = h.eval(&zero_point)?;
    let df0 = df.eval(&zero_point)?;
    let dh0 = dh.eval(&zero_point)?;
    let partials: Vec<GrassmannNumber> = units.iter().map(|e| e * &df0).collect();
    let trace = divergence(&dh0);
    let affine_ok = first_point
        .map(|(c, fv)| {
            let mut pred = f0.clone();
            for (g, p) in c.iter().zip(&partials) {
                pred += &p.scale(*g);
            }
            pred.distance(&fv).map(|d| d <= 1e-9 * (1.0 + fv.norm())).unwrap_or(false)
        })
        .unwrap_or(false);
    let analytic = affine_ok.then(|| {
        let mut t2 = GrassmannNumber::zero(space);
        let mut cross = GrassmannNumber::zero(space);
        for (&m, p) in odd.iter().zip(&partials) {
            t2 -= &p.scale(h0.coefficient(m));
            cross += &p.scale(h0.coefficient(m));
        }
        AnalyticIbp {
            lhs: f0.scale(trace),
            derivative_term: t2,
            measure_term: &f0.scale(trace) + &cross,
        }
    });

    let [lhs, t2, t3, resid] = acc.map(|a| a.finish());
    Ok(IbpReport {
        lhs,
        derivative_term: t2,
        measure_term: t3,
        residual: resid,
        analytic,
    })
}
