//! Adaptive Dormand-Prince 5(4) for complex vector systems.

use nalgebra::DVector;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth minus embedded fourth order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` and return `y` at each of `times`
/// (nondecreasing, all `>= t0`). Output times are hit exactly.
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    y0: &DVector<C64>,
    times: &[f64],
    opts: OdeOptions,
) -> Result<(Vec<DVector<C64>>, OdeStats)>
where
    F: FnMut(f64, &DVector<C64>) -> DVector<C64>,
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0.clone();
    let mut k0 = f(t, &y);
    stats.evaluations += 1;
    let span = times.last().map(|tf| (tf - t0).abs()).unwrap_or(0.0);
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let scale = k0.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-12);
        (1e-3 / scale).min(span.max(1e-12))
    });
    for &target in times {
        if target < t {
            return Err(Error::Tolerance(format!("output time {target} precedes {t}")));
        }
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Tolerance(format!(
                    "step budget of {} exhausted at t = {t}",
                    opts.max_steps
                )));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
            k.push(k0.clone());
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    if A[s][j] != 0.0 {
                        ys.axpy(C64::new(step * A[s][j], 0.0), kj, C64::new(1.0, 0.0));
                    }
                }
                k.push(f(t + C[s] * step, &ys));
                stats.evaluations += 1;
            }
            // stage 7 was evaluated at the fifth-order solution
            let mut y_new = y.clone();
            for (j, kj) in k.iter().enumerate().take(6) {
                if A[6][j] != 0.0 {
                    y_new.axpy(C64::new(step * A[6][j], 0.0), kj, C64::new(1.0, 0.0));
                }
            }
            let mut err_acc = 0.0;
            for i in 0..y.len() {
                let mut e = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    e += kj[i] * (E[j] * step);
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_acc += (e.norm() / sc).powi(2);
            }
            let err = (err_acc / y.len().max(1) as f64).sqrt();
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k0 = k.pop().unwrap();
                stats.accepted += 1;
            } else {
                stats.rejected += 1;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * fac;
            if !last || err > 1.0 {
                h = proposed;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Tolerance(format!("step size underflow at t = {t} (error {err:.3e})")));
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
