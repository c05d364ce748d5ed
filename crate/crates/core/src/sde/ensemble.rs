use rayon::prelude::*;

use super::estimate::{lift_into, ObservableEstimate, RhoEstimate, RhoKernel, TimeAccumulator};
use super::step::{euler_in_place, heun_in_place, Mat, PropagatorPair, Scheme, SdeSystem};
use super::wiener::{NoiseFamily, WienerStream};
use crate::brep::BFunction;
use crate::fock::FockOperator;
use crate::model::ModelSpec;
use crate::{Error, Result, C64};

/// Entries above this magnitude mark a trajectory as diverged.
pub const DIVERGENCE_BOUND: f64 = 1e100;

const CHUNK: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: u64,
}

impl EnsembleConfig {
    fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Error::InvalidModel {
            field: field.into(),
            reason: reason.into(),
        };
        if self.n_traj == 0 {
            return Err(bad("n_traj", "must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(bad("dt", "must be positive and finite"));
        }
        Ok(())
    }
}

/// A trajectory that left the finite range before the last output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergedTrajectory {
    pub index: usize,
    /// First output time at which the propagators were no longer finite.
    pub time: f64,
}

/// Step counts and sizes between successive output times; every interval is
/// split into equal steps no longer than `dt`.
pub(crate) fn schedule(times: &[f64], dt: f64) -> Vec<(usize, f64)> {
    let mut prev = 0.0;
    times
        .iter()
        .map(|&t| {
            let span = t - prev;
            prev = t;
            if span <= 0.0 {
                (0, 0.0)
            } else {
                let n = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
                (n, span / n as f64)
            }
        })
        .collect()
}

/// Run one trajectory, calling `visit(k, mu, mp)` at each output time.
/// Returns the output index at which it diverged, if any.
pub(crate) fn run_trajectory(
    sys: &SdeSystem,
    cfg: &EnsembleConfig,
    plan: &[(usize, f64)],
    index: usize,
    mut visit: impl FnMut(usize, &Mat, &Mat),
) -> Option<usize> {
    let m = sys.modes();
    let ch = sys.channels();
    let mut wx = WienerStream::new(cfg.seed, index as u64, NoiseFamily::X, ch);
    let mut wy = WienerStream::new(cfg.seed, index as u64, NoiseFamily::Y, ch);
    let (mut dx, mut dy) = (vec![0.0; ch], vec![0.0; ch]);
    let mut mu = Mat::identity(m);
    let mut mp = Mat::identity(m);
    let (mut g, mut k1, mut k2, mut tmp) = (Mat::zeros(m), Mat::zeros(m), Mat::zeros(m), Mat::zeros(m));
    for (k, &(steps, h)) in plan.iter().enumerate() {
        for _ in 0..steps {
            wx.fill(h, &mut dx);
            wy.fill(h, &mut dy);
            match cfg.scheme {
                Scheme::StratonovichHeun => {
                    sys.increment(cfg.scheme, h, &dx, &mut g);
                    heun_in_place(&g, &mut mu, &mut k1, &mut k2, &mut tmp);
                    sys.increment(cfg.scheme, h, &dy, &mut g);
                    heun_in_place(&g, &mut mp, &mut k1, &mut k2, &mut tmp);
                }
                Scheme::ItoEuler => {
                    sys.increment(cfg.scheme, h, &dx, &mut g);
                    euler_in_place(&g, &mut mu, &mut k1);
                    sys.increment(cfg.scheme, h, &dy, &mut g);
                    euler_in_place(&g, &mut mp, &mut k1);
                }
            }
        }
        if !(mu.is_finite_below(DIVERGENCE_BOUND) && mp.is_finite_below(DIVERGENCE_BOUND)) {
            return Some(k);
        }
        visit(k, &mu, &mp);
    }
    None
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub index: usize,
    /// Propagators at the output times reached before any divergence.
    pub pairs: Vec<PropagatorPair>,
    pub diverged: Option<DivergedTrajectory>,
}

/// Fully stored ensemble of propagator trajectories.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub config: EnsembleConfig,
    pub modes: usize,
    pub times: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryEnsemble {
    pub fn diverged(&self) -> Vec<DivergedTrajectory> {
        self.trajectories.iter().filter_map(|t| t.diverged).collect()
    }

    fn accumulate(&self, kernel: &RhoKernel, observables: &[FockOperator], k: usize) -> Result<TimeAccumulator> {
        if k >= self.times.len() {
            return Err(Error::Dimension(format!("time index {k} out of range")));
        }
        if kernel.modes() != self.modes {
            return Err(Error::Dimension("initial state and ensemble differ in modes".into()));
        }
        let dim = 1usize << self.modes;
        let mut acc = TimeAccumulator::new(self.modes, observables.len());
        let (mut gu, mut gp, mut rho) = (vec![C64::default(); dim * dim], vec![C64::default(); dim * dim], vec![C64::default(); dim * dim]);
        for tr in self.trajectories.iter().filter(|t| t.diverged.is_none()) {
            let pair = &tr.pairs[k];
            lift_into(&Mat::from_dmatrix(&pair.mu), &mut gu);
            lift_into(&Mat::from_dmatrix(&pair.mp), &mut gp);
            kernel.rho_into(&gu, &gp, &mut rho);
            acc.push(&rho, observables);
        }
        Ok(acc)
    }
}

pub fn simulate_ensemble(spec: &ModelSpec, cfg: EnsembleConfig) -> Result<TrajectoryEnsemble> {
    cfg.validate()?;
    let sys = SdeSystem::new(spec)?;
    let times = spec.times().to_vec();
    let plan = schedule(&times, cfg.dt);
    let trajectories = (0..cfg.n_traj)
        .into_par_iter()
        .map(|index| {
            let mut pairs = Vec::with_capacity(times.len());
            let div = run_trajectory(&sys, &cfg, &plan, index, |k, mu, mp| {
                pairs.push(PropagatorPair {
                    time: times[k],
                    mu: mu.to_dmatrix(),
                    mp: mp.to_dmatrix(),
                })
            });
            Trajectory {
                index,
                pairs,
                diverged: div.map(|k| DivergedTrajectory { index, time: times[k] }),
            }
        })
        .collect();
    Ok(TrajectoryEnsemble {
        config: cfg,
        modes: spec.modes(),
        times,
        trajectories,
    })
}

/// Mean reconstructed density at output index `k`, diverged trajectories excluded.
pub fn reconstruct_rho(ensemble: &TrajectoryEnsemble, b0: &BFunction, k: usize) -> Result<RhoEstimate> {
    let acc = ensemble.accumulate(&RhoKernel::from_b(b0)?, &[], k)?;
    acc.rho_estimate(ensemble.modes, ensemble.times[k])
}

pub fn estimate_observable(
    ensemble: &TrajectoryEnsemble,
    b0: &BFunction,
    observable: &FockOperator,
    k: usize,
) -> Result<ObservableEstimate> {
    let acc = ensemble.accumulate(&RhoKernel::from_b(b0)?, std::slice::from_ref(observable), k)?;
    acc.observable_estimate(0, ensemble.times[k])
}

/// Statistics after the first `n_traj` trajectories.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub n_traj: usize,
    per_time: Vec<TimeAccumulator>,
}

/// Streaming ensemble run: only running moments are kept.
#[derive(Debug, Clone)]
pub struct EnsembleStatistics {
    pub config: EnsembleConfig,
    pub modes: usize,
    pub times: Vec<f64>,
    pub observables: Vec<FockOperator>,
    /// One entry per requested checkpoint, the last covering all trajectories.
    pub snapshots: Vec<Snapshot>,
    pub diverged: Vec<DivergedTrajectory>,
}

impl EnsembleStatistics {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("at least one snapshot")
    }

    pub fn rho(&self, k: usize) -> Result<RhoEstimate> {
        self.rho_at(self.final_snapshot(), k)
    }

    pub fn observable(&self, k: usize, index: usize) -> Result<ObservableEstimate> {
        self.observable_at(self.final_snapshot(), k, index)
    }

    pub fn rho_at(&self, snap: &Snapshot, k: usize) -> Result<RhoEstimate> {
        let acc = snap
            .per_time
            .get(k)
            .ok_or_else(|| Error::Dimension(format!("time index {k} out of range")))?;
        acc.rho_estimate(self.modes, self.times[k])
    }

    pub fn observable_at(&self, snap: &Snapshot, k: usize, index: usize) -> Result<ObservableEstimate> {
        let acc = snap
            .per_time
            .get(k)
            .ok_or_else(|| Error::Dimension(format!("time index {k} out of range")))?;
        acc.observable_estimate(index, self.times[k])
    }
}

/// Simulate and reduce on the fly. Trajectories are processed in fixed
/// chunks whose partial sums are combined in index order, so results do not
/// depend on the number of threads. `checkpoints` lists prefix sizes at
/// which a snapshot of the statistics is kept.
pub fn run_streaming(
    spec: &ModelSpec,
    initial: &FockOperator,
    observables: &[FockOperator],
    cfg: EnsembleConfig,
    checkpoints: &[usize],
) -> Result<EnsembleStatistics> {
    cfg.validate()?;
    let m = spec.modes();
    if initial.modes() != m || observables.iter().any(|o| o.modes() != m) {
        return Err(Error::Dimension("operators must match the model's mode count".into()));
    }
    let sys = SdeSystem::new(spec)?;
    let kernel = RhoKernel::new(initial);
    let times = spec.times().to_vec();
    let plan = schedule(&times, cfg.dt);
    let mut marks: Vec<usize> = checkpoints.iter().copied().filter(|&c| c > 0 && c < cfg.n_traj).collect();
    marks.push(cfg.n_traj);
    marks.sort_unstable();
    marks.dedup();

    let dim = 1usize << m;
    let fresh = || vec![TimeAccumulator::new(m, observables.len()); times.len()];
    let mut total = fresh();
    let mut diverged = Vec::new();
    let mut snapshots = Vec::new();
    let mut start = 0;
    for &end in &marks {
        let chunks: Vec<(usize, usize)> = (start..end).step_by(CHUNK).map(|a| (a, (a + CHUNK).min(end))).collect();
        let partials: Vec<(Vec<TimeAccumulator>, Vec<DivergedTrajectory>)> = chunks
            .par_iter()
            .map(|&(a, b)| {
                let mut acc = fresh();
                let mut div = Vec::new();
                let (mut gu, mut gp, mut rho) = (vec![C64::default(); dim * dim], vec![C64::default(); dim * dim], vec![C64::default(); dim * dim]);
                let mut rows: Vec<Vec<C64>> = vec![Vec::new(); times.len()];
                for index in a..b {
                    let d = run_trajectory(&sys, &cfg, &plan, index, |k, mu, mp| {
                        lift_into(mu, &mut gu);
                        lift_into(mp, &mut gp);
                        kernel.rho_into(&gu, &gp, &mut rho);
                        rows[k].clear();
                        rows[k].extend_from_slice(&rho);
                    });
                    // a diverged trajectory contributes nowhere, not even at earlier times
                    match d {
                        Some(k) => div.push(DivergedTrajectory { index, time: times[k] }),
                        None => {
                            for (acc_k, row) in acc.iter_mut().zip(&rows) {
                                acc_k.push(row, observables);
                            }
                        }
                    }
                }
                (acc, div)
            })
            .collect();
        for (acc, div) in partials {
            for (t, a) in total.iter_mut().zip(&acc) {
                t.merge(a);
            }
            diverged.extend(div);
        }
        snapshots.push(Snapshot {
            n_traj: end,
            per_time: total.clone(),
        });
        start = end;
    }
    Ok(EnsembleStatistics {
        config: cfg,
        modes: m,
        times,
        observables: observables.to_vec(),
        snapshots,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lands_on_output_times() {
        let plan = schedule(&[0.0, 0.25, 0.25, 1.0], 0.1);
        assert_eq!(plan[0].0, 0);
        assert_eq!(plan[1].0, 3);
        assert_eq!(plan[2].0, 0);
        assert_eq!(plan[3].0, 8);
        let total: f64 = plan.iter().map(|(n, h)| *n as f64 * h).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert_eq!(schedule(&[0.3], 0.1)[0].0, 3);
    }
}
