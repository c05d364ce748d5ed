use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Noise family: `X` drives the unprimed propagator, `Y` the primed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    X,
    Y,
}

/// Gaussian increments for one trajectory and family.
///
/// The generator is ChaCha8 keyed by `master_seed` with stream number
/// `2·trajectory + family`, so every trajectory owns two independent
/// streams that do not depend on scheduling.
#[derive(Debug, Clone)]
pub struct WienerStream {
    rng: ChaCha8Rng,
    channels: usize,
}

impl WienerStream {
    pub fn new(master_seed: u64, trajectory: u64, family: NoiseFamily, channels: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        let fam = match family {
            NoiseFamily::X => 0,
            NoiseFamily::Y => 1,
        };
        rng.set_stream(2 * trajectory + fam);
        Self { rng, channels }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Fill `out` with independent `N(0, dt)` increments, one per channel.
    pub fn fill(&mut self, dt: f64, out: &mut [f64]) {
        let sd = dt.sqrt();
        for x in out.iter_mut().take(self.channels) {
            let z: f64 = self.rng.sample(StandardNormal);
            *x = sd * z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_increments() {
        let n = 1_000_000;
        let dt = 0.01;
        let mut xs = WienerStream::new(9, 0, NoiseFamily::X, 2);
        let mut ys = WienerStream::new(9, 0, NoiseFamily::Y, 2);
        let (mut bx, mut by) = ([0.0; 2], [0.0; 2]);
        let mut s = [0.0f64; 6];
        for _ in 0..n {
            xs.fill(dt, &mut bx);
            ys.fill(dt, &mut by);
            s[0] += bx[0];
            s[1] += by[0];
            s[2] += bx[0] * by[0];
            s[3] += bx[0] * bx[0];
            s[4] += bx[0] * bx[1];
            s[5] += by[1] * by[1];
        }
        let nf = n as f64;
        let tol = 5.0 / nf.sqrt();
        // scaled to unit variance
        assert!((s[0] / nf / dt.sqrt()).abs() < tol);
        assert!((s[1] / nf / dt.sqrt()).abs() < tol);
        assert!((s[2] / nf / dt).abs() < tol * 2.0);
        assert!((s[3] / nf / dt - 1.0).abs() < tol * 2.0);
        assert!((s[4] / nf / dt).abs() < tol * 2.0);
        assert!((s[5] / nf / dt - 1.0).abs() < tol * 2.0);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = WienerStream::new(1, 3, NoiseFamily::X, 3);
        let mut b = WienerStream::new(1, 3, NoiseFamily::X, 3);
        let mut c = WienerStream::new(1, 4, NoiseFamily::X, 3);
        let (mut x, mut y, mut z) = ([0.0; 3], [0.0; 3], [0.0; 3]);
        a.fill(1.0, &mut x);
        b.fill(1.0, &mut y);
        c.fill(1.0, &mut z);
        assert_eq!(x, y);
        assert_ne!(x, z);
    }
}
