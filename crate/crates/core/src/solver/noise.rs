//! Uniform time meshes and seeded Brownian increments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SolverError;

/// `0 = t₀ < … < t_M = T` with constant step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    pub dt: f64,
    pub steps: usize,
}

impl TimeMesh {
    pub fn new(horizon: f64, steps: usize) -> Result<Self, SolverError> {
        if !(horizon > 0.0) || steps == 0 {
            return Err(SolverError::InvalidMesh(format!("horizon {horizon} with {steps} steps")));
        }
        Ok(Self { dt: horizon / steps as f64, steps })
    }

    /// Mesh with step `dt`, which must divide the horizon up to 1e-9 relative.
    pub fn with_step(horizon: f64, dt: f64) -> Result<Self, SolverError> {
        if !(dt > 0.0) || !(horizon > 0.0) {
            return Err(SolverError::InvalidMesh(format!("dt = {dt}, horizon = {horizon}")));
        }
        let steps = (horizon / dt).round();
        if steps < 1.0 || ((steps * dt - horizon) / horizon).abs() > 1e-9 {
            return Err(SolverError::InvalidMesh(format!("dt = {dt} does not divide horizon {horizon}")));
        }
        Self::new(horizon, steps as usize)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps)
    }

    /// Every second point removed.
    pub fn coarsened(&self) -> Option<Self> {
        (self.steps % 2 == 0).then(|| Self { dt: 2.0 * self.dt, steps: self.steps / 2 })
    }

    pub fn refined(&self) -> Self {
        Self { dt: 0.5 * self.dt, steps: 2 * self.steps }
    }
}

/// Increments `ΔB^j_k` for channels `j < J` and steps `k < M`.
///
/// Channel `j` draws from the ChaCha8 stream `j` of the generator seeded with
/// `seed`, so a path is a pure function of `(seed, J, M, Δt)` and any channel
/// can be regenerated independently of the others.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    pub seed: u64,
    channels: usize,
    steps: usize,
    increments: Vec<f64>,
}

impl NoisePath {
    pub fn generate(seed: u64, channels: usize, mesh: &TimeMesh) -> Self {
        let mut increments = vec![0.0; channels * mesh.steps];
        let scale = mesh.dt.sqrt();
        for j in 0..channels {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            for k in 0..mesh.steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                increments[k * channels + j] = scale * z;
            }
        }
        Self { seed, channels, steps: mesh.steps, increments }
    }

    pub fn zero(channels: usize, mesh: &TimeMesh) -> Self {
        Self { seed: 0, channels, steps: mesh.steps, increments: vec![0.0; channels * mesh.steps] }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `ΔB_k`, one entry per channel.
    pub fn increment(&self, k: usize) -> &[f64] {
        &self.increments[k * self.channels..(k + 1) * self.channels]
    }

    /// `B^j` at mesh point `k`.
    pub fn value(&self, j: usize, k: usize) -> f64 {
        (0..k).map(|i| self.increments[i * self.channels + j]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_paths_are_reproducible_and_channels_independent() {
        let mesh = TimeMesh::new(1.0, 100).unwrap();
        let a = NoisePath::generate(7, 3, &mesh);
        assert_eq!(a, NoisePath::generate(7, 3, &mesh));
        assert_ne!(a, NoisePath::generate(8, 3, &mesh));
        let b = NoisePath::generate(7, 1, &mesh);
        for k in 0..100 {
            assert_eq!(a.increment(k)[0], b.increment(k)[0]);
        }
    }

    #[test]
    fn increments_have_variance_dt() {
        let mesh = TimeMesh::new(1.0, 20_000).unwrap();
        let p = NoisePath::generate(1, 1, &mesh);
        let var: f64 = (0..mesh.steps).map(|k| p.increment(k)[0].powi(2)).sum::<f64>() / mesh.steps as f64;
        assert!((var / mesh.dt - 1.0).abs() < 0.05);
    }

    #[test]
    fn mesh_validation() {
        assert!(TimeMesh::with_step(0.5, 0.3).is_err());
        let m = TimeMesh::with_step(0.5, 1e-3).unwrap();
        assert_eq!(m.steps, 500);
        assert_eq!(m.refined().coarsened(), Some(m));
    }
}
