//! Galerkin blow-up when the divergence data leaves the range of σ.
//!
//! On `(0, π)` with `a ≡ 0` and `g_k = (1/k)√(2/π) cos kx`, each sine mode
//! of the truncated solution obeys `du = −dt + h̄ₙ dBⁿ`, so the energy of
//! the `N`-mode solution grows linearly in `N`.

use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_mean_se, linear_fit, mean, LineFit};
use super::{run_paths, AnalysisError};
use crate::solver::{NoisePath, TimeMesh};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupPoint {
    pub modes: usize,
    /// `Ê‖w^N(T)‖²`.
    pub energy: f64,
    pub se: f64,
    /// `N·T² + T·Σ h̄ₙ²`.
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub points: Vec<BlowupPoint>,
    pub fit: Option<LineFit>,
}

/// Amplitude profile `h̄ₙ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseProfile {
    Zero,
    /// `h̄ₙ = scale / n`.
    Inverse { scale: f64 },
    Constant { value: f64 },
}

impl NoiseProfile {
    pub fn amplitude(&self, n: usize) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Inverse { scale } => scale / n as f64,
            Self::Constant { value } => value,
        }
    }
}

/// Energy of the `N`-mode solution at `T` on every path: mode `n` is
/// `−T + h̄ₙ Bⁿ_T`, the exact Euler sum of its increments, and Parseval in
/// the orthonormal sine basis turns `‖w^N‖²` into the sum of squared modes.
pub fn example1_energies(
    modes: usize,
    profile: NoiseProfile,
    mesh: &TimeMesh,
    paths: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<f64>, AnalysisError> {
    if modes == 0 || paths == 0 {
        return Err(AnalysisError::Precondition("need at least one mode and one path".into()));
    }
    let horizon = mesh.horizon();
    let noisy = !matches!(profile, NoiseProfile::Zero);
    run_paths(paths, base_seed, workers, |seed| {
        let path = noisy.then(|| NoisePath::generate(seed, modes, mesh));
        let mut energy = 0.0;
        for n in 0..modes {
            let mut u = -horizon;
            if let Some(path) = &path {
                let b: f64 = (0..mesh.steps).map(|k| path.increment(k)[n]).sum();
                u += profile.amplitude(n + 1) * b;
            }
            energy += u * u;
        }
        Ok(energy)
    })
}

pub fn example1_blowup(
    modes: &[usize],
    profile: NoiseProfile,
    mesh: &TimeMesh,
    paths: usize,
    base_seed: u64,
    workers: usize,
) -> Result<BlowupReport, AnalysisError> {
    let t = mesh.horizon();
    let mut points = Vec::with_capacity(modes.len());
    for &n in modes {
        let e = example1_energies(n, profile, mesh, paths, base_seed, workers)?;
        let expected = n as f64 * t * t + t * (1..=n).map(|k| profile.amplitude(k).powi(2)).sum::<f64>();
        points.push(BlowupPoint { modes: n, energy: mean(&e), se: bootstrap_mean_se(&e, base_seed ^ n as u64), expected });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.modes as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.energy).collect();
    Ok(BlowupReport { fit: linear_fit(&xs, &ys), points })
}
