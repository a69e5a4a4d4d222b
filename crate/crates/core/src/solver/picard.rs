//! Picard iteration in the weighted norm `‖·‖_{γ,δ}`.

use serde::{Deserialize, Serialize};

use super::scheme::{Discretization, Forcing, Stepper};
use super::trajectory::{barrier_path, run_path, RecordOptions, Trajectory};
use super::{NoisePath, SolverError, TimeMesh};
use crate::model::{check_contraction, SpdeProblem};

/// `∫₀ᵀ e^{−γs}(δ‖u_s‖² + ‖σᵀ∇u_s‖²) ds` by the trapezoid rule over the
/// recorded times. Requires recorded gradients.
pub fn weighted_norm(traj: &Trajectory, gamma: f64, delta: f64) -> f64 {
    weighted_integral(traj, None, gamma, delta)
}

/// [`weighted_norm`] of `a − b`, which must share their recorded times.
pub fn weighted_distance(a: &Trajectory, b: &Trajectory, gamma: f64, delta: f64) -> f64 {
    weighted_integral(a, Some(b), gamma, delta)
}

fn weighted_integral(a: &Trajectory, b: Option<&Trajectory>, gamma: f64, delta: f64) -> f64 {
    assert_eq!(a.grads.len(), a.states.len(), "weighted norm needs recorded gradients");
    if let Some(b) = b {
        assert_eq!(a.times, b.times, "trajectories must share recorded times");
    }
    let vol = a.cell_volume;
    let diff_sq = |x: &[f64], y: Option<&[f64]>| -> f64 {
        vol * match y {
            Some(y) => x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>(),
            None => x.iter().map(|p| p * p).sum::<f64>(),
        }
    };
    let integrand: Vec<f64> = (0..a.times.len())
        .map(|i| {
            let u = diff_sq(&a.states[i], b.map(|b| b.states[i].as_slice()));
            let z: f64 =
                (0..a.grads[i].len()).map(|k| diff_sq(&a.grads[i][k], b.map(|b| b.grads[i][k].as_slice()))).sum();
            (-gamma * a.times[i]).exp() * (delta * u + z)
        })
        .collect();
    a.times.windows(2).zip(integrand.windows(2)).map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1])).sum()
}

/// One Picard iterate's bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardState {
    /// `m`: this record compares `u^m` with `u^{m−1}`.
    pub iterate: usize,
    /// `‖u^m − u^{m−1}‖_{γ,δ}`.
    pub distance: f64,
    /// `distance_m / distance_{m−1}`, when the previous distance is positive.
    pub ratio: Option<f64>,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    pub history: Vec<PicardState>,
    /// Theoretical contraction factor of the squared weighted distance.
    pub theoretical_ratio: f64,
}

impl PicardOutcome {
    /// Index `m` with `‖u^{m+1} − u^m‖ < tol`, i.e. the iterate already at
    /// the fixed point.
    pub fn converged_after(&self) -> usize {
        self.history.last().map_or(0, |s| s.iterate - 1)
    }
}

/// Iterates `u^{m+1} = Φ(u^m)` from `u⁰ ≡ ξ`, where `Φ` solves the penalized
/// linear problem with coefficients frozen at `(u^m, σᵀ∇u^m)`. Stops once
/// the weighted distance of consecutive iterates is below `tol`.
pub fn picard_solve(
    problem: &SpdeProblem,
    disc: &Discretization,
    penalty: f64,
    path: &NoisePath,
    mesh: &TimeMesh,
    tol: f64,
    max_iter: usize,
) -> Result<PicardOutcome, SolverError> {
    let report = check_contraction(&problem.coeffs.lipschitz);
    if !report.satisfied {
        return Err(SolverError::Contraction(problem.coeffs.lipschitz));
    }
    let (gamma, delta, epsilon) = (report.gamma.unwrap(), report.delta.unwrap(), report.epsilon.unwrap());
    let stepper = Stepper::new(&disc.ops, mesh.dt)?;
    let forcing = Forcing::from_coefficients(&problem.coeffs, &disc.points);
    let barrier = barrier_path(problem, disc, &stepper, path, mesh)?;
    let xi = disc.sample(&problem.initial, 0.0);
    let opts = RecordOptions { stride: 1, grads: true };

    let constant = {
        let z = disc.ops.gradients(&xi);
        let n = mesh.steps + 1;
        Trajectory {
            penalty,
            seed: path.seed,
            mesh: *mesh,
            cell_volume: disc.grid.cell_volume(),
            stride: 1,
            indices: (0..n).collect(),
            times: (0..n).map(|k| mesh.time(k)).collect(),
            states: vec![xi.clone(); n],
            grads: vec![z; n],
            reflection: vec![vec![0.0; xi.len()]; n],
            energy: Default::default(),
        }
    };
    let mut prev = constant;
    let mut history: Vec<PicardState> = Vec::new();
    for m in 1..=max_iter {
        let next = run_path(disc, &forcing, &stepper, &xi, &barrier, penalty, path, mesh, Some(&prev), opts)?;
        let distance = weighted_distance(&next, &prev, gamma, delta);
        let ratio = history.last().and_then(|s| (s.distance > 0.0).then(|| distance / s.distance));
        history.push(PicardState { iterate: m, distance, ratio, gamma, delta, epsilon });
        prev = next;
        if distance < tol {
            return Ok(PicardOutcome { trajectory: prev, history, theoretical_ratio: report.ratio.unwrap() });
        }
    }
    Err(SolverError::PicardDiverged { max_iter, history })
}
