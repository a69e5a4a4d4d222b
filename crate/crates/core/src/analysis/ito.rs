//! Residual of the discrete Itô energy identity along a trajectory.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::solver::{Discretization, Forcing, NodalCoefficients, NoisePath, Trajectory};

/// Test function `Φ` of the energy identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `Φ(u) = u²`.
    Square,
    /// `Φ(u) = 2R²(√(1 + (u/R)²) − 1)`: quadratic near 0, linear growth,
    /// bounded second derivative.
    SmoothCapped { radius: f64 },
}

impl TestFunction {
    pub fn parse(tag: &str, radius: f64) -> Result<Self, AnalysisError> {
        match tag {
            "square" => Ok(Self::Square),
            "smooth_capped" | "smooth-capped" => Ok(Self::SmoothCapped { radius }),
            other => Err(AnalysisError::UnsupportedTestFunction(other.to_string())),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Self::Square => u * u,
            Self::SmoothCapped { radius: r } => 2.0 * r * r * ((1.0 + (u / r).powi(2)).sqrt() - 1.0),
        }
    }

    pub fn d1(&self, u: f64) -> f64 {
        match *self {
            Self::Square => 2.0 * u,
            Self::SmoothCapped { radius: r } => 2.0 * u / (1.0 + (u / r).powi(2)).sqrt(),
        }
    }

    pub fn d2(&self, u: f64) -> f64 {
        match *self {
            Self::Square => 2.0,
            Self::SmoothCapped { radius: r } => 2.0 / (1.0 + (u / r).powi(2)).powf(1.5),
        }
    }
}

/// Cumulative residual `R_k` at every mesh point of
///
/// `∫Φ(u_k) − ∫Φ(u_0) = Σ_{i<k} [ ⟨Φ′(u_i), Δt(L_h u_i + f_i + div_h(σg_i)) + Σ_j h_{j,i} ΔB^j_i⟩
///   + ½⟨Φ″(u_i), Σ_j h_{j,i}²⟩Δt + Σ_x Φ′(u_{i+1}) ν_i ] + R_k`,
///
/// with coefficients evaluated at the left point. `traj` must be complete.
pub fn energy_residual(
    traj: &Trajectory,
    disc: &Discretization,
    forcing: &Forcing,
    path: &NoisePath,
    phi: TestFunction,
) -> Result<Vec<f64>, AnalysisError> {
    if !traj.is_complete() || path.steps() != traj.mesh.steps {
        return Err(AnalysisError::Incomplete("energy residual needs every mesh point and the matching noise".into()));
    }
    let vol = disc.grid.cell_volume();
    let dt = traj.mesh.dt;
    let integral = |u: &[f64]| vol * u.iter().map(|v| phi.value(*v)).sum::<f64>();
    let mut c = NodalCoefficients::default();
    let mut out = vec![0.0];
    let mut acc = 0.0;
    let base = integral(&traj.states[0]);
    for k in 0..traj.mesh.steps {
        let u = &traj.states[k];
        let z = disc.ops.gradients(u);
        forcing.evaluate(traj.mesh.time(k), &disc.points, u, &z, &mut c);
        let mut drift = disc.ops.divergence.apply(u);
        disc.ops.add_divergence_of(&c.g, &mut drift);
        let db = path.increment(k);
        let mut step = 0.0;
        for p in 0..u.len() {
            let mut incr = dt * (drift[p] + c.f[p]);
            let mut quad = 0.0;
            for (h, b) in c.h.iter().zip(db) {
                incr += h[p] * b;
                quad += h[p] * h[p];
            }
            step += vol * (phi.d1(u[p]) * incr + 0.5 * phi.d2(u[p]) * quad * dt);
            step += phi.d1(traj.states[k + 1][p]) * traj.reflection[k + 1][p];
        }
        acc += step;
        out.push(integral(&traj.states[k + 1]) - base - acc);
    }
    Ok(out)
}
