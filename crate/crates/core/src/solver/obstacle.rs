//! Deterministic penalized obstacle problem and its projected-SOR reference.

use super::scheme::{Discretization, Forcing, Stepper};
use super::trajectory::{run_path, BarrierPath, RecordOptions};
use super::{NoisePath, SolverError, TimeMesh};
use crate::discretize::SparseMatrix;

/// Solves `∂ₜu − L_h u − (u − ψ)⁻/ε = F` with `h ≡ 0`; returns the state at
/// every mesh point.
pub fn solve_deterministic_obstacle(
    disc: &Discretization,
    psi: &[f64],
    u0: &[f64],
    forcing: &[f64],
    epsilon: f64,
    mesh: &TimeMesh,
) -> Result<Vec<Vec<f64>>, SolverError> {
    if !(epsilon > 0.0) {
        return Err(SolverError::Obstacle(format!("penalty scale ε = {epsilon} must be positive")));
    }
    let stepper = Stepper::new(&disc.ops, mesh.dt)?;
    let f = Forcing::drift(forcing.to_vec(), disc.columns());
    let path = NoisePath::zero(0, mesh);
    let barrier = BarrierPath::Static(psi.to_vec());
    let opts = RecordOptions { stride: 1, grads: false };
    Ok(run_path(disc, &f, &stepper, u0, &barrier, 1.0 / epsilon, &path, mesh, None, opts)?.states)
}

/// Settings of the projected successive over-relaxation.
#[derive(Clone, Copy, Debug)]
pub struct PsorSettings {
    pub omega: f64,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for PsorSettings {
    fn default() -> Self {
        Self { omega: 1.5, tol: 1e-13, max_sweeps: 100_000 }
    }
}

/// Solves the linear complementarity problem `Au ≥ b`, `u ≥ ψ`,
/// `(Au − b)·(u − ψ) = 0` starting from `u`. Returns the number of sweeps.
pub fn psor(a: &SparseMatrix, b: &[f64], psi: &[f64], u: &mut [f64], s: PsorSettings) -> Result<usize, SolverError> {
    let n = b.len();
    for (ui, pi) in u.iter_mut().zip(psi) {
        *ui = ui.max(*pi);
    }
    for sweep in 1..=s.max_sweeps {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let (mut off, mut diag) = (0.0, 0.0);
            for (j, v) in a.row(i) {
                if j == i {
                    diag = v;
                } else {
                    off += v * u[j];
                }
            }
            let gs = (b[i] - off) / diag;
            let new = (u[i] + s.omega * (gs - u[i])).max(psi[i]);
            change = change.max((new - u[i]).abs());
            u[i] = new;
        }
        if change <= s.tol {
            return Ok(sweep);
        }
    }
    Err(SolverError::Obstacle(format!("projected SOR did not converge in {} sweeps", s.max_sweeps)))
}

/// Backward-Euler variational inequality: at each step, `u_{k+1}` solves the
/// complementarity problem with `A = I − Δt L_h` and `b = u_k + Δt F`.
pub fn psor_obstacle(
    disc: &Discretization,
    psi: &[f64],
    u0: &[f64],
    forcing: &[f64],
    mesh: &TimeMesh,
    settings: PsorSettings,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let n = disc.nodes();
    let a = SparseMatrix::identity(n).linear_combination(1.0, &disc.ops.divergence.matrix, -mesh.dt);
    let mut out = vec![u0.to_vec()];
    let mut u = u0.to_vec();
    for _ in 0..mesh.steps {
        let b: Vec<f64> = u.iter().zip(forcing).map(|(x, f)| x + mesh.dt * f).collect();
        psor(&a, &b, psi, &mut u, settings)?;
        out.push(u.clone());
    }
    Ok(out)
}
