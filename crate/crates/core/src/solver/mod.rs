//! Penalized semi-implicit time stepping, the deterministic obstacle solver
//! and the Picard outer loop.

mod export;
mod noise;
mod obstacle;
mod picard;
mod scheme;
mod trajectory;

use thiserror::Error;

use crate::discretize::DiscretizeError;
use crate::model::Lipschitz;
use crate::symbolic::SymbolicError;

pub use export::{trajectory_csv, write_trajectory_csv};
pub use noise::{NoisePath, TimeMesh};
pub use obstacle::{psor, psor_obstacle, solve_deterministic_obstacle, PsorSettings};
pub use picard::{picard_solve, weighted_distance, weighted_norm, PicardOutcome, PicardState};
pub use scheme::{
    step_penalized, Discretization, Forcing, NodalCoefficients, StepInput, StepOutput, Stepper, Workspace,
};
pub use trajectory::{
    barrier_path, run_path, simulate, simulate_dominator, solve_linear_obstacle, BarrierPath, EnergySummary,
    RecordOptions, Trajectory,
};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error("sigma: {0}")]
    Sigma(#[from] SymbolicError),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-finite state at t = {time}, node {node} (x = {coords:?})")]
    NonFinite { time: f64, node: usize, coords: Vec<f64> },
    #[error("coefficients depend on (y, z); use the Picard solver")]
    NotLinear,
    #[error("obstacle: {0}")]
    Obstacle(String),
    #[error("contraction condition 2α + β² < 1 fails for {0:?}")]
    Contraction(Lipschitz),
    #[error("Picard iteration did not reach the tolerance in {max_iter} iterations; distances {:?}", history.iter().map(|s| s.distance).collect::<Vec<_>>())]
    PicardDiverged { max_iter: usize, history: Vec<PicardState> },
}
