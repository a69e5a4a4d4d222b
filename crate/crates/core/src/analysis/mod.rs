//! Monte Carlo estimators, Itô residuals, comparison testing, De Giorgi
//! diagnostics and the Galerkin blow-up experiment.

mod comparison;
mod degiorgi;
mod ensemble;
mod example1;
mod ito;
pub mod stats;

use thiserror::Error;

use crate::discretize::DiscretizeError;
use crate::solver::SolverError;

pub use comparison::{comparison_test, ComparisonStats};
pub use degiorgi::{degiorgi_ensemble, degiorgi_sequence, DeGiorgiSettings, tail_and_moments, truncate, DeGiorgiPath, TailFit, TailReport, LAYER_CAKE_POINTS};
pub use ensemble::{path_seed, run_paths, McEnsemble, PathSummary};
pub use example1::{example1_blowup, example1_energies, BlowupPoint, BlowupReport, NoiseProfile};
pub use ito::{energy_residual, TestFunction};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported test function `{0}`")]
    UnsupportedTestFunction(String),
    #[error("{0}")]
    Incomplete(String),
}
